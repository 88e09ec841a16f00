#pragma once
/**
 * @file config.hpp
 * @brief Run configuration: flat `key = value` text with dotted keys.
 *
 * Precedence: built-in defaults < config file < BPFREE_* environment < command line.
 * The environment name of a key is BPFREE_ followed by the key upper-cased with
 * dots replaced by underscores (zo.queries -> BPFREE_ZO_QUERIES).
 */

#include "bpfree/mlp.hpp"
#include "bpfree/photonic.hpp"
#include "bpfree/stein.hpp"
#include "bpfree/zo.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace bpfree {

enum class Domain { Weight, Phase };
Domain parse_domain(const std::string& s);
const char* to_string(Domain d);

/// 2 -> 128 dense, 128 x 128 TT (ranks 2), 128 -> 1 dense; tanh.
MlpSpec default_model();

struct RunConfig {
  // problem
  std::string problem = "black-scholes";
  double sigma = 0.0;  // 0 selects the problem default
  double lambda0 = 1.0;
  double lambdab = 1.0;
  Index residual_points = -1;  // -1 keeps the problem's budget
  Index initial_points = -1;
  Index boundary_points = -1;
  std::string data_dir = "data";

  // loss estimator
  SteinMode loss_mode = SteinMode::SparseGrid;
  int loss_level = 3;
  Index loss_samples = 16;

  // model
  MlpSpec model = default_model();

  // optimizer
  std::int64_t iterations = 1000;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t log_every = 100;
  std::int64_t eval_every = 1000;
  double target_error = 0.0;  // > 0 stops once the hold-out error reaches it
  ZoConfig zo;

  // photonic
  Domain domain = Domain::Weight;
  NoiseModel noise;
  Index block = 8;

  // seeds and output
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "runs/default";

  void validate() const;
  bool operator==(const RunConfig&) const;
};

/// "dense:128x2,tt:4x4x8:8x4x4:1x2x2x1,dense:1x128". Input dim comes from the first layer.
std::string format_layers(const MlpSpec& spec);
MlpSpec parse_layers(const std::string& text, Activation activation);

std::vector<std::string> config_keys();
std::map<std::string, std::string> to_map(const RunConfig& cfg);
/// Applies one key; InvalidConfig on an unknown key or a malformed value.
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);

std::string serialize(const RunConfig& cfg);
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
/// Applies every BPFREE_* variable that names a known key.
void apply_env(RunConfig& cfg);
std::string env_name(const std::string& key);

/// FNV-1a of the serialized config, 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Named configurations used by the acceptance suite and `reproduce`.
std::vector<std::string> preset_names();
RunConfig preset(const std::string& name);

}  // namespace bpfree
