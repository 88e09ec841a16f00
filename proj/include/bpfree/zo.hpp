#pragma once
/**
 * @file zo.hpp
 * @brief Randomized zeroth-order gradient estimation and the SGD/Adam updates that
 *        consume it.
 */

#include "bpfree/common.hpp"
#include "bpfree/params.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>

namespace bpfree {

enum class Perturbation { Gaussian, Rademacher };
enum class Grouping { Global, PerTensor };

Perturbation parse_perturbation(const std::string& name);
Grouping parse_grouping(const std::string& name);
const char* to_string(Perturbation p);
const char* to_string(Grouping g);

struct ZoConfig {
  int queries = 1;     // N
  double radius = 0.01;  // mu
  Perturbation distribution = Perturbation::Gaussian;
  Grouping grouping = Grouping::PerTensor;
  std::uint64_t seed = 0;

  void validate() const;
};

using LossFn = std::function<double(const Eigen::VectorXd&)>;

struct RgeResult {
  Eigen::VectorXd gradient;
  std::int64_t queries = 0;  // loss evaluations spent
  double mean_loss = 0.0;    // average of all probed losses
};

/// Loss evaluations per estimate: 2 N per group.
std::int64_t rge_query_count(const ParamView& view, const ZoConfig& cfg);

/// Central-difference randomized estimate. For every group g, N perturbations xi
/// are drawn over g's coordinates from stream (seed, step, g, i), and
/// (L(theta + mu xi) - L(theta - mu xi)) / (2 mu) * xi is averaged into g.
RgeResult rge_estimate(const LossFn& loss, const Eigen::VectorXd& params, const ParamView& view,
                       const ZoConfig& cfg, std::uint64_t step = 0);

/// The perturbation used for (step, group, query); zero outside the group.
Eigen::VectorXd rge_perturbation(const ParamView& view, const ZoConfig& cfg, std::uint64_t step,
                                 int group, int query);

void zo_sgd_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t t = 0;

  explicit AdamState(Index size = 0) : m(Eigen::VectorXd::Zero(size)), v(Eigen::VectorXd::Zero(size)) {}
};

void zo_adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                  double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

}  // namespace bpfree
