#pragma once
/**
 * @file mlp.hpp
 * @brief Multilayer perceptrons whose layers are dense or TT matrices, evaluated
 *        from a flat parameter vector.
 */

#include "bpfree/common.hpp"
#include "bpfree/params.hpp"
#include "bpfree/tensor_train.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace bpfree {

enum class Activation { Tanh, Sine };

Activation parse_activation(const std::string& name);
const char* to_string(Activation a);

struct LayerSpec {
  enum class Kind { Dense, TT };
  Kind kind = Kind::Dense;
  Index rows = 0;  // outputs
  Index cols = 0;  // inputs
  TTLayout tt;     // Kind::TT only

  static LayerSpec dense(Index rows, Index cols);
  static LayerSpec tensorized(const TTLayout& layout);

  Index weight_count() const;
  bool operator==(const LayerSpec&) const = default;
};

struct MlpSpec {
  Index input_dim = 0;
  std::vector<LayerSpec> layers;
  Activation activation = Activation::Tanh;

  Index output_dim() const { return layers.empty() ? input_dim : layers.back().rows; }
  void validate() const;

  /// One group per weight tensor: each dense matrix, each TT core and each bias.
  ParamView param_view() const;
  Index param_count() const;

  bool operator==(const MlpSpec&) const = default;
};

/// Dense weights realized from a parameter vector; reusable across many batches.
struct MlpWeights {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Activation activation = Activation::Tanh;
};

MlpWeights realize(const MlpSpec& spec, const Eigen::VectorXd& params);

/// (input_dim x B) -> (output_dim x B)
Eigen::MatrixXd forward(const MlpWeights& w, const Eigen::MatrixXd& x);
Eigen::MatrixXd forward(const MlpSpec& spec, const Eigen::VectorXd& params,
                        const Eigen::MatrixXd& x);

/// Same as forward() but TT layers are applied by core contraction.
Eigen::MatrixXd forward_contracted(const MlpSpec& spec, const Eigen::VectorXd& params,
                                   const Eigen::MatrixXd& x);

/// Glorot-normal dense weights, tt_init cores, zero biases.
Eigen::VectorXd init_params(const MlpSpec& spec, std::uint64_t seed);

/// In-place activations. tanh and sin are evaluated with vectorized kernels.
void apply_activation(Activation a, Eigen::Ref<Eigen::MatrixXd> x);

std::string describe(const MlpSpec& spec);

}  // namespace bpfree
