#pragma once
/**
 * @file trainer.hpp
 * @brief Backprop-free PINN training: sample a batch, estimate the loss gradient by
 *        randomized finite differences, take an Adam step.
 */

#include "bpfree/mlp.hpp"
#include "bpfree/params.hpp"
#include "bpfree/pde.hpp"
#include "bpfree/stein.hpp"
#include "bpfree/zo.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

namespace bpfree {

/// Maps the trainable vector theta onto flat network parameters.
class Parameterization {
 public:
  virtual ~Parameterization() = default;
  virtual const MlpSpec& spec() const = 0;
  virtual const ParamView& view() const = 0;
  virtual Eigen::VectorXd initial(std::uint64_t seed) const = 0;
  virtual Eigen::VectorXd network_params(const Eigen::VectorXd& theta) const = 0;
  virtual const char* domain() const = 0;
};

/// theta are the network parameters themselves.
class WeightDomain : public Parameterization {
 public:
  explicit WeightDomain(MlpSpec spec);
  const MlpSpec& spec() const override { return spec_; }
  const ParamView& view() const override { return view_; }
  Eigen::VectorXd initial(std::uint64_t seed) const override { return init_params(spec_, seed); }
  Eigen::VectorXd network_params(const Eigen::VectorXd& theta) const override { return theta; }
  const char* domain() const override { return "weight"; }

 private:
  MlpSpec spec_;
  ParamView view_;
};

struct TrainOptions {
  std::int64_t iterations = 1000;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  ZoConfig zo;
  SteinConfig stein;
  std::uint64_t seed = 0;
  std::int64_t log_every = 100;
  std::int64_t eval_every = 1000;
  /// Stop at the first hold-out evaluation with error <= target (0 disables).
  double target_error = 0.0;
  /// Called with the last finite state before a NonFiniteLoss error propagates.
  std::function<void(std::int64_t step, const Eigen::VectorXd& theta)> on_divergence;
};

struct MetricRow {
  std::int64_t step = 0;
  double loss = 0.0;  // mean probed loss over the preceding log interval
  double rel_l2 = std::numeric_limits<double>::quiet_NaN();
  std::int64_t queries = 0;
  double wall_seconds = 0.0;
};

struct TrainReport {
  std::vector<MetricRow> rows;
  std::vector<double> step_loss;  // mean probed loss per step
  double initial_rel_l2 = 0.0;
  double final_rel_l2 = 0.0;
  std::int64_t steps = 0;
  std::int64_t queries = 0;
  double wall_seconds = 0.0;
  Eigen::VectorXd theta;
};

/// Network over normalized inputs for given flat parameters.
Model make_network(const MlpSpec& spec, const Eigen::VectorXd& params);

/// Relative l2 of the unsmoothed solution on the problem's hold-out set.
double holdout_error(const MlpSpec& spec, const Eigen::VectorXd& params,
                     const PinnProblem& problem);

using ProgressFn = std::function<void(const MetricRow&)>;

TrainReport train(const PinnProblem& problem, const Parameterization& param,
                  const TrainOptions& opts, const ProgressFn& progress = {},
                  const Eigen::VectorXd* start = nullptr);

/// Means of consecutive windows of `window` step losses.
std::vector<double> window_means(const std::vector<double>& values, std::size_t window);

}  // namespace bpfree
