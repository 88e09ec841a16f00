#pragma once
/**
 * @file stein.hpp
 * @brief Derivative estimates of a Gaussian-smoothed model from function values only.
 *
 * For f_sigma(x) = E[f(x + delta)], delta ~ N(0, sigma^2 I), Stein's identity gives
 * gradient, per-coordinate second derivatives and the Laplacian as weighted sums of
 * f evaluated at x +- delta. The expectation is taken either with antithetic
 * Monte-Carlo pairs or with a symmetric sparse grid.
 */

#include "bpfree/common.hpp"
#include "bpfree/quadrature.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>

namespace bpfree {

/// Batched model: columns of a (dim x B) input map to columns of an (n_out x B) output.
using Model = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

enum class SteinMode { MonteCarlo, SparseGrid };

struct SteinConfig {
  double sigma = 1e-3;
  SteinMode mode = SteinMode::SparseGrid;
  int samples = 16;  // antithetic pairs (Monte-Carlo)
  int level = 3;     // grid level (sparse grid)
  std::uint64_t seed = 0;

  void validate() const;
};

enum SteinOutput : unsigned {
  kValue = 1u,
  kGradient = 2u,
  kSecond = 4u,
  kLaplacian = 8u,
  kAllDerivatives = kValue | kGradient | kSecond | kLaplacian,
};

/// Column p of each member belongs to input point p.
struct SteinResult {
  Eigen::VectorXd value;      // smoothed value
  Eigen::MatrixXd gradient;   // dim x P
  Eigen::MatrixXd second;     // dim x P, diagonal of the Hessian
  Eigen::VectorXd laplacian;  // P
};

class SteinEstimator {
 public:
  SteinEstimator(Index dim, const SteinConfig& cfg);

  Index dim() const { return dim_; }
  const SteinConfig& config() const { return cfg_; }

  /// Model evaluations spent per input point.
  Index evaluations_per_point() const;

  /// Scalar model only. call_index selects the Monte-Carlo stream.
  SteinResult evaluate(const Model& model, const Eigen::MatrixXd& points,
                       unsigned outputs = kAllDerivatives, std::uint64_t call_index = 0) const;

  /// Smoothed forward for models with any number of outputs (n_out x P).
  Eigen::MatrixXd smoothed(const Model& model, const Eigen::MatrixXd& points,
                           std::uint64_t call_index = 0) const;

 private:
  // Unit offsets for point p, one column per evaluation. Column 0 is the origin.
  const Eigen::MatrixXd& offsets(Index p, std::uint64_t call_index,
                                 Eigen::MatrixXd& scratch) const;
  Eigen::MatrixXd evaluate_stencil(const Model& model, const Eigen::MatrixXd& points,
                                   std::uint64_t call_index, Index& n_out) const;

  Index dim_;
  SteinConfig cfg_;
  SparseGrid<double> grid_;  // sparse-grid mode, origin moved to column 0
};

// Single-point conveniences.
Eigen::VectorXd smoothed_forward(const Model& net, const Eigen::VectorXd& x,
                                 const SteinConfig& cfg);
Eigen::VectorXd stein_first(const Model& net, const Eigen::VectorXd& x, const SteinConfig& cfg);
Eigen::VectorXd stein_second_diag(const Model& net, const Eigen::VectorXd& x,
                                  const SteinConfig& cfg);
double stein_laplacian(const Model& net, const Eigen::VectorXd& x, const SteinConfig& cfg);

}  // namespace bpfree
