#pragma once
/**
 * @file pde.hpp
 * @brief PINN benchmark problems, the derivative-free PINN loss and the relative
 *        l2 metric.
 *
 * A problem sees the network through its solution model: inputs are normalized
 * (x_hat = (x - shift) * scale), the raw network output is passed through the
 * problem's transform (output scale, hard constraints), and Stein smoothing acts on
 * that composite in normalized coordinates. Derivatives are mapped back to raw
 * coordinates before the residual is formed.
 */

#include "bpfree/common.hpp"
#include "bpfree/raster.hpp"
#include "bpfree/stein.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <random>
#include <string>

namespace bpfree {

struct LossWeights {
  double lambda0 = 1.0;  // initial / terminal term
  double lambdab = 1.0;  // boundary term
};

struct SamplingBudget {
  Index residual = 0;
  Index initial = 0;   // initial or terminal points
  Index boundary = 0;  // per boundary face
};

struct CollocationBatch {
  Eigen::MatrixXd residual;  // raw coordinates, one column per point
  Eigen::MatrixXd initial;
  Eigen::VectorXd initial_target;
  Eigen::MatrixXd boundary;
  Eigen::VectorXd boundary_target;

  Index points() const { return residual.cols() + initial.cols() + boundary.cols(); }
};

struct LossBreakdown {
  double total = 0.0;
  double residual = 0.0;
  double initial = 0.0;
  double boundary = 0.0;
};

class PinnProblem {
 public:
  virtual ~PinnProblem() = default;

  virtual std::string name() const = 0;
  /// Network input dimension (space plus time when time-dependent).
  virtual Index input_dim() const = 0;
  virtual Eigen::VectorXd lower() const = 0;
  virtual Eigen::VectorXd upper() const = 0;

  /// Default normalization maps the domain box onto [-1, 1] per coordinate.
  virtual Eigen::VectorXd input_shift() const { return 0.5 * (lower() + upper()); }
  virtual Eigen::VectorXd input_scale() const {
    return (2.0 / (upper() - lower()).array()).matrix();
  }
  /// Squared-error terms are divided by this squared.
  virtual double output_scale() const { return 1.0; }

  /// Solution values from raw network outputs (1 x B) at raw points (dim x B).
  virtual Eigen::RowVectorXd transform(const Eigen::RowVectorXd& net,
                                       const Eigen::MatrixXd& x) const {
    (void)x;
    return output_scale() * net;
  }

  /// Part of the transform that goes through Gaussian smoothing. Problems whose
  /// transform adds a closed-form term override this and analytic_part.
  virtual Eigen::RowVectorXd smoothed_transform(const Eigen::RowVectorXd& net,
                                                const Eigen::MatrixXd& x) const {
    return transform(net, x);
  }
  /// Adds the closed-form term with exact derivatives to smoothed estimates.
  virtual void analytic_part(const Eigen::MatrixXd& x, Eigen::VectorXd& value,
                             Eigen::MatrixXd& grad, Eigen::MatrixXd& second) const {
    (void)x;
    (void)value;
    (void)grad;
    (void)second;
  }

  /// PDE residual from raw-coordinate value, gradient and Hessian diagonal.
  virtual Eigen::VectorXd residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& u,
                                   const Eigen::MatrixXd& grad,
                                   const Eigen::MatrixXd& second) const = 0;

  virtual CollocationBatch sample(std::mt19937_64& rng) const = 0;

  virtual Eigen::MatrixXd holdout_points() const = 0;
  /// Exact or gridded reference values; OracleNotBuilt if a needed grid is missing.
  virtual Eigen::VectorXd reference(const Eigen::MatrixXd& x) const = 0;

  virtual double default_sigma() const { return 1e-3; }

  SamplingBudget budget;
  LossWeights weights;

  Eigen::MatrixXd normalize(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd denormalize(const Eigen::MatrixXd& xhat) const;

  /// Composite model over normalized inputs.
  Model solution_model(const Model& net) const;
  /// Same, with smoothed_transform in place of transform.
  Model smoothed_model(const Model& net) const;
};

// Black-Scholes call price: u_t + 0.5 s^2 x^2 u_xx + r x u_x - r u = 0 on
// [0, 200] x [0, 1], terminal max(x - K, 0).
struct BlackScholesParams {
  double volatility = 0.2;
  double rate = 0.05;
  double strike = 100.0;
  double maturity = 1.0;
  double x_max = 200.0;
};

double bs_exact(double x, double t, const BlackScholesParams& p = {});

class BlackScholes : public PinnProblem {
 public:
  explicit BlackScholes(const BlackScholesParams& p = {});
  std::string name() const override { return "black-scholes"; }
  Index input_dim() const override { return 2; }
  Eigen::VectorXd lower() const override;
  Eigen::VectorXd upper() const override;
  double output_scale() const override { return params_.strike; }
  Eigen::VectorXd residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& u,
                           const Eigen::MatrixXd& grad,
                           const Eigen::MatrixXd& second) const override;
  CollocationBatch sample(std::mt19937_64& rng) const override;
  Eigen::MatrixXd holdout_points() const override;
  Eigen::VectorXd reference(const Eigen::MatrixXd& x) const override;

  const BlackScholesParams& params() const { return params_; }

 private:
  BlackScholesParams params_;
};

// HJB: u_t + lap_x u - 0.05 |grad_x u|^2 + 2 = 0 on [0, 1]^20 x [0, 1],
// terminal u(x, 1) = |x|_1 enforced by u = (1 - t) f + |x|_1.
double hjb_exact(const Eigen::VectorXd& x, double t);

class Hjb : public PinnProblem {
 public:
  explicit Hjb(Index space_dim = 20);
  std::string name() const override { return "hjb"; }
  Index input_dim() const override { return space_dim_ + 1; }
  Eigen::VectorXd lower() const override;
  Eigen::VectorXd upper() const override;
  /// Raw coordinates: the smoothing radius is specified on the unit cube itself.
  Eigen::VectorXd input_shift() const override { return Eigen::VectorXd::Zero(input_dim()); }
  Eigen::VectorXd input_scale() const override { return Eigen::VectorXd::Ones(input_dim()); }
  Eigen::RowVectorXd transform(const Eigen::RowVectorXd& net,
                               const Eigen::MatrixXd& x) const override;
  /// Only (1 - t) net is smoothed; |x|_1 enters with gradient sign(x) and zero
  /// curvature, so its kinks do not bias the residual at sigma = 0.1.
  Eigen::RowVectorXd smoothed_transform(const Eigen::RowVectorXd& net,
                                        const Eigen::MatrixXd& x) const override;
  void analytic_part(const Eigen::MatrixXd& x, Eigen::VectorXd& value, Eigen::MatrixXd& grad,
                     Eigen::MatrixXd& second) const override;
  Eigen::VectorXd residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& u,
                           const Eigen::MatrixXd& grad,
                           const Eigen::MatrixXd& second) const override;
  CollocationBatch sample(std::mt19937_64& rng) const override;
  Eigen::MatrixXd holdout_points() const override;
  Eigen::VectorXd reference(const Eigen::MatrixXd& x) const override;
  double default_sigma() const override { return 0.1; }

  Index space_dim() const { return space_dim_; }

 private:
  Index space_dim_;
};

/// (1 - t) net + |x|_1 for a column (x, t).
double hjb_transformed_forward(const Model& net, const Eigen::VectorXd& x, double t);

// Viscous Burgers on [-1, 1] x [0, 1] with u(x, 0) = -sin(pi x), u(+-1, t) = 0.
class Burgers : public PinnProblem {
 public:
  Burgers();
  std::string name() const override { return "burgers"; }
  Index input_dim() const override { return 2; }
  Eigen::VectorXd lower() const override;
  Eigen::VectorXd upper() const override;
  Eigen::VectorXd residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& u,
                           const Eigen::MatrixXd& grad,
                           const Eigen::MatrixXd& second) const override;
  CollocationBatch sample(std::mt19937_64& rng) const override;
  Eigen::MatrixXd holdout_points() const override;
  Eigen::VectorXd reference(const Eigen::MatrixXd& x) const override;

  void set_reference(std::shared_ptr<const Raster> grid) { reference_ = std::move(grid); }
  double viscosity() const { return nu_; }

 private:
  double nu_;
  std::shared_ptr<const Raster> reference_;
};

// Darcy: div(k grad u) = 1 on [0, 1]^2, u = 0 on the boundary through
// u = x1 (1 - x1) x2 (1 - x2) f. With k piecewise constant the residual is k lap u - 1.
class Darcy : public PinnProblem {
 public:
  explicit Darcy(std::shared_ptr<const Raster> permeability);
  std::string name() const override { return "darcy"; }
  Index input_dim() const override { return 2; }
  Eigen::VectorXd lower() const override;
  Eigen::VectorXd upper() const override;
  Eigen::RowVectorXd transform(const Eigen::RowVectorXd& net,
                               const Eigen::MatrixXd& x) const override;
  Eigen::VectorXd residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& u,
                           const Eigen::MatrixXd& grad,
                           const Eigen::MatrixXd& second) const override;
  /// Samples budget.residual nodes of the permeability grid (all nodes when 0).
  CollocationBatch sample(std::mt19937_64& rng) const override;
  Eigen::MatrixXd holdout_points() const override;
  Eigen::VectorXd reference(const Eigen::MatrixXd& x) const override;

  const Raster& permeability() const { return *permeability_; }
  void set_reference(std::shared_ptr<const Raster> grid) { reference_ = std::move(grid); }

 private:
  std::shared_ptr<const Raster> permeability_;
  std::shared_ptr<const Raster> reference_;
};

/// k(x) lap u(x) - 1 at one interior point.
double darcy_residual(const Model& net, const Eigen::VectorXd& x, const Raster& k_field,
                      const SteinConfig& cfg);

/// Weighted PINN loss with all derivatives from Stein estimates of the smoothed
/// solution model. batch_seed keys the collocation sample.
LossBreakdown pinn_loss(const Model& net, const PinnProblem& problem, const SteinConfig& cfg,
                        std::uint64_t batch_seed);

/// Loss on an explicit batch.
LossBreakdown pinn_loss(const Model& net, const PinnProblem& problem,
                        const SteinEstimator& estimator, const CollocationBatch& batch);

/// |pred - ref| / |ref|
double relative_l2(const Eigen::VectorXd& pred, const Eigen::VectorXd& ref);

/// Unsmoothed solution values at raw points.
Eigen::VectorXd predict(const Model& net, const PinnProblem& problem, const Eigen::MatrixXd& x);

struct ProblemOptions {
  std::string data_dir;  // permeability file and cached oracle grids
  bool require_reference = false;
};

/// "black-scholes", "hjb", "burgers" or "darcy".
std::unique_ptr<PinnProblem> make_problem(const std::string& name, const ProblemOptions& opts = {});

std::string oracle_path(const std::string& data_dir, const std::string& problem);
std::string permeability_path(const std::string& data_dir);

}  // namespace bpfree
