#include "bpfree/pde.hpp"

#include "bpfree/oracles.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

namespace bpfree {

namespace {

constexpr double kPi = 3.14159265358979323846;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

double mean_square(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.squaredNorm() / static_cast<double>(v.size());
}

}  // namespace

Eigen::MatrixXd PinnProblem::normalize(const Eigen::MatrixXd& x) const {
  return (x.colwise() - input_shift()).array().colwise() * input_scale().array();
}

Eigen::MatrixXd PinnProblem::denormalize(const Eigen::MatrixXd& xhat) const {
  return (xhat.array().colwise() / input_scale().array()).matrix().colwise() + input_shift();
}

Model PinnProblem::solution_model(const Model& net) const {
  return [this, net](const Eigen::MatrixXd& xhat) -> Eigen::MatrixXd {
    const Eigen::MatrixXd out = net(xhat);
    if (out.rows() != 1) {
      throw Error(ErrorCode::DimensionMismatch, "solution network must have one output");
    }
    return transform(out.row(0), denormalize(xhat));
  };
}

Model PinnProblem::smoothed_model(const Model& net) const {
  return [this, net](const Eigen::MatrixXd& xhat) -> Eigen::MatrixXd {
    const Eigen::MatrixXd out = net(xhat);
    if (out.rows() != 1) {
      throw Error(ErrorCode::DimensionMismatch, "solution network must have one output");
    }
    return smoothed_transform(out.row(0), denormalize(xhat));
  };
}

// ---------------------------------------------------------------- Black-Scholes

double bs_exact(double x, double t, const BlackScholesParams& p) {
  const double tau = p.maturity - t;
  if (tau <= 0.0) return std::max(x - p.strike, 0.0);
  if (x <= 0.0) return 0.0;
  const double sd = p.volatility * std::sqrt(tau);
  const double d1 = (std::log(x / p.strike) + (p.rate + 0.5 * p.volatility * p.volatility) * tau) / sd;
  const double d2 = d1 - sd;
  return x * normal_cdf(d1) - p.strike * std::exp(-p.rate * tau) * normal_cdf(d2);
}

BlackScholes::BlackScholes(const BlackScholesParams& p) : params_(p) {
  budget = {100, 10, 10};
}

Eigen::VectorXd BlackScholes::lower() const { return vec2(0.0, 0.0); }
Eigen::VectorXd BlackScholes::upper() const { return vec2(params_.x_max, params_.maturity); }

Eigen::VectorXd BlackScholes::residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& u,
                                       const Eigen::MatrixXd& grad,
                                       const Eigen::MatrixXd& second) const {
  const double s2 = params_.volatility * params_.volatility;
  const auto s = x.row(0).transpose().array();
  return (grad.row(1).transpose().array() +
          0.5 * s2 * s.square() * second.row(0).transpose().array() +
          params_.rate * s * grad.row(0).transpose().array() - params_.rate * u.array())
      .matrix();
}

CollocationBatch BlackScholes::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> ux(0.0, params_.x_max), ut(0.0, params_.maturity);
  CollocationBatch b;
  b.residual.resize(2, budget.residual);
  for (Index i = 0; i < budget.residual; ++i) {
    b.residual(0, i) = ux(rng);
    b.residual(1, i) = ut(rng);
  }
  b.initial.resize(2, budget.initial);
  b.initial_target.resize(budget.initial);
  for (Index i = 0; i < budget.initial; ++i) {
    b.initial(0, i) = ux(rng);
    b.initial(1, i) = params_.maturity;
    b.initial_target(i) = std::max(b.initial(0, i) - params_.strike, 0.0);
  }
  b.boundary.resize(2, 2 * budget.boundary);
  b.boundary_target.resize(2 * budget.boundary);
  for (Index i = 0; i < budget.boundary; ++i) {
    const double t0 = ut(rng), t1 = ut(rng);
    b.boundary.col(i) << 0.0, t0;
    b.boundary_target(i) = 0.0;
    b.boundary.col(budget.boundary + i) << params_.x_max, t1;
    b.boundary_target(budget.boundary + i) =
        params_.x_max - params_.strike * std::exp(-params_.rate * (params_.maturity - t1));
  }
  return b;
}

Eigen::MatrixXd BlackScholes::holdout_points() const {
  constexpr Index nx = 201, nt = 101;
  Eigen::MatrixXd p(2, nx * nt);
  for (Index j = 0; j < nt; ++j)
    for (Index i = 0; i < nx; ++i) {
      p(0, j * nx + i) = params_.x_max * double(i) / double(nx - 1);
      p(1, j * nx + i) = params_.maturity * double(j) / double(nt - 1);
    }
  return p;
}

Eigen::VectorXd BlackScholes::reference(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd v(x.cols());
  for (Index i = 0; i < x.cols(); ++i) v(i) = bs_exact(x(0, i), x(1, i), params_);
  return v;
}

// ---------------------------------------------------------------- HJB

double hjb_exact(const Eigen::VectorXd& x, double t) { return x.lpNorm<1>() + 1.0 - t; }

Hjb::Hjb(Index space_dim) : space_dim_(space_dim) {
  if (space_dim < 1) throw Error(ErrorCode::InvalidDimension, "HJB needs >= 1 space dims");
  budget = {100, 0, 0};
}

Eigen::VectorXd Hjb::lower() const { return Eigen::VectorXd::Zero(input_dim()); }
Eigen::VectorXd Hjb::upper() const { return Eigen::VectorXd::Ones(input_dim()); }

Eigen::RowVectorXd Hjb::transform(const Eigen::RowVectorXd& net, const Eigen::MatrixXd& x) const {
  const auto t = x.row(space_dim_).array();
  const Eigen::RowVectorXd l1 = x.topRows(space_dim_).cwiseAbs().colwise().sum();
  return ((1.0 - t) * net.array()).matrix() + l1;
}

Eigen::RowVectorXd Hjb::smoothed_transform(const Eigen::RowVectorXd& net,
                                           const Eigen::MatrixXd& x) const {
  return ((1.0 - x.row(space_dim_).array()) * net.array()).matrix();
}

void Hjb::analytic_part(const Eigen::MatrixXd& x, Eigen::VectorXd& value, Eigen::MatrixXd& grad,
                        Eigen::MatrixXd& second) const {
  (void)second;
  const auto sp = x.topRows(space_dim_);
  value += sp.cwiseAbs().colwise().sum().transpose();
  grad.topRows(space_dim_) += sp.unaryExpr([](double v) { return double((v > 0) - (v < 0)); });
}

Eigen::VectorXd Hjb::residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& u,
                              const Eigen::MatrixXd& grad, const Eigen::MatrixXd& second) const {
  (void)x;
  (void)u;
  const Index d = space_dim_;
  return (grad.row(d).transpose().array() +
          second.topRows(d).colwise().sum().transpose().array() -
          0.05 * grad.topRows(d).colwise().squaredNorm().transpose().array() + 2.0)
      .matrix();
}

CollocationBatch Hjb::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  CollocationBatch b;
  b.residual.resize(input_dim(), budget.residual);
  for (Index i = 0; i < budget.residual; ++i)
    for (Index k = 0; k < input_dim(); ++k) b.residual(k, i) = u01(rng);
  b.initial.resize(input_dim(), 0);
  b.boundary.resize(input_dim(), 0);
  return b;
}

Eigen::MatrixXd Hjb::holdout_points() const {
  constexpr Index n = 10000;
  auto rng = make_stream(0x686a62u, 0x686f6c64u);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Eigen::MatrixXd p(input_dim(), n);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < input_dim(); ++k) p(k, i) = u01(rng);
  return p;
}

Eigen::VectorXd Hjb::reference(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd v(x.cols());
  for (Index i = 0; i < x.cols(); ++i) {
    v(i) = hjb_exact(x.col(i).head(space_dim_), x(space_dim_, i));
  }
  return v;
}

double hjb_transformed_forward(const Model& net, const Eigen::VectorXd& x, double t) {
  Eigen::VectorXd in(x.size() + 1);
  in << x, t;
  const double f = net(in)(0, 0);
  return (1.0 - t) * f + x.lpNorm<1>();
}

// ---------------------------------------------------------------- Burgers

Burgers::Burgers() : nu_(kBurgersNu) { budget = {1200, 100, 100}; }

Eigen::VectorXd Burgers::lower() const { return vec2(-1.0, 0.0); }
Eigen::VectorXd Burgers::upper() const { return vec2(1.0, 1.0); }

Eigen::VectorXd Burgers::residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& u,
                                  const Eigen::MatrixXd& grad,
                                  const Eigen::MatrixXd& second) const {
  (void)x;
  return (grad.row(1).transpose().array() + u.array() * grad.row(0).transpose().array() -
          nu_ * second.row(0).transpose().array())
      .matrix();
}

CollocationBatch Burgers::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> ux(-1.0, 1.0), ut(0.0, 1.0);
  CollocationBatch b;
  b.residual.resize(2, budget.residual);
  for (Index i = 0; i < budget.residual; ++i) {
    b.residual(0, i) = ux(rng);
    b.residual(1, i) = ut(rng);
  }
  b.initial.resize(2, budget.initial);
  b.initial_target.resize(budget.initial);
  for (Index i = 0; i < budget.initial; ++i) {
    b.initial(0, i) = ux(rng);
    b.initial(1, i) = 0.0;
    b.initial_target(i) = -std::sin(kPi * b.initial(0, i));
  }
  b.boundary.resize(2, 2 * budget.boundary);
  b.boundary_target = Eigen::VectorXd::Zero(2 * budget.boundary);
  for (Index i = 0; i < budget.boundary; ++i) {
    b.boundary.col(i) << -1.0, ut(rng);
    b.boundary.col(budget.boundary + i) << 1.0, ut(rng);
  }
  return b;
}

Eigen::MatrixXd Burgers::holdout_points() const {
  constexpr Index nx = 256, nt = 101;
  Eigen::MatrixXd p(2, nx * nt);
  for (Index j = 0; j < nt; ++j)
    for (Index i = 0; i < nx; ++i) {
      p(0, j * nx + i) = -1.0 + 2.0 * double(i) / double(nx - 1);
      p(1, j * nx + i) = double(j) / double(nt - 1);
    }
  return p;
}

Eigen::VectorXd Burgers::reference(const Eigen::MatrixXd& x) const {
  if (!reference_) {
    throw Error(ErrorCode::OracleNotBuilt, "Burgers reference grid missing; run `oracle build burgers`");
  }
  Eigen::VectorXd v(x.cols());
  for (Index i = 0; i < x.cols(); ++i) v(i) = reference_->bilinear(x(0, i), x(1, i));
  return v;
}

// ---------------------------------------------------------------- Darcy

Darcy::Darcy(std::shared_ptr<const Raster> permeability) : permeability_(std::move(permeability)) {
  if (!permeability_) throw Error(ErrorCode::InvalidConfig, "Darcy needs a permeability field");
  if ((permeability_->values.array() <= 0.0).any()) {
    throw Error(ErrorCode::InvalidConfig, "permeability must be positive everywhere");
  }
  budget = {0, 0, 0};
}

Eigen::VectorXd Darcy::lower() const { return vec2(0.0, 0.0); }
Eigen::VectorXd Darcy::upper() const { return vec2(1.0, 1.0); }

Eigen::RowVectorXd Darcy::transform(const Eigen::RowVectorXd& net, const Eigen::MatrixXd& x) const {
  const auto a = x.row(0).array(), b = x.row(1).array();
  return (a * (1.0 - a) * b * (1.0 - b) * net.array()).matrix();
}

Eigen::VectorXd Darcy::residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& u,
                                const Eigen::MatrixXd& grad, const Eigen::MatrixXd& second) const {
  (void)u;
  (void)grad;
  Eigen::VectorXd r(x.cols());
  for (Index i = 0; i < x.cols(); ++i) {
    r(i) = permeability_->nearest(x(0, i), x(1, i)) * (second(0, i) + second(1, i)) - 1.0;
  }
  return r;
}

CollocationBatch Darcy::sample(std::mt19937_64& rng) const {
  const Raster& k = *permeability_;
  const Index inner_r = k.rows() - 2, inner_c = k.cols() - 2;
  const Index all = inner_r * inner_c;
  CollocationBatch b;
  auto node = [&](Index flat, Index col) {
    b.residual(0, col) = k.x_at(1 + flat % inner_c);
    b.residual(1, col) = k.y_at(1 + flat / inner_c);
  };
  if (budget.residual <= 0 || budget.residual >= all) {
    b.residual.resize(2, all);
    for (Index f = 0; f < all; ++f) node(f, f);
  } else {
    b.residual.resize(2, budget.residual);
    std::uniform_int_distribution<Index> pick(0, all - 1);
    for (Index i = 0; i < budget.residual; ++i) node(pick(rng), i);
  }
  b.initial.resize(2, 0);
  b.boundary.resize(2, 0);
  return b;
}

Eigen::MatrixXd Darcy::holdout_points() const {
  const Raster& k = *permeability_;
  Eigen::MatrixXd p(2, k.rows() * k.cols());
  for (Index r = 0; r < k.rows(); ++r)
    for (Index c = 0; c < k.cols(); ++c) {
      p(0, r * k.cols() + c) = k.x_at(c);
      p(1, r * k.cols() + c) = k.y_at(r);
    }
  return p;
}

Eigen::VectorXd Darcy::reference(const Eigen::MatrixXd& x) const {
  if (!reference_) {
    throw Error(ErrorCode::OracleNotBuilt, "Darcy reference grid missing; run `oracle build darcy`");
  }
  Eigen::VectorXd v(x.cols());
  for (Index i = 0; i < x.cols(); ++i) v(i) = reference_->bilinear(x(0, i), x(1, i));
  return v;
}

double darcy_residual(const Model& net, const Eigen::VectorXd& x, const Raster& k_field,
                      const SteinConfig& cfg) {
  if (x.size() != 2) throw Error(ErrorCode::DimensionMismatch, "Darcy points are 2-D");
  const double k = k_field.nearest(x(0), x(1));
  return k * stein_laplacian(net, x, cfg) - 1.0;
}

// ---------------------------------------------------------------- loss

LossBreakdown pinn_loss(const Model& net, const PinnProblem& problem,
                        const SteinEstimator& estimator, const CollocationBatch& batch) {
  const Model model = problem.smoothed_model(net);
  const double norm = 1.0 / (problem.output_scale() * problem.output_scale());
  const Eigen::VectorXd scale = problem.input_scale();
  LossBreakdown out;
  if (batch.residual.cols() > 0) {
    const SteinResult s =
        estimator.evaluate(model, problem.normalize(batch.residual), kValue | kGradient | kSecond);
    Eigen::VectorXd value = s.value;
    Eigen::MatrixXd grad = s.gradient.array().colwise() * scale.array();
    Eigen::MatrixXd second = s.second.array().colwise() * scale.array().square();
    problem.analytic_part(batch.residual, value, grad, second);
    out.residual = norm * mean_square(problem.residual(batch.residual, value, grad, second));
  }
  // Data terms share one smoothed evaluation.
  const Index ni = batch.initial.cols(), nb = batch.boundary.cols();
  if (ni + nb > 0) {
    Eigen::MatrixXd pts(problem.input_dim(), ni + nb);
    pts.leftCols(ni) = batch.initial;
    pts.rightCols(nb) = batch.boundary;
    Eigen::VectorXd v = estimator.smoothed(model, problem.normalize(pts)).row(0).transpose();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(pts.rows(), pts.cols()), h = g;
    problem.analytic_part(pts, v, g, h);
    if (ni > 0) out.initial = norm * mean_square(v.head(ni) - batch.initial_target);
    if (nb > 0) out.boundary = norm * mean_square(v.tail(nb) - batch.boundary_target);
  }
  out.total = out.residual + problem.weights.lambda0 * out.initial +
              problem.weights.lambdab * out.boundary;
  return out;
}

LossBreakdown pinn_loss(const Model& net, const PinnProblem& problem, const SteinConfig& cfg,
                        std::uint64_t batch_seed) {
  auto rng = make_stream(batch_seed, 0x62617463u);
  const CollocationBatch batch = problem.sample(rng);
  const SteinEstimator estimator(problem.input_dim(), cfg);
  return pinn_loss(net, problem, estimator, batch);
}

double relative_l2(const Eigen::VectorXd& pred, const Eigen::VectorXd& ref) {
  if (pred.size() != ref.size()) {
    throw Error(ErrorCode::DimensionMismatch, "prediction and reference differ in length");
  }
  const double denom = ref.norm();
  if (!(denom > 0.0)) throw Error(ErrorCode::ZeroReferenceNorm, "reference has zero norm");
  return (pred - ref).norm() / denom;
}

Eigen::VectorXd predict(const Model& net, const PinnProblem& problem, const Eigen::MatrixXd& x) {
  return problem.solution_model(net)(problem.normalize(x)).row(0).transpose();
}

// ---------------------------------------------------------------- factory

std::string oracle_path(const std::string& data_dir, const std::string& problem) {
  return (std::filesystem::path(data_dir) / (problem + "_reference.txt")).string();
}

std::string permeability_path(const std::string& data_dir) {
  return (std::filesystem::path(data_dir) / "darcy_permeability.txt").string();
}

std::unique_ptr<PinnProblem> make_problem(const std::string& name, const ProblemOptions& opts) {
  auto load = [&](const std::string& problem) -> std::shared_ptr<const Raster> {
    if (opts.data_dir.empty()) return nullptr;
    const std::string path = oracle_path(opts.data_dir, problem);
    if (!std::filesystem::exists(path)) {
      if (opts.require_reference) {
        throw Error(ErrorCode::OracleNotBuilt, path + " not found; run `oracle build " + problem + "`");
      }
      return nullptr;
    }
    return std::make_shared<const Raster>(read_raster(path));
  };
  if (name == "black-scholes" || name == "bs") return std::make_unique<BlackScholes>();
  if (name == "hjb") return std::make_unique<Hjb>();
  if (name == "burgers") {
    auto p = std::make_unique<Burgers>();
    p->set_reference(load("burgers"));
    return p;
  }
  if (name == "darcy") {
    std::shared_ptr<const Raster> k;
    if (opts.data_dir.empty()) {
      k = std::make_shared<const Raster>(default_permeability());
    } else {
      k = std::make_shared<const Raster>(read_raster(permeability_path(opts.data_dir)));
    }
    auto p = std::make_unique<Darcy>(k);
    auto ref = load("darcy");
    if (ref) {
      const auto it = ref->meta.find("permeability_checksum");
      if (it == ref->meta.end() || it->second != std::to_string(k->checksum())) {
        throw Error(ErrorCode::OracleNotBuilt,
                    "Darcy reference was built for a different permeability; rebuild it");
      }
    }
    p->set_reference(ref);
    return p;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown problem '" + name + "'");
}

}  // namespace bpfree
