#include "bpfree/stein.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace bpfree {

namespace {

constexpr Index kMaxColumnsPerCall = Index{1} << 16;

}  // namespace

void SteinConfig::validate() const {
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidConfig, "stein sigma must be > 0");
  if (mode == SteinMode::MonteCarlo && samples < 1) {
    throw Error(ErrorCode::InvalidConfig, "stein sample count must be >= 1");
  }
  if (mode == SteinMode::SparseGrid && (level < 1 || level > kMaxQuadratureLevel)) {
    throw Error(ErrorCode::UnsupportedLevel,
                "stein grid level " + std::to_string(level) + " (supported: 1..3)");
  }
}

SteinEstimator::SteinEstimator(Index dim, const SteinConfig& cfg) : dim_(dim), cfg_(cfg) {
  if (dim < 1) throw Error(ErrorCode::InvalidDimension, "stein estimator needs dim >= 1");
  cfg_.validate();
  if (cfg_.mode == SteinMode::SparseGrid) {
    grid_ = build_sparse_grid<double>(dim, cfg_.level);
    Index origin = 0;
    grid_.nodes.colwise().squaredNorm().minCoeff(&origin);
    grid_.nodes.col(0).swap(grid_.nodes.col(origin));
    std::swap(grid_.weights(0), grid_.weights(origin));
  }
}

Index SteinEstimator::evaluations_per_point() const {
  return cfg_.mode == SteinMode::SparseGrid ? grid_.size() : 2 * Index{cfg_.samples} + 1;
}

const Eigen::MatrixXd& SteinEstimator::offsets(Index p, std::uint64_t call_index,
                                               Eigen::MatrixXd& scratch) const {
  if (cfg_.mode == SteinMode::SparseGrid) return grid_.nodes;
  const Index s = cfg_.samples;
  scratch.resize(dim_, 2 * s + 1);
  scratch.col(0).setZero();
  auto rng = make_stream(cfg_.seed, call_index, static_cast<std::uint64_t>(p));
  std::normal_distribution<double> normal;
  for (Index k = 0; k < s; ++k) {
    for (Index i = 0; i < dim_; ++i) scratch(i, 1 + k) = normal(rng);
    scratch.col(1 + s + k) = -scratch.col(1 + k);
  }
  return scratch;
}

Eigen::MatrixXd SteinEstimator::evaluate_stencil(const Model& model, const Eigen::MatrixXd& points,
                                                 std::uint64_t call_index, Index& n_out) const {
  if (points.rows() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "points have " + std::to_string(points.rows()) +
                                                  " rows, estimator dim is " +
                                                  std::to_string(dim_));
  }
  const Index n = evaluations_per_point();
  const Index total = points.cols();
  const Index chunk = std::max<Index>(1, kMaxColumnsPerCall / n);
  Eigen::MatrixXd values;  // n_out x (n * P), point-major
  Eigen::MatrixXd scratch;
  Eigen::MatrixXd shifted;
  n_out = -1;
  for (Index begin = 0; begin < total; begin += chunk) {
    const Index count = std::min(chunk, total - begin);
    shifted.resize(dim_, count * n);
    for (Index p = 0; p < count; ++p) {
      const auto& z = offsets(begin + p, call_index, scratch);
      shifted.middleCols(p * n, n) =
          (cfg_.sigma * z).colwise() + points.col(begin + p);
    }
    Eigen::MatrixXd out = model(shifted);
    if (out.cols() != shifted.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "model returned the wrong batch size");
    }
    if (n_out < 0) {
      n_out = out.rows();
      values.resize(n_out, n * total);
    }
    values.middleCols(begin * n, count * n) = out;
  }
  if (n_out < 0) n_out = 0;
  return values;
}

Eigen::MatrixXd SteinEstimator::smoothed(const Model& model, const Eigen::MatrixXd& points,
                                         std::uint64_t call_index) const {
  Index n_out = 0;
  const Eigen::MatrixXd values = evaluate_stencil(model, points, call_index, n_out);
  const Index n = evaluations_per_point();
  Eigen::VectorXd w(n);
  if (cfg_.mode == SteinMode::SparseGrid) {
    w = grid_.weights;
  } else {
    w.setConstant(1.0 / (2.0 * cfg_.samples));
    w(0) = 0.0;
  }
  Eigen::MatrixXd result(n_out, points.cols());
  for (Index p = 0; p < points.cols(); ++p) {
    result.col(p).noalias() = values.middleCols(p * n, n) * w;
  }
  return result;
}

SteinResult SteinEstimator::evaluate(const Model& model, const Eigen::MatrixXd& points,
                                     unsigned outputs, std::uint64_t call_index) const {
  Index n_out = 0;
  const Eigen::MatrixXd values = evaluate_stencil(model, points, call_index, n_out);
  const Index P = points.cols();
  if (P > 0 && n_out != 1) {
    throw Error(ErrorCode::DimensionMismatch, "derivative estimates need a scalar model");
  }
  const Index n = evaluations_per_point();
  const double s = cfg_.sigma;
  const double D = static_cast<double>(dim_);

  // F(j, p): evaluation j of point p.
  const Eigen::Map<const Eigen::MatrixXd> F(values.data(), n, P);

  SteinResult r;
  if (outputs & kValue) r.value.resize(P);
  if (outputs & kGradient) r.gradient.resize(dim_, P);
  if (outputs & kSecond) r.second.resize(dim_, P);
  if (outputs & kLaplacian) r.laplacian.resize(P);

  Eigen::VectorXd w(n);
  if (cfg_.mode == SteinMode::SparseGrid) {
    w = grid_.weights;
  } else {
    w.setConstant(1.0 / (2.0 * cfg_.samples));
    w(0) = 0.0;
  }

  // Per-node coefficient matrices; shared by all points in sparse-grid mode.
  Eigen::MatrixXd first_coef, second_coef;
  Eigen::VectorXd lap_coef;
  auto build = [&](const Eigen::MatrixXd& z) {
    if (outputs & kGradient) first_coef = z * w.asDiagonal() / s;
    if (outputs & kSecond) {
      second_coef = (z.array().square() - 1.0).matrix() * w.asDiagonal() / (s * s);
    }
    if (outputs & kLaplacian) {
      lap_coef = ((z.colwise().squaredNorm().array() - D).transpose() * w.array()) / (s * s);
    }
  };

  Eigen::MatrixXd scratch;
  const bool shared = cfg_.mode == SteinMode::SparseGrid;
  if (shared) build(grid_.nodes);

  if (shared && P > 0) {
    // Differences against the centre value keep the sums well conditioned.
    const Eigen::MatrixXd G = F.rowwise() - F.row(0);
    if (outputs & kValue) r.value.noalias() = F.transpose() * w;
    if (outputs & kGradient) r.gradient.noalias() = first_coef * G;
    if (outputs & kSecond) r.second.noalias() = second_coef * G;
    if (outputs & kLaplacian) r.laplacian.noalias() = G.transpose() * lap_coef;
    return r;
  }

  Eigen::VectorXd g(n);
  for (Index p = 0; p < P; ++p) {
    build(offsets(p, call_index, scratch));
    g = F.col(p).array() - F(0, p);
    if (outputs & kValue) r.value(p) = w.dot(F.col(p));
    if (outputs & kGradient) r.gradient.col(p).noalias() = first_coef * g;
    if (outputs & kSecond) r.second.col(p).noalias() = second_coef * g;
    if (outputs & kLaplacian) r.laplacian(p) = lap_coef.dot(g);
  }
  return r;
}

namespace {

SteinResult single(const Model& net, const Eigen::VectorXd& x, const SteinConfig& cfg,
                   unsigned outputs) {
  SteinEstimator est(x.size(), cfg);
  return est.evaluate(net, x, outputs);
}

}  // namespace

Eigen::VectorXd smoothed_forward(const Model& net, const Eigen::VectorXd& x,
                                 const SteinConfig& cfg) {
  SteinEstimator est(x.size(), cfg);
  return est.smoothed(net, x).col(0);
}

Eigen::VectorXd stein_first(const Model& net, const Eigen::VectorXd& x, const SteinConfig& cfg) {
  return single(net, x, cfg, kGradient).gradient.col(0);
}

Eigen::VectorXd stein_second_diag(const Model& net, const Eigen::VectorXd& x,
                                  const SteinConfig& cfg) {
  return single(net, x, cfg, kSecond).second.col(0);
}

double stein_laplacian(const Model& net, const Eigen::VectorXd& x, const SteinConfig& cfg) {
  return single(net, x, cfg, kLaplacian).laplacian(0);
}

}  // namespace bpfree
