#include "bpfree/photonic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace bpfree {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

}  // namespace

Eigen::Matrix2d mzi_rotation(double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  Eigen::Matrix2d r;
  r << c, s, -s, c;
  return r;
}

const std::vector<Rotator>& rectangular_placements(Index n) {
  static thread_local std::map<Index, std::vector<Rotator>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<Rotator> list;
  for (Index s = 0; s < n; ++s)
    for (Index i = s % 2; i + 1 < n; i += 2) list.push_back({i, s});
  return cache.emplace(n, std::move(list)).first->second;
}

MziMesh MziMesh::rectangular(Index n) {
  if (n < 1) throw Error(ErrorCode::InvalidDimension, "mesh size must be >= 1");
  MziMesh m;
  m.n = n;
  m.rotators = rectangular_placements(n);
  m.phases = Eigen::VectorXd::Zero(m.size());
  m.diag = Eigen::VectorXd::Ones(n);
  return m;
}

namespace {

void apply_rotators(Eigen::MatrixXd& m, const std::vector<Rotator>& rotators, const double* phases) {
  for (std::size_t p = 0; p < rotators.size(); ++p) {
    const Index i = rotators[p].i;
    const double c = std::cos(phases[p]), s = std::sin(phases[p]);
    for (Index col = 0; col < m.cols(); ++col) {
      const double a = m(i, col), b = m(i + 1, col);
      m(i, col) = c * a + s * b;
      m(i + 1, col) = -s * a + c * b;
    }
  }
}

}  // namespace

Eigen::MatrixXd mesh_matrix(const MziMesh& mesh) {
  if (mesh.phases.size() != mesh.size() || mesh.diag.size() != mesh.n) {
    throw Error(ErrorCode::DimensionMismatch, "mesh phases or diagonal have the wrong size");
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(mesh.n, mesh.n);
  apply_rotators(m, mesh.rotators, mesh.phases.data());
  return mesh.diag.asDiagonal() * m;
}

Eigen::MatrixXd mesh_matrix(Index n, const double* phases) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  apply_rotators(m, rectangular_placements(n), phases);
  return m;
}

SvdBlock SvdBlock::identity(Index rows, Index cols, double scale) {
  SvdBlock b;
  b.rows = rows;
  b.cols = cols;
  b.scale = scale;
  b.u = MziMesh::rectangular(rows);
  b.v = MziMesh::rectangular(cols);
  b.sigma_phases = Eigen::VectorXd::Zero(std::min(rows, cols));
  return b;
}

Index SvdBlock::phase_count(Index rows, Index cols) {
  return rows * (rows - 1) / 2 + cols * (cols - 1) / 2 + std::min(rows, cols);
}

void SvdBlock::set_phases(const double* phases) {
  u.phases = Eigen::Map<const Eigen::VectorXd>(phases, u.size());
  v.phases = Eigen::Map<const Eigen::VectorXd>(phases + u.size(), v.size());
  sigma_phases =
      Eigen::Map<const Eigen::VectorXd>(phases + u.size() + v.size(), std::min(rows, cols));
}

Eigen::MatrixXd SvdBlock::matrix() const {
  const Index r = std::min(rows, cols);
  const Eigen::MatrixXd U = mesh_matrix(u);
  const Eigen::MatrixXd V = mesh_matrix(v);
  const Eigen::VectorXd sig = scale * sigma_phases.array().cos();
  return U.leftCols(r) * sig.asDiagonal() * V.leftCols(r).transpose();
}

Eigen::MatrixXd svd_matrix(Index rows, Index cols, double scale, const double* phases) {
  const Index r = std::min(rows, cols);
  const Eigen::MatrixXd U = mesh_matrix(rows, phases);
  const Eigen::MatrixXd V = mesh_matrix(cols, phases + rows * (rows - 1) / 2);
  const double* sp = phases + rows * (rows - 1) / 2 + cols * (cols - 1) / 2;
  Eigen::VectorXd sig(r);
  for (Index i = 0; i < r; ++i) sig(i) = scale * std::cos(sp[i]);
  return U.leftCols(r) * sig.asDiagonal() * V.leftCols(r).transpose();
}

Eigen::MatrixXd svd_forward(const SvdBlock& block, const Eigen::MatrixXd& x) {
  if (x.rows() != block.cols) {
    throw Error(ErrorCode::DimensionMismatch, "SVD block input has the wrong length");
  }
  const Index r = std::min(block.rows, block.cols);
  const Eigen::MatrixXd vx = mesh_matrix(block.v).transpose() * x;  // cols x B
  Eigen::MatrixXd mid = Eigen::MatrixXd::Zero(block.rows, x.cols());
  const Eigen::VectorXd sig = block.scale * block.sigma_phases.array().cos();
  mid.topRows(r) = sig.asDiagonal() * vx.topRows(r);
  return mesh_matrix(block.u) * mid;
}

Eigen::MatrixXd BlockLayer::assembled() const {
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(block_rows * k, block_cols * k);
  for (Index p = 0; p < block_rows; ++p)
    for (Index q = 0; q < block_cols; ++q)
      full.block(p * k, q * k, k, k) = blocks[static_cast<std::size_t>(p * block_cols + q)].matrix();
  return full.topLeftCorner(rows, cols);
}

Eigen::MatrixXd BlockLayer::forward(const Eigen::MatrixXd& x) const {
  if (x.rows() != cols) throw Error(ErrorCode::DimensionMismatch, "layer input has the wrong length");
  Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(block_cols * k, x.cols());
  padded.topRows(cols) = x;
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(block_rows * k, x.cols());
  for (Index p = 0; p < block_rows; ++p)
    for (Index q = 0; q < block_cols; ++q)
      y.middleRows(p * k, k) +=
          svd_forward(blocks[static_cast<std::size_t>(p * block_cols + q)], padded.middleRows(q * k, k));
  return y.topRows(rows);
}

BlockLayer block_partitioned_layer(Index rows, Index cols, Index k, double scale) {
  if (k < 2) throw Error(ErrorCode::InvalidConfig, "block size must be >= 2");
  if (rows < 1 || cols < 1) throw Error(ErrorCode::InvalidDimension, "empty layer");
  BlockLayer layer;
  layer.rows = rows;
  layer.cols = cols;
  layer.k = k;
  layer.block_rows = (rows + k - 1) / k;
  layer.block_cols = (cols + k - 1) / k;
  for (Index b = 0; b < layer.block_rows * layer.block_cols; ++b) {
    layer.blocks.push_back(SvdBlock::identity(k, k, scale));
  }
  return layer;
}

void append_mesh_adjacency(Index n, Index offset, Adjacency& out) {
  const auto& rot = rectangular_placements(n);
  for (std::size_t p = 0; p + 1 < rot.size(); ++p) {
    if (rot[p].stage == rot[p + 1].stage) {
      out.emplace_back(offset + Index(p), offset + Index(p) + 1);
    }
  }
}

void append_line_adjacency(Index count, Index offset, Adjacency& out) {
  for (Index i = 0; i + 1 < count; ++i) out.emplace_back(offset + i, offset + i + 1);
}

void append_svd_adjacency(Index rows, Index cols, Index offset, Adjacency& out) {
  append_mesh_adjacency(rows, offset, out);
  append_mesh_adjacency(cols, offset + rows * (rows - 1) / 2, out);
  append_line_adjacency(std::min(rows, cols),
                        offset + rows * (rows - 1) / 2 + cols * (cols - 1) / 2, out);
}

NoiseModel NoiseModel::hardware() {
  NoiseModel m;
  m.bits = 8;
  m.gamma = 1.0;
  m.sigma_gamma = 0.002;
  m.crosstalk = 0.005;
  m.bias = false;
  return m;
}

void NoiseModel::validate() const {
  if (bits < 0) throw Error(ErrorCode::InvalidConfig, "noise.bits must be >= 0");
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidConfig, "noise.gamma must be > 0");
  if (sigma_gamma < 0.0) throw Error(ErrorCode::InvalidConfig, "noise.sigma_gamma must be >= 0");
  if (crosstalk < 0.0 || crosstalk >= 1.0) {
    throw Error(ErrorCode::InvalidConfig, "noise.crosstalk must lie in [0, 1)");
  }
}

double quantize_phase(double phi, int bits) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (bits <= 0) return w;
  const double levels = std::ldexp(1.0, bits);
  const double step = kTwoPi / levels;
  double q = std::nearbyint(w / step);
  if (q >= levels) q -= levels;
  return q * step;
}

PhaseNoise::PhaseNoise(Index size, const NoiseModel& model, Adjacency adjacency)
    : model_(model), adjacency_(std::move(adjacency)) {
  model_.validate();
  for (const auto& [a, b] : adjacency_) {
    if (a < 0 || b < 0 || a >= size || b >= size) {
      throw Error(ErrorCode::DimensionMismatch, "crosstalk pair outside the phase vector");
    }
  }
  gain_ = Eigen::VectorXd::Ones(size);
  offset_ = Eigen::VectorXd::Zero(size);
  if (model_.sigma_gamma > 0.0) {
    auto rng = make_stream(model_.seed, 0x67616d6du);
    std::normal_distribution<double> drift(0.0, model_.sigma_gamma);
    for (Index i = 0; i < size; ++i) gain_(i) = (model_.gamma + drift(rng)) / model_.gamma;
  }
  if (model_.bias) {
    auto rng = make_stream(model_.seed, 0x62696173u);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    for (Index i = 0; i < size; ++i) offset_(i) = u(rng);
  }
}

Eigen::VectorXd PhaseNoise::apply(const Eigen::VectorXd& phases) const {
  if (phases.size() != gain_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "phase vector does not match the noise model");
  }
  Eigen::VectorXd q(phases.size());
  if (model_.bits > 0) {
    for (Index i = 0; i < q.size(); ++i) q(i) = quantize_phase(phases(i), model_.bits);
  } else {
    q = phases;
  }
  const Eigen::VectorXd g = gain_.cwiseProduct(q);
  Eigen::VectorXd out = g;
  if (model_.crosstalk != 0.0) {
    for (const auto& [a, b] : adjacency_) {
      out(a) += model_.crosstalk * g(b);
      out(b) += model_.crosstalk * g(a);
    }
  }
  return out + offset_;
}

Eigen::VectorXd apply_nonidealities(const Eigen::VectorXd& phases, const NoiseModel& model,
                                    const Adjacency& adjacency) {
  return PhaseNoise(phases.size(), model, adjacency).apply(phases);
}

Index mzi_count_svd(Index rows, Index cols) { return SvdBlock::phase_count(rows, cols); }

Index mzi_count_dense(Index rows, Index cols, Index k) {
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "block size must be >= 1");
  return ((rows + k - 1) / k) * ((cols + k - 1) / k) * k * k;
}

Index mzi_count_tt(const TTLayout& layout, const std::vector<Index>& replication) {
  layout.validate();
  if (!replication.empty() && static_cast<Index>(replication.size()) != layout.order()) {
    throw Error(ErrorCode::InvalidLayout, "one replication factor per core expected");
  }
  Index total = 0;
  for (Index k = 0; k < layout.order(); ++k) {
    const Index h = replication.empty() ? 1 : replication[static_cast<std::size_t>(k)];
    total += h * mzi_count_svd(layout.ranks[k] * layout.row_factors[k],
                               layout.col_factors[k] * layout.ranks[k + 1]);
  }
  return total;
}

}  // namespace bpfree
