#include "bpfree/phase_domain.hpp"

#include <cmath>
#include <random>

namespace bpfree {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// Sigma scale giving realized entries variance `var` when cos(phi) is uniform over
// a random phase: E[cos^2] = 1/2 and min(a, b) singular directions.
double sigma_scale(Index a, Index b, double var) {
  return std::sqrt(2.0 * double(a) * double(b) * var / double(std::min(a, b)));
}

}  // namespace

PhaseDomain::PhaseDomain(MlpSpec spec, const NoiseModel& noise, Index block)
    : spec_(std::move(spec)), block_(block) {
  spec_.validate();
  if (block_ < 2) throw Error(ErrorCode::InvalidConfig, "photonic block size must be >= 2");
  Adjacency adjacency;
  Index compact = 0;  // position in the phase-only vector
  for (std::size_t li = 0; li < spec_.layers.size(); ++li) {
    const auto& l = spec_.layers[li];
    const std::string p = "layer" + std::to_string(li);
    LayerPlan plan;
    auto add_unit = [&](Index a, Index b, double scale) {
      const Index n = SvdBlock::phase_count(a, b);
      plan.units.push_back({a, b, scale, view_.size() + 0});
      append_svd_adjacency(a, b, compact, adjacency);
      compact += n;
      return n;
    };
    if (l.kind == LayerSpec::Kind::Dense) {
      plan.block_rows = (l.rows + block_ - 1) / block_;
      plan.block_cols = (l.cols + block_ - 1) / block_;
      const double var = 2.0 / double(l.rows + l.cols);
      Index total = 0;
      const Index start = view_.size();
      for (Index b = 0; b < plan.block_rows * plan.block_cols; ++b) {
        const Index n = SvdBlock::phase_count(block_, block_);
        plan.units.push_back({block_, block_, sigma_scale(block_, block_, var), start + total});
        append_svd_adjacency(block_, block_, compact, adjacency);
        compact += n;
        total += n;
      }
      for (Index i = 0; i < total; ++i) phase_index_.push_back(start + i);
      view_.add(p + ".phases", total);
    } else {
      const double sd = tt_init_std(l.tt);
      for (Index k = 0; k < l.tt.order(); ++k) {
        const Index a = l.tt.ranks[k] * l.tt.row_factors[k];
        const Index b = l.tt.col_factors[k] * l.tt.ranks[k + 1];
        const Index start = view_.size();
        const Index n = add_unit(a, b, sigma_scale(a, b, sd * sd));
        plan.units.back().theta_offset = start;
        for (Index i = 0; i < n; ++i) phase_index_.push_back(start + i);
        view_.add(p + ".core" + std::to_string(k) + ".phases", n);
      }
    }
    plan.bias_offset = view_.size();
    view_.add(p + ".bias", l.rows);
    plan_.push_back(std::move(plan));
  }
  noise_ = PhaseNoise(compact, noise, std::move(adjacency));
}

Eigen::VectorXd PhaseDomain::initial(std::uint64_t seed) const {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(view_.size());
  auto rng = make_stream(seed, 0x70686173u);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (Index i : phase_index_) theta(i) = u(rng);
  return theta;
}

Eigen::VectorXd PhaseDomain::realize(const Eigen::VectorXd& theta, bool noisy) const {
  if (theta.size() != view_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "phase vector has the wrong length");
  }
  // Effective phases, scattered back into a theta-shaped buffer.
  Eigen::VectorXd eff = theta;
  if (noisy && !noise_.model().disabled()) {
    Eigen::VectorXd compact(phase_count());
    for (Index i = 0; i < phase_count(); ++i) compact(i) = theta(phase_index_[std::size_t(i)]);
    const Eigen::VectorXd applied = noise_.apply(compact);
    for (Index i = 0; i < phase_count(); ++i) eff(phase_index_[std::size_t(i)]) = applied(i);
  }

  const ParamView net_view = spec_.param_view();
  Eigen::VectorXd params(net_view.size());
  const auto& segs = net_view.segments();
  std::size_t seg = 0;
  for (std::size_t li = 0; li < spec_.layers.size(); ++li) {
    const auto& l = spec_.layers[li];
    const LayerPlan& plan = plan_[li];
    if (l.kind == LayerSpec::Kind::Dense) {
      Eigen::MatrixXd full(plan.block_rows * block_, plan.block_cols * block_);
      for (Index p = 0; p < plan.block_rows; ++p)
        for (Index q = 0; q < plan.block_cols; ++q) {
          const Unit& u = plan.units[std::size_t(p * plan.block_cols + q)];
          full.block(p * block_, q * block_, block_, block_) =
              svd_matrix(u.rows, u.cols, u.scale, eff.data() + u.theta_offset);
        }
      const auto& s = segs[seg++];
      Eigen::Map<Eigen::MatrixXd>(params.data() + s.offset, l.rows, l.cols) =
          full.topLeftCorner(l.rows, l.cols);
    } else {
      for (const Unit& u : plan.units) {
        const auto& s = segs[seg++];
        const Eigen::MatrixXd m = svd_matrix(u.rows, u.cols, u.scale, eff.data() + u.theta_offset);
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            params.data() + s.offset, u.rows, u.cols) = m;
      }
    }
    const auto& b = segs[seg++];
    params.segment(b.offset, b.length) = theta.segment(plan.bias_offset, l.rows);
  }
  return params;
}

Eigen::VectorXd PhaseDomain::network_params(const Eigen::VectorXd& theta) const {
  return realize(theta, true);
}

Eigen::VectorXd PhaseDomain::ideal_network_params(const Eigen::VectorXd& theta) const {
  return realize(theta, false);
}

Eigen::MatrixXd PhaseDomain::optical_forward(const Eigen::VectorXd& theta,
                                             const Eigen::MatrixXd& x) const {
  if (theta.size() != view_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "phase vector has the wrong length");
  }
  auto block_of = [&](const Unit& u) {
    SvdBlock b = SvdBlock::identity(u.rows, u.cols, u.scale);
    b.set_phases(theta.data() + u.theta_offset);
    return b;
  };
  Eigen::MatrixXd h = x;
  for (std::size_t li = 0; li < spec_.layers.size(); ++li) {
    const auto& l = spec_.layers[li];
    const LayerPlan& plan = plan_[li];
    Eigen::MatrixXd y;
    if (l.kind == LayerSpec::Kind::Dense) {
      BlockLayer layer;
      layer.rows = l.rows;
      layer.cols = l.cols;
      layer.k = block_;
      layer.block_rows = plan.block_rows;
      layer.block_cols = plan.block_cols;
      for (const Unit& u : plan.units) layer.blocks.push_back(block_of(u));
      y = layer.forward(h);
    } else {
      // Contract through the cores with each core applied as its SVD block.
      TTCores<double> tt;
      tt.layout = l.tt;
      for (const Unit& u : plan.units) {
        const Eigen::MatrixXd m = block_of(u).matrix();
        Eigen::VectorXd core(m.size());
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            core.data(), u.rows, u.cols) = m;
        tt.cores.push_back(std::move(core));
      }
      y = tt_forward(tt, h);
    }
    y.colwise() += theta.segment(plan.bias_offset, l.rows);
    if (li + 1 < spec_.layers.size()) apply_activation(spec_.activation, y);
    h.swap(y);
  }
  return h;
}

Index PhaseDomain::mzi_count() const {
  Index total = 0;
  for (const auto& plan : plan_)
    for (const auto& u : plan.units) total += mzi_count_svd(u.rows, u.cols);
  return total;
}

}  // namespace bpfree
