#include "bpfree/zo.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace bpfree {

Perturbation parse_perturbation(const std::string& name) {
  if (name == "gaussian") return Perturbation::Gaussian;
  if (name == "rademacher") return Perturbation::Rademacher;
  throw Error(ErrorCode::InvalidConfig, "unknown perturbation distribution '" + name + "'");
}

Grouping parse_grouping(const std::string& name) {
  if (name == "global") return Grouping::Global;
  if (name == "per-tensor") return Grouping::PerTensor;
  throw Error(ErrorCode::InvalidConfig, "unknown grouping '" + name + "'");
}

const char* to_string(Perturbation p) {
  return p == Perturbation::Gaussian ? "gaussian" : "rademacher";
}

const char* to_string(Grouping g) { return g == Grouping::Global ? "global" : "per-tensor"; }

void ZoConfig::validate() const {
  if (queries < 1) throw Error(ErrorCode::InvalidConfig, "zo.queries must be >= 1");
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidConfig, "zo.radius must be > 0");
}

namespace {

ParamView effective_view(const ParamView& view, const ZoConfig& cfg) {
  return cfg.grouping == Grouping::Global ? view.merged() : view;
}

}  // namespace

std::int64_t rge_query_count(const ParamView& view, const ZoConfig& cfg) {
  return 2 * std::int64_t{cfg.queries} * effective_view(view, cfg).groups();
}

Eigen::VectorXd rge_perturbation(const ParamView& view, const ZoConfig& cfg, std::uint64_t step,
                                 int group, int query) {
  const ParamView groups = effective_view(view, cfg);
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(view.size());
  auto rng = make_stream(cfg.seed, step, static_cast<std::uint64_t>(group),
                         static_cast<std::uint64_t>(query));
  std::normal_distribution<double> normal;
  for (const Segment* s : groups.group_segments(group)) {
    for (Index e = 0; e < s->length; ++e) {
      double v;
      if (cfg.distribution == Perturbation::Gaussian) {
        v = normal(rng);
      } else {
        v = (rng() >> 63) ? 1.0 : -1.0;
      }
      xi(s->offset + e) = v;
    }
  }
  return xi;
}

RgeResult rge_estimate(const LossFn& loss, const Eigen::VectorXd& params, const ParamView& view,
                       const ZoConfig& cfg, std::uint64_t step) {
  cfg.validate();
  if (params.size() != view.size()) {
    throw Error(ErrorCode::DimensionMismatch, "parameter vector does not match its view");
  }
  const ParamView groups = effective_view(view, cfg);
  RgeResult out;
  out.gradient = Eigen::VectorXd::Zero(params.size());
  Eigen::VectorXd probe(params.size());
  for (int g = 0; g < groups.groups(); ++g) {
    for (int q = 0; q < cfg.queries; ++q) {
      const Eigen::VectorXd xi = rge_perturbation(view, cfg, step, g, q);
      probe = params + cfg.radius * xi;
      const double plus = loss(probe);
      probe = params - cfg.radius * xi;
      const double minus = loss(probe);
      out.queries += 2;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        std::ostringstream msg;
        msg << "loss is not finite under perturbation (seed " << cfg.seed << ", step " << step
            << ", group " << g << ", query " << q << "): L+ = " << plus << ", L- = " << minus;
        throw Error(ErrorCode::NonFiniteLoss, msg.str());
      }
      out.mean_loss += plus + minus;
      out.gradient += ((plus - minus) / (2.0 * cfg.radius * cfg.queries)) * xi;
    }
  }
  if (out.queries > 0) out.mean_loss /= static_cast<double>(out.queries);
  return out;
}

void zo_sgd_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
  if (params.size() != grad.size()) {
    throw Error(ErrorCode::DimensionMismatch, "gradient and parameters differ in size");
  }
  params.noalias() -= lr * grad;
}

void zo_adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                  double lr, double beta1, double beta2, double eps) {
  if (params.size() != grad.size()) {
    throw Error(ErrorCode::DimensionMismatch, "gradient and parameters differ in size");
  }
  if (state.m.size() == 0) state = AdamState(params.size());
  if (state.m.size() != params.size()) {
    throw Error(ErrorCode::DimensionMismatch, "optimizer state does not match parameters");
  }
  ++state.t;
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v + (1.0 - beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  params.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + eps);
}

}  // namespace bpfree
