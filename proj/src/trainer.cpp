#include "bpfree/trainer.hpp"

#include <chrono>
#include <cmath>

namespace bpfree {

WeightDomain::WeightDomain(MlpSpec spec) : spec_(std::move(spec)), view_(spec_.param_view()) {}

Model make_network(const MlpSpec& spec, const Eigen::VectorXd& params) {
  auto weights = std::make_shared<const MlpWeights>(realize(spec, params));
  return [weights](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return forward(*weights, x); };
}

double holdout_error(const MlpSpec& spec, const Eigen::VectorXd& params,
                     const PinnProblem& problem) {
  const Eigen::MatrixXd pts = problem.holdout_points();
  return relative_l2(predict(make_network(spec, params), problem, pts), problem.reference(pts));
}

TrainReport train(const PinnProblem& problem, const Parameterization& param,
                  const TrainOptions& opts, const ProgressFn& progress,
                  const Eigen::VectorXd* start) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  if (param.spec().input_dim != problem.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "network input dim does not match the problem");
  }
  opts.stein.validate();
  opts.zo.validate();
  const SteinEstimator estimator(problem.input_dim(), opts.stein);
  const MlpSpec& spec = param.spec();

  TrainReport report;
  report.theta = start ? *start : param.initial(opts.seed);
  if (report.theta.size() != param.view().size()) {
    throw Error(ErrorCode::DimensionMismatch, "initial parameters have the wrong length");
  }
  auto evaluate = [&] { return holdout_error(spec, param.network_params(report.theta), problem); };
  report.initial_rel_l2 = evaluate();
  report.final_rel_l2 = report.initial_rel_l2;

  ZoConfig zo = opts.zo;
  zo.seed = stream_key(opts.seed, 0x7a6fu, opts.zo.seed);
  AdamState adam(report.theta.size());
  double window_loss = 0.0;
  std::int64_t window_count = 0;

  for (std::int64_t step = 0; step < opts.iterations; ++step) {
    auto rng = make_stream(opts.seed, 0x62617463u, static_cast<std::uint64_t>(step));
    const CollocationBatch batch = problem.sample(rng);
    const LossFn loss = [&](const Eigen::VectorXd& theta) {
      return pinn_loss(make_network(spec, param.network_params(theta)), problem, estimator, batch)
          .total;
    };
    RgeResult g;
    try {
      g = rge_estimate(loss, report.theta, param.view(), zo, static_cast<std::uint64_t>(step));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NonFiniteLoss && opts.on_divergence) {
        opts.on_divergence(step, report.theta);
      }
      throw;
    }
    zo_adam_step(adam, report.theta, g.gradient, opts.lr, opts.beta1, opts.beta2, opts.eps);
    report.queries += g.queries;
    report.steps = step + 1;
    report.step_loss.push_back(g.mean_loss);
    window_loss += g.mean_loss;
    ++window_count;

    const bool log = opts.log_every > 0 && report.steps % opts.log_every == 0;
    const bool eval = opts.eval_every > 0 && report.steps % opts.eval_every == 0;
    const bool last = report.steps == opts.iterations;
    if (log || eval || last) {
      MetricRow row;
      row.step = report.steps;
      row.loss = window_loss / double(window_count);
      row.queries = report.queries;
      if (eval || last) {
        row.rel_l2 = evaluate();
        report.final_rel_l2 = row.rel_l2;
      }
      row.wall_seconds = elapsed();
      report.rows.push_back(row);
      if (progress) progress(row);
      window_loss = 0.0;
      window_count = 0;
      if (!std::isnan(row.rel_l2) && opts.target_error > 0.0 && row.rel_l2 <= opts.target_error) {
        break;
      }
    }
  }
  report.wall_seconds = elapsed();
  return report;
}

std::vector<double> window_means(const std::vector<double>& values, std::size_t window) {
  std::vector<double> out;
  if (window == 0) return out;
  for (std::size_t begin = 0; begin + window <= values.size(); begin += window) {
    double s = 0.0;
    for (std::size_t i = begin; i < begin + window; ++i) s += values[i];
    out.push_back(s / double(window));
  }
  return out;
}

}  // namespace bpfree
