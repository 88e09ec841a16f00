#pragma once
/**
 * @file runner.hpp
 * @brief Experiment orchestration: problems and parameterizations from a
 *        RunConfig, multi-seed training with on-disk outputs, checkpoints,
 *        evaluation dumps and the comparison against published numbers.
 */

#include "bpfree/config.hpp"
#include "bpfree/pde.hpp"
#include "bpfree/trainer.hpp"

#include <memory>
#include <string>
#include <vector>

namespace bpfree {

std::unique_ptr<PinnProblem> make_run_problem(const RunConfig& cfg, bool require_reference = false);

/// Weight- or phase-domain view of cfg.model. The frozen noise draw is keyed by
/// (noise.seed, run seed).
std::unique_ptr<Parameterization> make_parameterization(const RunConfig& cfg, std::uint64_t seed);

TrainOptions train_options(const RunConfig& cfg, const PinnProblem& problem, std::uint64_t seed);

struct Checkpoint {
  RunConfig config;
  std::uint64_t seed = 0;
  std::int64_t step = 0;
  Eigen::VectorXd theta;  // weights or phases, per config.domain
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

struct SeedResult {
  std::uint64_t seed = 0;
  double initial_rel_l2 = 0.0;
  double final_rel_l2 = 0.0;
  std::int64_t steps = 0;
  std::int64_t queries = 0;
  double wall_seconds = 0.0;
};

struct RunReport {
  std::string config_hash;
  std::vector<SeedResult> seeds;
  std::vector<TrainReport> details;
  double mean_rel_l2 = 0.0;
  double std_rel_l2 = 0.0;  // population std over seeds
  double wall_seconds = 0.0;
};

using SeedProgressFn = std::function<void(std::uint64_t seed, const MetricRow&)>;

/// Trains every seed in cfg.seeds. With write_outputs the output directory gets
/// config.cfg, report.json and per seed metrics.csv, timing.csv and checkpoint.json.
/// A divergence leaves diverged.json in the seed directory before the error propagates.
RunReport run_training(const RunConfig& cfg, bool write_outputs = true,
                       const SeedProgressFn& progress = {});

/// step,loss,rel_l2,queries. Wall time lives in timing.csv so this file is reproducible.
void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows);

struct RunSummary {
  std::string config_hash;
  std::vector<SeedResult> seeds;
  double mean_rel_l2 = 0.0;
  double std_rel_l2 = 0.0;
};
RunSummary load_run_summary(const std::string& path);

struct Evaluation {
  double rel_l2 = 0.0;
  Eigen::MatrixXd points;  // raw coordinates
  Eigen::VectorXd exact;
  Eigen::VectorXd predicted;
};

Evaluation evaluate_checkpoint(const Checkpoint& ckpt, const std::string& data_dir);
/// coordinates..., u_exact, u_pred
void write_field_csv(const std::string& path, const Evaluation& ev, const PinnProblem& problem);

struct LayerCount {
  std::string layer;
  std::string shape;
  Index mzis = 0;
};
/// Dense layers use k x k blocks (k = cfg.block); TT cores one SVD block each.
std::vector<LayerCount> mzi_counts(const MlpSpec& spec, Index block);

struct ComparisonRow {
  std::string quantity;
  double artifact = 0.0;
  double reported = 0.0;  // published value
  double tolerance = 0.0;  // absolute; negative marks an ordering/threshold check
  bool pass = false;
  std::string note;
};

std::vector<std::string> reproduce_tables();
/// Run-backed tables read <runs_dir>/<preset>/report.json and throw MissingRuns
/// listing every absent run.
std::vector<ComparisonRow> reproduce(const std::string& table, const std::string& runs_dir);

}  // namespace bpfree
