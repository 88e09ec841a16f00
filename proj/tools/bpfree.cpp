// bpfree command-line runner.
#include "bpfree/config.hpp"
#include "bpfree/cost_model.hpp"
#include "bpfree/oracles.hpp"
#include "bpfree/quadrature.hpp"
#include "bpfree/runner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace bpfree;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct ConfigArgs {
  std::string file;
  std::string preset;
  std::vector<std::string> sets;
  std::vector<std::uint64_t> seed;
  int num_seeds = 0;
  std::string out;

  void add(CLI::App* app, bool run_flags) {
    app->add_option("-c,--config", file, "config file (key = value lines)");
    app->add_option("--preset", preset, "start from a named preset");
    app->add_option("--set", sets, "override key=value (repeatable)");
    if (run_flags) {
      app->add_option("--seed", seed, "seed(s); overrides run.seeds");
      app->add_option("--seeds", num_seeds, "run seeds 0..n-1");
      app->add_option("-o,--out", out, "output directory");
    }
  }

  RunConfig build() const {
    RunConfig c = preset.empty() ? RunConfig{} : bpfree::preset(preset);
    if (!file.empty()) c = load_config(file, c);
    apply_env(c);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "--set expects key=value");
      set_key(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (num_seeds > 0) {
      c.seeds.clear();
      for (int s = 0; s < num_seeds; ++s) c.seeds.push_back(std::uint64_t(s));
    }
    if (!seed.empty()) c.seeds = seed;
    if (!out.empty()) c.output_dir = out;
    c.validate();
    return c;
  }
};

void print_rows(const std::vector<ComparisonRow>& rows) {
  std::printf("%-42s %14s %14s  %s\n", "quantity", "artifact", "reported", "status");
  for (const auto& r : rows) {
    std::string status = r.pass ? "PASS" : "FAIL";
    if (!r.note.empty()) status += " (" + r.note + ")";
    std::printf("%-42s %14.6g %14.6g  %s\n", r.quantity.c_str(), r.artifact, r.reported, status.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BP-free physics-informed training on tensorized photonic networks"};
  app.require_subcommand(1);

  // train
  ConfigArgs train_args;
  auto* train = app.add_subcommand("train", "train a model; writes metrics, checkpoints and a report");
  train_args.add(train, true);
  bool quiet = false;
  train->add_flag("-q,--quiet", quiet, "no progress lines");

  // evaluate
  std::string ckpt_path, eval_problem, data_dir = "data", dump;
  auto* evaluate = app.add_subcommand("evaluate", "hold-out relative l2 of a checkpoint");
  evaluate->add_option("checkpoint", ckpt_path, "checkpoint.json")->required();
  evaluate->add_option("--problem", eval_problem, "must match the checkpoint's problem");
  evaluate->add_option("--data-dir", data_dir, "directory with permeability and oracle files");
  evaluate->add_option("--dump", dump, "write x..., u_exact, u_pred CSV");

  // grid
  Index grid_dim = 2;
  int grid_level = 3;
  std::string grid_out;
  auto* grid = app.add_subcommand("grid", "build a sparse grid and dump its nodes");
  grid->add_option("--dim", grid_dim, "dimension")->required();
  grid->add_option("--level", grid_level, "level (1..3)")->required();
  grid->add_option("-o,--out", grid_out, "write nodes here instead of stdout");

  // oracle build
  std::string oracle_problem, oracle_dir = "data";
  auto* oracle = app.add_subcommand("oracle", "reference solutions");
  oracle->require_subcommand(1);
  auto* oracle_build = oracle->add_subcommand("build", "solve and cache a gridded reference");
  oracle_build->add_option("--problem", oracle_problem, "burgers or darcy")
      ->required()
      ->check(CLI::IsMember({"burgers", "darcy"}));
  oracle_build->add_option("--data-dir", oracle_dir, "output directory");

  // cost
  std::string arch = "all";
  auto* cost = app.add_subcommand("cost", "latency and footprint estimates as CSV");
  cost->add_option("--arch", arch, "ONN-SM, TONN-SM, ONN-TM, TONN-TM or all");

  // mzi-count
  ConfigArgs mzi_args;
  auto* mzi = app.add_subcommand("mzi-count", "per-layer MZI counts of a model");
  mzi_args.add(mzi, false);
  mzi->add_option("--model", mzi_args.file, "config file describing the model");

  // reproduce
  std::string table, runs_dir = "runs";
  auto* repro = app.add_subcommand("reproduce", "artifact vs published numbers");
  repro->add_option("table", table, "table id")->required()->check(CLI::IsMember(reproduce_tables()));
  repro->add_option("--runs", runs_dir, "directory holding completed preset runs");

  // model inspect
  ConfigArgs inspect_args;
  std::string inspect_ckpt;
  auto* model = app.add_subcommand("model", "model utilities");
  model->require_subcommand(1);
  auto* inspect = model->add_subcommand("inspect", "layout and parameter counts");
  inspect_args.add(inspect, false);
  inspect->add_option("--checkpoint", inspect_ckpt, "inspect a checkpoint instead");

  // config dump
  ConfigArgs show_args;
  auto* show = app.add_subcommand("config", "print the resolved configuration");
  show_args.add(show, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) {
      const RunConfig cfg = train_args.build();
      std::cout << "# config " << config_hash(cfg) << " -> " << cfg.output_dir << "\n";
      SeedProgressFn progress;
      if (!quiet) {
        progress = [](std::uint64_t seed, const MetricRow& r) {
          std::printf("seed %llu step %lld loss %.6e rel_l2 %s queries %lld\n",
                      static_cast<unsigned long long>(seed), static_cast<long long>(r.step), r.loss,
                      std::isnan(r.rel_l2) ? "-" : std::to_string(r.rel_l2).c_str(),
                      static_cast<long long>(r.queries));
          std::fflush(stdout);
        };
      }
      const RunReport rep = run_training(cfg, true, progress);
      for (const auto& s : rep.seeds) {
        std::printf("seed %llu final rel_l2 %.6e steps %lld queries %lld wall %.1fs\n",
                    static_cast<unsigned long long>(s.seed), s.final_rel_l2,
                    static_cast<long long>(s.steps), static_cast<long long>(s.queries),
                    s.wall_seconds);
      }
      std::printf("rel_l2 %.6e +- %.6e over %zu seed(s)\n", rep.mean_rel_l2, rep.std_rel_l2,
                  rep.seeds.size());
    } else if (*evaluate) {
      const Checkpoint ck = load_checkpoint(ckpt_path);
      if (!eval_problem.empty() && eval_problem != ck.config.problem) {
        throw Error(ErrorCode::DimensionMismatch, "checkpoint was trained on " + ck.config.problem);
      }
      const Evaluation ev = evaluate_checkpoint(ck, data_dir);
      std::printf("%s rel_l2 %.6e over %lld points\n", ck.config.problem.c_str(), ev.rel_l2,
                  static_cast<long long>(ev.points.cols()));
      if (!dump.empty()) {
        RunConfig cfg = ck.config;
        cfg.data_dir = data_dir;
        write_field_csv(dump, ev, *make_run_problem(cfg));
      }
    } else if (*grid) {
      const auto g = build_sparse_grid(grid_dim, grid_level);
      std::printf("# dim=%lld level=%d count=%lld\n", static_cast<long long>(grid_dim), grid_level,
                  static_cast<long long>(g.size()));
      if (grid_out.empty()) {
        write_grid(std::cout, g);
      } else {
        std::ofstream out(grid_out);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + grid_out);
        write_grid(out, g);
      }
    } else if (*oracle_build) {
      std::filesystem::create_directories(oracle_dir);
      if (oracle_problem == "burgers") {
        const Raster r = burgers_reference();
        const Raster fd = burgers_finite_difference();
        double worst = 0.0;
        for (Index i = 0; i < r.values.rows(); ++i)
          for (Index j = 0; j < r.values.cols(); ++j)
            worst = std::max(worst, std::abs(r.values(i, j) - fd.bilinear(r.x_at(j), r.y_at(i))));
        Raster out = r;
        out.meta["fd_max_abs_diff"] = std::to_string(worst);
        write_raster(oracle_path(oracle_dir, "burgers"), out);
        std::printf("burgers reference %lldx%lld, max |cole-hopf - fd| = %.3e\n",
                    static_cast<long long>(r.values.rows()), static_cast<long long>(r.values.cols()),
                    worst);
      } else {
        const std::string kpath = permeability_path(oracle_dir);
        if (!std::filesystem::exists(kpath)) write_raster(kpath, default_permeability());
        const Raster k = read_raster(kpath);
        const Raster u = darcy_solve(k);
        write_raster(oracle_path(oracle_dir, "darcy"), u);
        std::printf("darcy reference %lldx%lld, discrete residual %.3e\n",
                    static_cast<long long>(u.values.rows()), static_cast<long long>(u.values.cols()),
                    darcy_discrete_residual(k, u));
      }
    } else if (*cost) {
      const CostParams p;
      std::vector<std::string> names = arch == "all" ? architecture_names()
                                                     : std::vector<std::string>{arch};
      std::printf("arch,n_cycle,t_opt_ns,inference_ns,epoch_ms,total_s\n");
      for (const auto& n : names) {
        const Architecture a = architecture(n);
        const Latency l = latency(p, a);
        std::printf("%s,%d,%.2f,%.2f,%.4f,%.3f\n", a.name.c_str(), a.n_cycle, a.t_opt_ns,
                    l.inference_ns, l.epoch_ms, l.total_s);
      }
      std::printf("\narch,component,area_mm2\n");
      for (const auto& n : names) {
        for (const auto& row : footprint(architecture(n).name)) {
          if (row.area_mm2 < 0) std::printf("%s,%s,-\n", architecture(n).name.c_str(), row.component.c_str());
          else std::printf("%s,%s,%.2f\n", architecture(n).name.c_str(), row.component.c_str(), row.area_mm2);
        }
      }
    } else if (*mzi) {
      const RunConfig cfg = mzi_args.build();
      Index total = 0;
      std::printf("layer,shape,mzis\n");
      for (const auto& l : mzi_counts(cfg.model, cfg.block)) {
        std::printf("%s,%s,%lld\n", l.layer.c_str(), l.shape.c_str(), static_cast<long long>(l.mzis));
        total += l.mzis;
      }
      std::printf("total,,%lld\n", static_cast<long long>(total));
    } else if (*repro) {
      const auto rows = reproduce(table, runs_dir);
      print_rows(rows);
    } else if (*inspect) {
      RunConfig cfg;
      if (!inspect_ckpt.empty()) {
        const Checkpoint ck = load_checkpoint(inspect_ckpt);
        cfg = ck.config;
        std::printf("checkpoint: seed %llu step %lld domain %s\n",
                    static_cast<unsigned long long>(ck.seed), static_cast<long long>(ck.step),
                    to_string(cfg.domain));
      } else {
        cfg = inspect_args.build();
      }
      std::printf("%s\n", describe(cfg.model).c_str());
      const auto param = make_parameterization(cfg, 0);
      std::printf("trainable parameters (%s domain): %lld in %lld groups\n", param->domain(),
                  static_cast<long long>(param->view().size()),
                  static_cast<long long>(param->view().groups()));
    } else if (*show) {
      std::cout << serialize(show_args.build());
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.numerical() ? kExitNumerical : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
