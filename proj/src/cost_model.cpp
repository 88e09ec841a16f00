#include "bpfree/cost_model.hpp"

#include "bpfree/common.hpp"

namespace bpfree {

Architecture architecture(const std::string& name) {
  if (name == "ONN" || name == "ONN-SM") return {"ONN-SM", 1, 3.20};
  if (name == "TONN-SM") return {"TONN-SM", 1, 0.64};
  if (name == "ONN-TM") return {"ONN-TM", 32, 0.21};
  if (name == "TONN-TM") return {"TONN-TM", 6, 0.21};
  throw Error(ErrorCode::UnknownArchitecture, "unknown architecture '" + name + "'");
}

std::vector<std::string> architecture_names() { return {"ONN-SM", "TONN-SM", "ONN-TM", "TONN-TM"}; }

Latency latency(const CostParams& p, const Architecture& arch) {
  Latency l;
  l.inference_ns = arch.n_cycle * (p.t_dac_ns + p.t_tuning_ns + arch.t_opt_ns + p.t_adc_ns);
  const double epoch_ns =
      (l.inference_ns * p.n_point * p.n_loss + p.t_tuning_ns) * p.n_grads + p.t_dig_ns;
  l.epoch_ms = epoch_ns * 1e-6;
  l.total_s = epoch_ns * 1e-9 * p.epochs;
  return l;
}

std::vector<FootprintRow> footprint(const std::string& arch) {
  // laser, MRR modulators, tensor core, photodetectors, cross-connect
  struct Table {
    const char* name;
    double laser, modulator, core, detector, cross;
  };
  static const Table rows[] = {
      {"ONN-SM", 25.6, 1.28, 3947.52, 1.28, -1.0},
      {"TONN-SM", 1.6, 0.8, 97.92, 0.8, 1.6},
      {"ONN-TM", 1.6, 0.4, 16.32, 0.4, -1.0},
      {"TONN-TM", 1.6, 0.4, 16.32, 0.4, -1.0},
  };
  const std::string key = arch == "ONN" ? "ONN-SM" : arch;
  for (const auto& r : rows) {
    if (key != r.name) continue;
    std::vector<FootprintRow> out = {{"laser", r.laser},
                                     {"modulators", r.modulator},
                                     {"tensor-core", r.core},
                                     {"photodetectors", r.detector},
                                     {"cross-connect", r.cross}};
    double total = 0.0;
    for (const auto& row : out)
      if (row.area_mm2 > 0.0) total += row.area_mm2;
    out.push_back({"total", total});
    return out;
  }
  throw Error(ErrorCode::UnknownArchitecture, "unknown architecture '" + arch + "'");
}

double footprint_total(const std::string& arch) { return footprint(arch).back().area_mm2; }

}  // namespace bpfree
