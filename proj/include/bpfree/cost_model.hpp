#pragma once
/**
 * @file cost_model.hpp
 * @brief Latency and photonic-footprint estimates for on-chip BP-free training.
 *
 * t_inference = n_cycle (t_DAC + t_tuning + t_opt + t_ADC)
 * t_epoch     = (t_inference N_point N_loss + t_tuning) N_grads + t_DIG
 */

#include <string>
#include <vector>

namespace bpfree {

struct Architecture {
  std::string name;
  int n_cycle = 1;
  double t_opt_ns = 0.0;
};

/// ONN-SM, TONN-SM, ONN-TM, TONN-TM (ONN is an alias of ONN-SM).
Architecture architecture(const std::string& name);
std::vector<std::string> architecture_names();

struct CostParams {
  double t_dac_ns = 24.0;
  double t_adc_ns = 24.0;
  double t_tuning_ns = 0.1;
  double t_dig_ns = 500.0;
  int n_point = 130;
  int n_loss = 13;
  int n_grads = 2;
  int epochs = 10000;
};

struct Latency {
  double inference_ns = 0.0;
  double epoch_ms = 0.0;
  double total_s = 0.0;
};

Latency latency(const CostParams& params, const Architecture& arch);

struct FootprintRow {
  std::string component;
  double area_mm2 = 0.0;  // negative when the component is absent
};

/// Component breakdown in mm^2; the last row is the total.
std::vector<FootprintRow> footprint(const std::string& arch);
double footprint_total(const std::string& arch);

}  // namespace bpfree
