#pragma once
/**
 * @file phase_domain.hpp
 * @brief Photonic realization of a network: every weight tensor is programmed
 *        through MZI phases and read back through the non-ideality pipeline.
 *
 * Dense layers are tiled by k x k SVD blocks. A TT core of shape
 * (r_{k-1}, m_k, n_k, r_k) is one (r_{k-1} m_k) x (n_k r_k) SVD block. Biases stay
 * electronic and are trained directly.
 */

#include "bpfree/photonic.hpp"
#include "bpfree/trainer.hpp"

#include <vector>

namespace bpfree {

class PhaseDomain : public Parameterization {
 public:
  PhaseDomain(MlpSpec spec, const NoiseModel& noise, Index block = 8);

  const MlpSpec& spec() const override { return spec_; }
  const ParamView& view() const override { return view_; }
  /// Phases uniform on [0, 2 pi), biases zero.
  Eigen::VectorXd initial(std::uint64_t seed) const override;
  Eigen::VectorXd network_params(const Eigen::VectorXd& theta) const override;
  const char* domain() const override { return "phase"; }

  /// Same realization with all non-idealities off.
  Eigen::VectorXd ideal_network_params(const Eigen::VectorXd& theta) const;

  /// Forward evaluated block by block through svd_forward (no assembled matrices).
  Eigen::MatrixXd optical_forward(const Eigen::VectorXd& theta, const Eigen::MatrixXd& x) const;

  Index phase_count() const { return static_cast<Index>(phase_index_.size()); }
  Index mzi_count() const;
  const PhaseNoise& noise() const { return noise_; }
  Index block() const { return block_; }

 private:
  struct Unit {  // one SVD block
    Index rows, cols;
    double scale;
    Index theta_offset;  // phases [U | V | Sigma] in theta
  };
  struct LayerPlan {
    std::vector<Unit> units;  // dense: block grid row-major; TT: one per core
    Index block_rows = 0, block_cols = 0;
    Index bias_offset = 0;
  };

  Eigen::VectorXd realize(const Eigen::VectorXd& theta, bool noisy) const;

  MlpSpec spec_;
  Index block_;
  ParamView view_;
  std::vector<LayerPlan> plan_;
  std::vector<Index> phase_index_;  // theta positions holding phases
  PhaseNoise noise_;
};

}  // namespace bpfree
