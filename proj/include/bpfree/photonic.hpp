#pragma once
/**
 * @file photonic.hpp
 * @brief Real-valued MZI mesh simulation: planar rotators, rectangular meshes, SVD
 *        blocks, block-partitioned layers, the phase non-ideality pipeline and MZI
 *        counting.
 */

#include "bpfree/common.hpp"
#include "bpfree/tensor_train.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bpfree {

/// [[cos phi, sin phi], [-sin phi, cos phi]]
Eigen::Matrix2d mzi_rotation(double phi);

struct Rotator {
  Index i = 0;  // acts on rows i and i + 1
  Index stage = 0;
};

/// Rectangular mesh on n waveguides: stage s holds rotators on (i, i+1) for
/// i = s mod 2, s mod 2 + 2, ...; n stages give n(n-1)/2 rotators.
struct MziMesh {
  Index n = 0;
  std::vector<Rotator> rotators;  // application order
  Eigen::VectorXd phases;         // one per rotator
  Eigen::VectorXd diag;           // output sign vector D

  static MziMesh rectangular(Index n);
  Index size() const { return static_cast<Index>(rotators.size()); }
};

/// Rotator list of the rectangular mesh on n waveguides.
const std::vector<Rotator>& rectangular_placements(Index n);

/// U = D R_P ... R_1
Eigen::MatrixXd mesh_matrix(const MziMesh& mesh);
Eigen::MatrixXd mesh_matrix(Index n, const double* phases);

/// W = U Sigma V^T with U (rows x rows), V (cols x cols) meshes and
/// Sigma_ii = scale cos(phi_i), i < min(rows, cols).
struct SvdBlock {
  Index rows = 0;
  Index cols = 0;
  double scale = 1.0;
  MziMesh u;
  MziMesh v;
  Eigen::VectorXd sigma_phases;

  static SvdBlock identity(Index rows, Index cols, double scale = 1.0);
  /// Number of phases: rows(rows-1)/2 + cols(cols-1)/2 + min(rows, cols).
  static Index phase_count(Index rows, Index cols);
  /// Phases packed as [U | V | Sigma].
  void set_phases(const double* phases);
  Eigen::MatrixXd matrix() const;
};

Eigen::MatrixXd svd_matrix(Index rows, Index cols, double scale, const double* phases);

/// U (Sigma (V^T x)) for a batch x (cols x B); Sigma truncates or zero-pads.
Eigen::MatrixXd svd_forward(const SvdBlock& block, const Eigen::MatrixXd& x);

/// M x N weight tiled by ceil(M/k) x ceil(N/k) blocks of k x k; ragged edges padded.
struct BlockLayer {
  Index rows = 0;
  Index cols = 0;
  Index k = 8;
  Index block_rows = 0;
  Index block_cols = 0;
  std::vector<SvdBlock> blocks;  // row-major over the block grid

  Eigen::MatrixXd assembled() const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
};

BlockLayer block_partitioned_layer(Index rows, Index cols, Index k = 8, double scale = 1.0);

/// Pairs of phase indices that couple through crosstalk.
using Adjacency = std::vector<std::pair<Index, Index>>;

/// Rotators adjacent within a stage of one rectangular mesh, offset into a larger
/// phase vector.
void append_mesh_adjacency(Index n, Index offset, Adjacency& out);
/// Consecutive attenuators in one Sigma column.
void append_line_adjacency(Index count, Index offset, Adjacency& out);
/// Adjacency of one SVD block packed as [U | V | Sigma].
void append_svd_adjacency(Index rows, Index cols, Index offset, Adjacency& out);

struct NoiseModel {
  int bits = 0;             // 0 disables quantization
  double gamma = 1.0;       // nominal phase response
  double sigma_gamma = 0.0;  // per-device drift std
  double crosstalk = 0.0;   // adjacent-rotator coupling
  bool bias = false;        // frozen U(0, 2 pi) phase offsets
  std::uint64_t seed = 0;

  static NoiseModel ideal() { return {}; }
  /// 8-bit phases, sigma_gamma = 0.002, crosstalk 0.005, bias off.
  static NoiseModel hardware();

  bool disabled() const {
    return bits <= 0 && sigma_gamma == 0.0 && crosstalk == 0.0 && !bias;
  }
  void validate() const;
};

/// Uniform b-bit quantization on [0, 2 pi); phases are wrapped first.
double quantize_phase(double phi, int bits);

/// Noise realized for one device: frozen per-phase gain and bias.
class PhaseNoise {
 public:
  PhaseNoise() = default;
  PhaseNoise(Index size, const NoiseModel& model, Adjacency adjacency);

  /// Omega Gamma Q(phi) + Phi_b
  Eigen::VectorXd apply(const Eigen::VectorXd& phases) const;

  const Eigen::VectorXd& gain() const { return gain_; }
  const Eigen::VectorXd& offset() const { return offset_; }
  const NoiseModel& model() const { return model_; }

 private:
  NoiseModel model_;
  Adjacency adjacency_;
  Eigen::VectorXd gain_;
  Eigen::VectorXd offset_;
};

Eigen::VectorXd apply_nonidealities(const Eigen::VectorXd& phases, const NoiseModel& model,
                                    const Adjacency& adjacency);

// MZI counting. An SVD block uses rows(rows-1)/2 + cols(cols-1)/2 rotators for its
// two meshes plus min(rows, cols) for Sigma.
Index mzi_count_svd(Index rows, Index cols);
/// Block-partitioned dense layer: every (padded) k x k block costs k^2.
Index mzi_count_dense(Index rows, Index cols, Index k);
/// TT layer: core k realized as an (r_{k-1} m_k) x (n_k r_k) SVD block, replicated
/// h_k times (h empty means 1 each).
Index mzi_count_tt(const TTLayout& layout, const std::vector<Index>& replication = {});

}  // namespace bpfree
