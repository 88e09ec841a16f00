#include "bpfree/cost_model.hpp"
#include "bpfree/phase_domain.hpp"
#include "bpfree/photonic.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <random>

using namespace bpfree;

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd random_phases(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  Eigen::VectorXd p(n);
  for (Index i = 0; i < n; ++i) p(i) = u(rng);
  return p;
}

MlpSpec bs_tt() {
  MlpSpec s;
  s.input_dim = 2;
  s.layers = {LayerSpec::dense(128, 2), LayerSpec::tensorized(make_tt_layout({4, 4, 8}, {8, 4, 4}, 2)),
              LayerSpec::dense(1, 128)};
  return s;
}

}  // namespace

TEST(Mzi, Rotation) {
  EXPECT_EQ(mzi_rotation(0.0), Eigen::Matrix2d::Identity());
  Eigen::Matrix2d q;
  q << 0, 1, -1, 0;
  EXPECT_LT((mzi_rotation(kPi / 2) - q).cwiseAbs().maxCoeff(), 1e-16);
  for (double phi : {0.3, 1.7, -2.2, 5.9}) {
    const Eigen::Matrix2d r = mzi_rotation(phi);
    EXPECT_LT((r.transpose() * r - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Mesh, PlacementCountsAndStages) {
  for (Index n = 1; n <= 9; ++n) {
    const MziMesh m = MziMesh::rectangular(n);
    EXPECT_EQ(m.size(), n * (n - 1) / 2);
    for (const auto& r : m.rotators) {
      EXPECT_EQ(r.i % 2, r.stage % 2);
      EXPECT_LT(r.i + 1, n);
    }
  }
}

TEST(Mesh, ZeroPhasesIdentityAndSingleRotator) {
  EXPECT_EQ(mesh_matrix(MziMesh::rectangular(5)), Eigen::MatrixXd::Identity(5, 5));
  MziMesh m = MziMesh::rectangular(2);
  m.phases(0) = 0.8;
  EXPECT_LT((mesh_matrix(m) - Eigen::MatrixXd(mzi_rotation(0.8))).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(Mesh, AlwaysOrthogonal) {
  for (Index n : {3, 8, 16}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      MziMesh m = MziMesh::rectangular(n);
      m.phases = random_phases(m.size(), s);
      m.diag = Eigen::VectorXd::Ones(n);
      m.diag(0) = -1;
      const Eigen::MatrixXd U = mesh_matrix(m);
      EXPECT_LE((U.transpose() * U - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Mesh, RectangularMeshIsUniversalInSpan) {
  // The Jacobian of U(phi) at random phases spans all n(n-1)/2 skew directions.
  const Index n = 6;
  const Eigen::VectorXd p = random_phases(n * (n - 1) / 2, 3);
  const Eigen::MatrixXd U = mesh_matrix(n, p.data());
  Eigen::MatrixXd J(n * n, p.size());
  for (Index k = 0; k < p.size(); ++k) {
    Eigen::VectorXd a = p, b = p;
    a(k) += 1e-6;
    b(k) -= 1e-6;
    const Eigen::MatrixXd d = U.transpose() * (mesh_matrix(n, a.data()) - mesh_matrix(n, b.data())) / 2e-6;
    J.col(k) = Eigen::Map<const Eigen::VectorXd>(d.data(), n * n);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
  lu.setThreshold(1e-6);
  EXPECT_EQ(lu.rank(), p.size());
}

TEST(SvdBlock, IdentityAndZero) {
  SvdBlock b = SvdBlock::identity(4, 4, 1.0);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 3);
  EXPECT_LT((svd_forward(b, x) - x).cwiseAbs().maxCoeff(), 1e-15);
  b.sigma_phases.setConstant(kPi / 2);
  EXPECT_LT(svd_forward(b, x).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SvdBlock, ForwardMatchesDenseComposition) {
  for (auto [r, c] : {std::pair<Index, Index>{8, 8}, {4, 16}, {16, 4}, {5, 3}}) {
    SvdBlock b = SvdBlock::identity(r, c, 0.7);
    const Eigen::VectorXd p = random_phases(SvdBlock::phase_count(r, c), Index(r * 31 + c));
    b.set_phases(p.data());
    const Eigen::MatrixXd U = mesh_matrix(b.u), V = mesh_matrix(b.v);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(r, c);
    for (Index i = 0; i < std::min(r, c); ++i) S(i, i) = 0.7 * std::cos(b.sigma_phases(i));
    const Eigen::MatrixXd W = U * S * V.transpose();
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(c, 4);
    EXPECT_LE((svd_forward(b, x) - W * x).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((b.matrix() - W).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((svd_matrix(r, c, 0.7, p.data()) - W).cwiseAbs().maxCoeff(), 1e-12);
    // Singular values bounded by the scale.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
    EXPECT_LE(svd.singularValues()(0), 0.7 + 1e-12);
  }
  EXPECT_THROW(svd_forward(SvdBlock::identity(3, 4), Eigen::MatrixXd::Zero(3, 1)), Error);
}

TEST(BlockLayer, Partitioning) {
  EXPECT_EQ(block_partitioned_layer(8, 8, 8).blocks.size(), 1u);
  EXPECT_EQ(block_partitioned_layer(128, 128, 8).blocks.size(), 256u);
  BlockLayer l = block_partitioned_layer(13, 21, 8, 0.5);
  EXPECT_EQ(l.blocks.size(), 6u);
  for (std::size_t i = 0; i < l.blocks.size(); ++i) {
    const Eigen::VectorXd p = random_phases(SvdBlock::phase_count(8, 8), i);
    l.blocks[i].set_phases(p.data());
  }
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(21, 5);
  EXPECT_LE((l.forward(x) - l.assembled() * x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Noise, DisabledIsIdentity) {
  const Eigen::VectorXd p = random_phases(20, 1);
  Adjacency adj;
  append_line_adjacency(20, 0, adj);
  EXPECT_EQ(apply_nonidealities(p, NoiseModel::ideal(), adj), p);
}

TEST(Noise, QuantizationExamples) {
  EXPECT_EQ(quantize_phase(kPi, 8), kPi);
  EXPECT_EQ(quantize_phase(2 * kPi, 8), 0.0);
  const Eigen::VectorXd p = random_phases(100, 2);
  for (Index i = 0; i < p.size(); ++i) {
    const double q = quantize_phase(p(i), 8);
    EXPECT_EQ(quantize_phase(q, 8), q);
    EXPECT_LE(std::abs(q - p(i)), kPi / 256 + 1e-12 + (p(i) > 2 * kPi - kPi / 256 ? 2 * kPi : 0));
  }
}

TEST(Noise, CrosstalkLine) {
  NoiseModel m;
  m.crosstalk = 0.005;
  Adjacency adj;
  append_line_adjacency(3, 0, adj);
  const Eigen::VectorXd out = apply_nonidealities(Eigen::Vector3d(1, 0, 0), m, adj);
  EXPECT_NEAR(out(0), 1.0, 1e-15);
  EXPECT_NEAR(out(1), 0.005, 1e-15);
  EXPECT_NEAR(out(2), 0.0, 1e-15);
}

TEST(Noise, MeshAdjacencyStaysWithinStages) {
  Adjacency adj;
  append_mesh_adjacency(6, 10, adj);
  const auto& rot = rectangular_placements(6);
  for (const auto& [a, b] : adj) {
    EXPECT_EQ(rot[std::size_t(a - 10)].stage, rot[std::size_t(b - 10)].stage);
    EXPECT_EQ(rot[std::size_t(b - 10)].i, rot[std::size_t(a - 10)].i + 2);
  }
  EXPECT_FALSE(adj.empty());
}

TEST(Noise, FrozenPerSeed) {
  NoiseModel m = NoiseModel::hardware();
  m.bias = true;
  m.seed = 9;
  const PhaseNoise a(50, m, {}), b(50, m, {});
  EXPECT_EQ(a.gain(), b.gain());
  EXPECT_EQ(a.offset(), b.offset());
  m.seed = 10;
  EXPECT_NE(PhaseNoise(50, m, {}).gain(), a.gain());
  // Only the quantized input changes between applications.
  const Eigen::VectorXd p1 = random_phases(50, 1), p2 = random_phases(50, 2);
  Eigen::VectorXd q1(50), q2(50);
  for (Index i = 0; i < 50; ++i) {
    q1(i) = quantize_phase(p1(i), 8);
    q2(i) = quantize_phase(p2(i), 8);
  }
  EXPECT_LT((a.apply(p1) - (a.gain().cwiseProduct(q1) + a.offset())).norm(), 1e-12);
  EXPECT_LT((a.apply(p2) - (a.gain().cwiseProduct(q2) + a.offset())).norm(), 1e-12);
}

TEST(Noise, Validation) {
  NoiseModel m;
  m.crosstalk = 1.0;
  EXPECT_THROW(m.validate(), Error);
  m = {};
  m.sigma_gamma = -1;
  EXPECT_THROW(m.validate(), Error);
}

TEST(MziCount, DenseAndTt) {
  EXPECT_EQ(mzi_count_dense(128, 128, 8), 16384);
  for (Index k : {2, 4, 8, 16}) EXPECT_EQ(mzi_count_dense(64, 64, k), 64 * 64);
  EXPECT_EQ(mzi_count_svd(8, 8), 64);
  // BS hidden layer: cores 4x16, 8x8, 16x4.
  EXPECT_EQ(mzi_count_tt(make_tt_layout({4, 4, 8}, {8, 4, 4}, 2)), 130 + 64 + 130);
  EXPECT_EQ(mzi_count_tt(make_tt_layout({4, 4, 8}, {8, 4, 4}, 2), {2, 1, 1}), 2 * 130 + 64 + 130);
}

TEST(PhaseDomain, IdealRealizationMatchesOpticalForward) {
  const PhaseDomain pd(bs_tt(), NoiseModel::ideal());
  const Eigen::VectorXd theta = pd.initial(3);
  const Eigen::VectorXd w = pd.network_params(theta);
  EXPECT_EQ(w, pd.ideal_network_params(theta));
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 16);
  EXPECT_LE((pd.optical_forward(theta, x) - forward(bs_tt(), w, x)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PhaseDomain, NoiseChangesRealization) {
  NoiseModel m = NoiseModel::hardware();
  m.seed = 4;
  const PhaseDomain pd(bs_tt(), m);
  const Eigen::VectorXd theta = pd.initial(3);
  const Eigen::VectorXd ideal = pd.ideal_network_params(theta);
  const Eigen::VectorXd noisy = pd.network_params(theta);
  const double rel = (noisy - ideal).norm() / ideal.norm();
  EXPECT_GT(rel, 1e-4);
  EXPECT_LT(rel, 0.5);
}

TEST(PhaseDomain, LayoutAndScale) {
  const PhaseDomain pd(bs_tt(), NoiseModel::ideal());
  // 16 + 16 blocks of 8x8 (64 phases each), cores 4x16, 8x8, 16x4, biases 257.
  EXPECT_EQ(pd.view().size(), 32 * 64 + 130 + 64 + 130 + 257);
  EXPECT_EQ(pd.phase_count(), 32 * 64 + 130 + 64 + 130);
  EXPECT_EQ(pd.view().groups(), 8);
  // Realized hidden-core entries have about the tt_init variance on average.
  double ratio = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Eigen::VectorXd w = pd.network_params(pd.initial(s));
    const Eigen::VectorXd d = w.head(256);
    ratio += std::sqrt(d.squaredNorm() / 256.0) / std::sqrt(2.0 / 130.0);
  }
  EXPECT_NEAR(ratio / 20.0, 1.0, 0.35);
}
