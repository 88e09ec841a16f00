#include "bpfree/mlp.hpp"
#include "bpfree/tensor_train.hpp"

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include <random>

using namespace bpfree;

namespace {

TTCores<double> random_cores(const TTLayout& l, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  TTCores<double> tt;
  tt.layout = l;
  for (Index k = 0; k < l.order(); ++k) {
    Eigen::VectorXd c(l.core_size(k));
    for (Index i = 0; i < c.size(); ++i) c(i) = n01(rng);
    tt.cores.push_back(c);
  }
  return tt;
}

// Entry (I, J) as the product of core slices G_k(:, i_k, j_k, :).
double brute_entry(const TTCores<double>& tt, Index I, Index J) {
  const auto& l = tt.layout;
  const auto i = unfold_index(I, l.row_factors);
  const auto j = unfold_index(J, l.col_factors);
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Ones(1);
  for (Index k = 0; k < l.order(); ++k) {
    const Index ra = l.ranks[k], m = l.row_factors[k], n = l.col_factors[k], rb = l.ranks[k + 1];
    Eigen::MatrixXd slice(ra, rb);
    for (Index a = 0; a < ra; ++a)
      for (Index b = 0; b < rb; ++b)
        slice(a, b) = tt.cores[std::size_t(k)](((a * m + i[std::size_t(k)]) * n + j[std::size_t(k)]) * rb + b);
    acc = acc * slice;
  }
  return acc(0);
}

std::vector<TTLayout> test_layouts() {
  return {make_tt_layout({4, 4}, {4, 4}, 3),
          make_tt_layout({2, 3, 4}, {4, 1, 2}, 2),
          make_tt_layout({4, 4, 4}, {4, 4, 4}, 2),
          make_tt_layout({8, 8}, {8, 8}, 4),
          make_tt_layout({4, 4, 8}, {8, 4, 4}, 2),
          make_tt_layout({8, 4, 4}, {1, 3, 7}, 2),
          make_tt_layout({5}, {7}, 1),
          TTLayout{{2, 2, 2}, {3, 2, 2}, {1, 3, 2, 1}}};
}

}  // namespace

TEST(TTLayout, ParamCounts) {
  EXPECT_EQ(tt_param_count(make_tt_layout({8, 4, 4, 4}, {4, 4, 4, 8}, 2)), 256);
  EXPECT_EQ(tt_param_count(make_tt_layout({13}, {9}, 1)), 13 * 9);
}

TEST(TTLayout, PublishedModelCounts) {
  auto hjb = [](bool tt) {
    MlpSpec s;
    s.input_dim = 21;
    if (tt) {
      s.layers = {LayerSpec::tensorized(make_tt_layout({8, 4, 4, 4}, {1, 1, 3, 7}, 2)),
                  LayerSpec::tensorized(make_tt_layout({8, 4, 4, 4}, {4, 4, 4, 8}, 2)),
                  LayerSpec::dense(1, 512)};
    } else {
      s.layers = {LayerSpec::dense(512, 21), LayerSpec::dense(512, 512), LayerSpec::dense(1, 512)};
    }
    return s.param_count();
  };
  EXPECT_EQ(hjb(true), 1929);
  EXPECT_EQ(hjb(false), 274433);
  EXPECT_NEAR(double(hjb(false)) / double(hjb(true)), 142.27, 0.005);
}

TEST(TTLayout, Validation) {
  EXPECT_THROW((TTLayout{{2, 2}, {2}, {1, 2, 1}}.validate()), Error);
  EXPECT_THROW((TTLayout{{2, 2}, {2, 2}, {2, 2, 1}}.validate()), Error);
  EXPECT_THROW((TTLayout{{2, 0}, {2, 2}, {1, 2, 1}}.validate()), Error);
  EXPECT_NO_THROW((TTLayout{{2, 2}, {2, 2}, {1, 2, 1}}.validate()));
}

TEST(TTIndex, FoldUnfoldBijection) {
  const std::vector<Index> f{8, 4, 4, 4};
  for (Index i = 0; i < 512; ++i) EXPECT_EQ(fold_index(unfold_index(i, f), f), i);
  EXPECT_EQ(unfold_index(1, f), (std::vector<Index>{0, 0, 0, 1}));  // last factor fastest
}

TEST(TTReconstruct, AllOnes) {
  TTCores<double> tt;
  tt.layout = make_tt_layout({2, 3}, {3, 2}, 1);
  for (Index k = 0; k < 2; ++k) tt.cores.push_back(Eigen::VectorXd::Ones(tt.layout.core_size(k)));
  EXPECT_EQ(tt_reconstruct(tt), Eigen::MatrixXd::Ones(6, 6));
}

TEST(TTReconstruct, SingleCoreIsItsSlice) {
  const auto tt = random_cores(make_tt_layout({3}, {5}, 1), 1);
  EXPECT_EQ(tt_reconstruct(tt), Eigen::MatrixXd(tt.core_matrix(0)));
}

TEST(TTReconstruct, MatchesBruteForce) {
  for (const auto& l : test_layouts()) {
    const auto tt = random_cores(l, 3);
    const Eigen::MatrixXd W = tt_reconstruct(tt);
    ASSERT_EQ(W.rows(), l.rows());
    ASSERT_EQ(W.cols(), l.cols());
    for (Index I = 0; I < W.rows(); ++I)
      for (Index J = 0; J < W.cols(); ++J) EXPECT_NEAR(W(I, J), brute_entry(tt, I, J), 1e-12);
  }
}

// Unit ranks: every entry is a product of scalars, W = G_1 (x) G_2 (Kronecker).
TEST(TTReconstruct, UnitRanksGiveKroneckerProduct) {
  const auto tt = tt_init<double>(make_tt_layout({3, 4}, {2, 5}, 1), 5);
  const Eigen::MatrixXd W = tt_reconstruct(tt);
  const Eigen::MatrixXd A = tt.core_matrix(0), B = tt.core_matrix(1);
  for (Index i1 = 0; i1 < 3; ++i1)
    for (Index i2 = 0; i2 < 4; ++i2)
      for (Index j1 = 0; j1 < 2; ++j1)
        for (Index j2 = 0; j2 < 5; ++j2)
          EXPECT_NEAR(W(i1 * 4 + i2, j1 * 5 + j2), A(i1, j1) * B(i2, j2), 1e-15);
  // With one side of each core trivial it is a rank-1 outer product.
  const auto outer = tt_init<double>(make_tt_layout({4, 1}, {1, 4}, 1), 5);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(tt_reconstruct(outer));
  EXPECT_LT(svd.singularValues()(1), 1e-12 * svd.singularValues()(0));
}

TEST(TTForward, MatchesReconstruction) {
  for (const auto& l : test_layouts()) {
    const auto tt = random_cores(l, 7);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(l.cols(), 5);
    const Eigen::MatrixXd y = tt_forward(tt, x);
    EXPECT_LE((y - tt_reconstruct(tt) * x).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(TTForward, SixtyFourSquare) {
  const auto tt = random_cores(make_tt_layout({4, 4, 4}, {4, 4, 4}, 3), 8);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(64, 1);
  EXPECT_LE((tt_forward(tt, x) - tt_reconstruct(tt) * x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(TTForward, IdentityCore) {
  TTCores<double> tt;
  tt.layout = make_tt_layout({6}, {6}, 1);
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(6, 6);
  tt.cores.push_back(Eigen::Map<Eigen::VectorXd>(I.data(), 36));
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 3);
  EXPECT_EQ(tt_forward(tt, x), x);
}

TEST(TTForward, LinearAndColumnwise) {
  const auto tt = random_cores(make_tt_layout({4, 4, 8}, {8, 4, 4}, 2), 9);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(128, 4);
  const Eigen::MatrixXd y = Eigen::MatrixXd::Random(128, 4);
  const Eigen::MatrixXd lhs = tt_forward(tt, Eigen::MatrixXd(2.0 * x - 3.0 * y));
  EXPECT_LE((lhs - (2.0 * tt_forward(tt, x) - 3.0 * tt_forward(tt, y))).cwiseAbs().maxCoeff(), 1e-10);
  const Eigen::MatrixXd batch = tt_forward(tt, x);
  for (Index b = 0; b < 4; ++b) {
    EXPECT_LE((tt_forward(tt, Eigen::MatrixXd(x.col(b))) - batch.col(b)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(TTForward, DimensionMismatch) {
  const auto tt = random_cores(make_tt_layout({4, 4}, {4, 4}, 2), 1);
  EXPECT_THROW(tt_forward(tt, Eigen::MatrixXd(Eigen::MatrixXd::Zero(15, 1))), Error);
}

TEST(TTInit, Deterministic) {
  const auto l = make_tt_layout({8, 4, 4, 4}, {4, 4, 4, 8}, 2);
  const auto a = tt_init<double>(l, 42), b = tt_init<double>(l, 42), c = tt_init<double>(l, 43);
  for (std::size_t k = 0; k < a.cores.size(); ++k) EXPECT_EQ(a.cores[k], b.cores[k]);
  EXPECT_NE(a.cores[0], c.cores[0]);
}

TEST(TTInit, GlorotScaleOnWideLayer) {
  const auto l = make_tt_layout({8, 4, 4, 4}, {4, 4, 4, 8}, 2);
  const double target = std::sqrt(2.0 / 1024.0);
  // Entries are products of four cores, so one draw is heavy-tailed; the
  // expected variance is what matches Glorot.
  double var = 0.0;
  const int draws = 400;
  for (int seed = 0; seed < draws; ++seed) {
    const Eigen::MatrixXd W = tt_reconstruct(tt_init<double>(l, std::uint64_t(seed)));
    var += W.squaredNorm() / double(W.size()) / draws;
  }
  EXPECT_NEAR(std::sqrt(var) / target, 1.0, 0.15);
}

TEST(Mlp, ForwardPathsAgree) {
  MlpSpec s;
  s.input_dim = 2;
  s.layers = {LayerSpec::dense(128, 2), LayerSpec::tensorized(make_tt_layout({4, 4, 8}, {8, 4, 4}, 2)),
              LayerSpec::dense(1, 128)};
  EXPECT_EQ(s.param_count(), 833);
  const Eigen::VectorXd p = init_params(s, 1);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 300);
  EXPECT_LE((forward(s, p, x) - forward_contracted(s, p, x)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Mlp, ActivationKernels) {
  Eigen::MatrixXd x = Eigen::RowVectorXd::LinSpaced(1000, -30.0, 30.0);
  Eigen::MatrixXd t = x, s = x;
  apply_activation(Activation::Tanh, t);
  apply_activation(Activation::Sine, s);
  for (Index i = 0; i < x.cols(); ++i) {
    EXPECT_NEAR(t(0, i), std::tanh(x(0, i)), 1e-15);
    EXPECT_NEAR(s(0, i), std::sin(x(0, i)), 1e-14);
  }
}

TEST(Mlp, SpecValidation) {
  MlpSpec s;
  s.input_dim = 3;
  s.layers = {LayerSpec::dense(4, 2)};
  EXPECT_THROW(s.validate(), Error);
  EXPECT_THROW(parse_activation("relu"), Error);
}

TEST(Mlp, ParamViewGroupsPerTensor) {
  MlpSpec s;
  s.input_dim = 2;
  s.layers = {LayerSpec::dense(128, 2), LayerSpec::tensorized(make_tt_layout({4, 4, 8}, {8, 4, 4}, 2)),
              LayerSpec::dense(1, 128)};
  const ParamView v = s.param_view();
  EXPECT_EQ(v.groups(), 8);  // 2 dense weights, 3 cores, 3 biases
  EXPECT_EQ(v.size(), 833);
  EXPECT_NO_THROW(v.validate());
  EXPECT_EQ(v.find("layer1.core2").length, 64);
}

TEST(ParamView, MergedAndSegments) {
  ParamView v;
  v.add("a", 3);
  v.add("b", 2);
  v.add("c", 4, 0);
  EXPECT_EQ(v.groups(), 2);
  EXPECT_EQ(v.group_segments(0).size(), 2u);
  const ParamView m = v.merged();
  EXPECT_EQ(m.groups(), 1);
  EXPECT_EQ(m.size(), 9);
  EXPECT_THROW(v.find("zz"), Error);
}
