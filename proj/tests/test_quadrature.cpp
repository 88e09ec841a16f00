#include "bpfree/quadrature.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

using namespace bpfree;

namespace {

// E[z^p] for z ~ N(0, 1): (p - 1)!! for even p.
double normal_moment(int p) {
  if (p % 2) return 0.0;
  double m = 1.0;
  for (int k = p - 1; k > 1; k -= 2) m *= k;
  return m;
}

double rule_moment(const Rule1D<double>& r, int p) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
  return s;
}

}  // namespace

TEST(Rule1D, LevelOneIsTheMean) {
  const auto r = rule_1d(1);
  ASSERT_EQ(r.nodes.size(), 1u);
  EXPECT_EQ(r.nodes[0], 0.0);
  EXPECT_EQ(r.weights[0], 1.0);
}

TEST(Rule1D, NodeCountsSymmetryAndWeightSums) {
  for (int l = 1; l <= 3; ++l) {
    const auto r = rule_1d(l);
    EXPECT_EQ(r.nodes.size(), std::size_t(2 * l - 1));
    double w = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const std::size_t j = r.nodes.size() - 1 - i;
      EXPECT_DOUBLE_EQ(r.nodes[i], -r.nodes[j]);
      EXPECT_DOUBLE_EQ(r.weights[i], r.weights[j]);
      w += r.weights[i];
    }
    EXPECT_NEAR(w, 1.0, 1e-15);
  }
}

TEST(Rule1D, Nested) {
  for (int l = 1; l < 3; ++l) {
    const auto a = rule_1d(l), b = rule_1d(l + 1);
    for (double x : a.nodes) {
      bool found = false;
      for (double y : b.nodes) found = found || x == y;
      EXPECT_TRUE(found) << "level " << l << " node " << x;
    }
  }
}

TEST(Rule1D, LevelThreeExactThroughDegreeSeven) {
  const auto r = rule_1d(3);
  for (int p = 0; p <= 7; ++p) EXPECT_NEAR(rule_moment(r, p), normal_moment(p), 1e-12) << p;
  EXPECT_GT(std::abs(rule_moment(r, 8) - normal_moment(8)), 1.0);
}

TEST(Rule1D, LevelTwoExactThroughDegreeThree) {
  const auto r = rule_1d(2);
  for (int p = 0; p <= 3; ++p) EXPECT_NEAR(rule_moment(r, p), normal_moment(p), 1e-12) << p;
}

TEST(Rule1D, UnsupportedLevel) {
  try {
    rule_1d(4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedLevel);
  }
  EXPECT_THROW(rule_1d(0), Error);
}

TEST(SparseGrid, PublishedCounts) {
  EXPECT_EQ(build_sparse_grid(2, 3).size(), 13);
  EXPECT_EQ(build_sparse_grid(3, 3).size(), 25);
  EXPECT_EQ(build_sparse_grid(21, 3).size(), 925);
}

TEST(SparseGrid, LevelThreeCountFormula) {
  for (Index d = 1; d <= 25; ++d) EXPECT_EQ(build_sparse_grid(d, 3).size(), 2 * d * d + 2 * d + 1) << d;
}

TEST(SparseGrid, TrivialGrid) {
  const auto g = build_sparse_grid(1, 1);
  ASSERT_EQ(g.size(), 1);
  EXPECT_EQ(g.nodes(0, 0), 0.0);
  EXPECT_EQ(g.weights(0), 1.0);
}

TEST(SparseGrid, NoDuplicatesAndWeightSum) {
  for (Index d : {1, 2, 3, 5, 8}) {
    for (int k = 1; k <= 3; ++k) {
      const auto g = build_sparse_grid(d, k);
      EXPECT_NEAR(g.weights.sum(), 1.0, 1e-12);
      std::set<std::vector<double>> seen;
      for (Index j = 0; j < g.size(); ++j) {
        std::vector<double> v(g.nodes.col(j).data(), g.nodes.col(j).data() + d);
        EXPECT_TRUE(seen.insert(v).second);
      }
    }
  }
}

TEST(SparseGrid, MirrorIndices) {
  const auto g = build_sparse_grid(4, 3);
  for (Index j = 0; j < g.size(); ++j) {
    const Index m = g.mirror[std::size_t(j)];
    EXPECT_TRUE((g.nodes.col(m) + g.nodes.col(j)).isZero(0.0));
    EXPECT_EQ(g.weights(m), g.weights(j));
  }
}

TEST(SparseGrid, InvalidArguments) {
  try {
    build_sparse_grid(0, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidDimension);
  }
  try {
    build_sparse_grid(2, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedLevel);
  }
}

TEST(SparseIntegrate, ConstantsAndVariances) {
  for (Index d : {1, 2, 4}) {
    for (int k = 1; k <= 3; ++k) {
      const auto g = build_sparse_grid(d, k);
      EXPECT_NEAR(sparse_integrate(g, [](const Eigen::VectorXd&) { return Eigen::VectorXd::Ones(1); })(0),
                  1.0, 1e-12);
      if (k < 2) continue;
      for (Index i = 0; i < d; ++i) {
        auto sq = [i](const Eigen::VectorXd& z) { return Eigen::VectorXd::Constant(1, z(i) * z(i)); };
        EXPECT_NEAR(sparse_integrate(g, sq)(0), 1.0, 1e-12);
      }
    }
  }
}

// Random degree <= 3 polynomials in D = 3 against closed-form Gaussian moments.
TEST(SparseIntegrate, RandomCubicPolynomials) {
  const auto g = build_sparse_grid(3, 3);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    struct Term { double c; int a, b, e; };
    std::vector<Term> terms;
    double exact = 0.0;
    for (int a = 0; a <= 3; ++a)
      for (int b = 0; a + b <= 3; ++b)
        for (int e = 0; a + b + e <= 3; ++e) {
          const double c = n01(rng);
          terms.push_back({c, a, b, e});
          exact += c * normal_moment(a) * normal_moment(b) * normal_moment(e);
        }
    auto f = [&](const Eigen::VectorXd& z) {
      double s = 0.0;
      for (const auto& t : terms) s += t.c * std::pow(z(0), t.a) * std::pow(z(1), t.b) * std::pow(z(2), t.e);
      return Eigen::VectorXd::Constant(1, s);
    };
    EXPECT_NEAR(sparse_integrate(g, 3, f)(0), exact, 1e-10);
  }
}

TEST(SparseIntegrate, DimensionMismatch) {
  const auto g = build_sparse_grid(3, 2);
  auto f = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Ones(1); };
  try {
    sparse_integrate(g, 2, f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(GridIo, RoundTrip) {
  const auto g = build_sparse_grid(3, 3);
  std::stringstream ss;
  write_grid(ss, g);
  const auto h = read_grid(ss);
  EXPECT_EQ(h.dim, 3);
  EXPECT_EQ(h.level, 3);
  EXPECT_EQ(h.nodes, g.nodes);
  EXPECT_EQ(h.weights, g.weights);
  EXPECT_EQ(h.mirror, g.mirror);
}

TEST(GridIo, RejectsBadCount) {
  std::stringstream ss("# sparse-grid dim=1 level=1 count=2\n0 1\n");
  EXPECT_THROW(read_grid(ss), Error);
}
