#include "bpfree/zo.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace bpfree;

namespace {

ParamView flat(Index d) {
  ParamView v;
  v.add("theta", d);
  return v;
}

ZoConfig cfg(int n, Perturbation dist = Perturbation::Gaussian, std::uint64_t seed = 1) {
  ZoConfig c;
  c.queries = n;
  c.distribution = dist;
  c.grouping = Grouping::Global;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Rge, LinearSingleRademacher) {
  const Index d = 10;
  const Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(d, -1.0, 2.0);
  const LossFn loss = [&](const Eigen::VectorXd& t) { return g.dot(t); };
  const ZoConfig c = cfg(1, Perturbation::Rademacher);
  const auto r = rge_estimate(loss, Eigen::VectorXd::Zero(d), flat(d), c, 3);
  const Eigen::VectorXd xi = rge_perturbation(flat(d), c, 3, 0, 0);
  EXPECT_TRUE((xi.array().abs() == 1.0).all());
  EXPECT_LT((r.gradient - g.dot(xi) * xi).norm(), 1e-9);
}

TEST(Rge, LinearExpectation) {
  const Index d = 10;
  const Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(d, -1.0, 2.0);
  const LossFn loss = [&](const Eigen::VectorXd& t) { return g.dot(t); };
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  const int trials = 10000;
  for (int s = 0; s < trials; ++s) {
    mean += rge_estimate(loss, Eigen::VectorXd::Zero(d), flat(d), cfg(1, Perturbation::Rademacher), s).gradient;
  }
  mean /= trials;
  EXPECT_LT((mean - g).norm() / g.norm(), 0.05);
}

TEST(Rge, ConstantLossGivesZero) {
  const LossFn loss = [](const Eigen::VectorXd&) { return 3.0; };
  const auto r = rge_estimate(loss, Eigen::VectorXd::Ones(7), flat(7), cfg(4));
  EXPECT_TRUE(r.gradient.isZero(0.0));
  EXPECT_EQ(r.queries, 8);
  EXPECT_DOUBLE_EQ(r.mean_loss, 3.0);
}

TEST(Rge, QuadraticUnbiased) {
  const Index d = 5;
  const Eigen::VectorXd theta = Eigen::VectorXd::LinSpaced(d, 0.5, 1.5);
  const LossFn loss = [](const Eigen::VectorXd& t) { return t.squaredNorm(); };
  const int trials = 20000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(d);
  for (int s = 0; s < trials; ++s) {
    const Eigen::VectorXd e = rge_estimate(loss, theta, flat(d), cfg(1), s).gradient;
    mean += e;
    sq += e.cwiseProduct(e);
  }
  mean /= trials;
  const Eigen::VectorXd var = sq / trials - mean.cwiseProduct(mean);
  for (Index i = 0; i < d; ++i) {
    EXPECT_LE(std::abs(mean(i) - 2 * theta(i)), 3.0 * std::sqrt(var(i) / trials)) << i;
  }
}

TEST(Rge, VarianceScalesInverselyWithQueries) {
  const Index d = 100;
  const Eigen::VectorXd theta = Eigen::VectorXd::Ones(d);
  const LossFn loss = [](const Eigen::VectorXd& t) { return t.squaredNorm(); };
  std::vector<double> logn, logmse;
  for (int n : {1, 10, 100}) {
    double mse = 0.0;
    const int trials = 1000;
    for (int s = 0; s < trials; ++s) {
      mse += (rge_estimate(loss, theta, flat(d), cfg(n), s).gradient - 2 * theta).squaredNorm();
    }
    logn.push_back(std::log(double(n)));
    logmse.push_back(std::log(mse / trials));
  }
  const double slope = (logmse[2] - logmse[0]) / (logn[2] - logn[0]);
  EXPECT_NEAR(slope, -1.0, 0.2);
}

TEST(Rge, GroupwiseEqualsPerGroupGlobal) {
  ParamView v;
  v.add("a", 4);
  v.add("b", 3);
  const Eigen::VectorXd theta = Eigen::VectorXd::LinSpaced(7, -1.0, 1.0);
  const LossFn sep = [](const Eigen::VectorXd& t) {
    return t.head(4).squaredNorm() + t.tail(3).array().cube().sum();
  };
  ZoConfig c = cfg(2);
  c.grouping = Grouping::PerTensor;
  const auto r = rge_estimate(sep, theta, v, c, 5);
  EXPECT_EQ(r.queries, 8);
  EXPECT_EQ(rge_query_count(v, c), 8);
  for (int g = 0; g < 2; ++g) {
    Eigen::VectorXd est = Eigen::VectorXd::Zero(7);
    for (int q = 0; q < 2; ++q) {
      const Eigen::VectorXd xi = rge_perturbation(v, c, 5, g, q);
      est += (sep(theta + c.radius * xi) - sep(theta - c.radius * xi)) / (2 * c.radius) * xi;
    }
    est /= 2.0;
    const auto& s = *v.group_segments(g)[0];
    EXPECT_LT((r.gradient.segment(s.offset, s.length) - est.segment(s.offset, s.length)).norm(), 1e-12);
  }
}

TEST(Rge, Deterministic) {
  const LossFn loss = [](const Eigen::VectorXd& t) { return std::sin(t.sum()); };
  const auto a = rge_estimate(loss, Eigen::VectorXd::Ones(9), flat(9), cfg(3), 17);
  const auto b = rge_estimate(loss, Eigen::VectorXd::Ones(9), flat(9), cfg(3), 17);
  EXPECT_EQ(a.gradient, b.gradient);
}

TEST(Rge, NonFiniteLossReportsSeed) {
  const LossFn loss = [](const Eigen::VectorXd& t) { return t(0) > 0 ? std::nan("") : 0.0; };
  try {
    rge_estimate(loss, Eigen::VectorXd::Zero(3), flat(3), cfg(1, Perturbation::Gaussian, 77), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteLoss);
    EXPECT_NE(std::string(e.what()).find("seed"), std::string::npos);
    EXPECT_TRUE(e.numerical());
  }
}

TEST(ZoConfig, Validation) {
  ZoConfig c;
  c.queries = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.radius = 0.0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_THROW(parse_grouping("layer"), Error);
  EXPECT_EQ(parse_perturbation("rademacher"), Perturbation::Rademacher);
}

TEST(ZoSgd, Basics) {
  Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(4, 1, 4);
  const Eigen::VectorXd p0 = p;
  zo_sgd_step(p, Eigen::VectorXd::Zero(4), 0.5);
  EXPECT_EQ(p, p0);
  zo_sgd_step(p, p0, 1.0);
  EXPECT_TRUE(p.isZero(0.0));
  Eigen::VectorXd a = p0, b = p0;
  const Eigen::VectorXd g1 = Eigen::VectorXd::Constant(4, 0.3), g2 = Eigen::VectorXd::Constant(4, -1.1);
  zo_sgd_step(a, g1, 0.1);
  zo_sgd_step(a, g2, 0.1);
  zo_sgd_step(b, g1 + g2, 0.1);
  EXPECT_LT((a - b).norm(), 1e-15);
}

TEST(ZoAdam, ZeroGradientIsANoOp) {
  Eigen::VectorXd p = Eigen::VectorXd::Ones(3);
  AdamState s(3);
  for (int i = 0; i < 10; ++i) zo_adam_step(s, p, Eigen::VectorXd::Zero(3));
  EXPECT_EQ(p, Eigen::VectorXd::Ones(3));
}

TEST(ZoAdam, ConstantGradientStepsByLr) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
  AdamState s(3);
  const Eigen::Vector3d g(0.5, -2.0, 1e-3);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd before = p;
    zo_adam_step(s, p, g, 0.01);
    const Eigen::VectorXd step = p - before;
    for (Index k = 0; k < 3; ++k) EXPECT_NEAR(step(k), -0.01 * (g(k) > 0 ? 1 : -1), 1e-4);
  }
}

TEST(ZoAdam, MatchesReferenceImplementation) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  Eigen::VectorXd p(6), q(6), m = Eigen::VectorXd::Zero(6), v = Eigen::VectorXd::Zero(6);
  for (Index i = 0; i < 6; ++i) p(i) = q(i) = n01(rng);
  AdamState s(6);
  const double lr = 3e-3, b1 = 0.8, b2 = 0.99, eps = 1e-7;
  for (int t = 1; t <= 5; ++t) {
    Eigen::VectorXd g(6);
    for (Index i = 0; i < 6; ++i) g(i) = n01(rng);
    zo_adam_step(s, p, g, lr, b1, b2, eps);
    for (Index i = 0; i < 6; ++i) {
      m(i) = b1 * m(i) + (1 - b1) * g(i);
      v(i) = b2 * v(i) + (1 - b2) * g(i) * g(i);
      const double mh = m(i) / (1 - std::pow(b1, t));
      const double vh = v(i) / (1 - std::pow(b2, t));
      q(i) -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
  EXPECT_LT((p - q).cwiseAbs().maxCoeff(), 1e-10);
}
