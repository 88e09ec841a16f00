#include "bpfree/pde.hpp"
#include "bpfree/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace bpfree;

namespace {

constexpr double kPi = 3.14159265358979323846;

Model constant(double c) {
  return [c](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Constant(1, x.cols(), c);
  };
}

// Normal CDF by composite Simpson on [-12, z]; independent of erfc.
double cdf_simpson(double z) {
  const double a = -12.0;
  const int n = 20000;
  const double h = (z - a) / n;
  auto pdf = [](double s) { return std::exp(-0.5 * s * s) / std::sqrt(2.0 * kPi); };
  double s = pdf(a) + pdf(z);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(a + i * h);
  return s * h / 3.0;
}

SteinConfig sg(double sigma) {
  SteinConfig c;
  c.sigma = sigma;
  return c;
}

}  // namespace

TEST(RelativeL2, Examples) {
  const Eigen::Vector3d u(1.0, -2.0, 0.5);
  EXPECT_EQ(relative_l2(u, u), 0.0);
  EXPECT_DOUBLE_EQ(relative_l2(2.0 * u, u), 1.0);
  EXPECT_DOUBLE_EQ(relative_l2(Eigen::Vector3d::Zero(), u), 1.0);
  for (double a : {-1.5, 0.3, 4.0}) EXPECT_NEAR(relative_l2(a * u, u), std::abs(a - 1.0), 1e-15);
  try {
    relative_l2(u, Eigen::Vector3d::Zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroReferenceNorm);
  }
}

TEST(BlackScholes, ExactSolutionLimits) {
  for (double t : {0.0, 0.3, 0.99}) {
    EXPECT_EQ(bs_exact(0.0, t), 0.0);
    // Put-call parity with the put written out from the normal CDF.
    const double tau = 1.0 - t;
    const double d1 = (std::log(2.0) + (0.05 + 0.02) * tau) / (0.2 * std::sqrt(tau));
    const double d2 = d1 - 0.2 * std::sqrt(tau);
    auto ncdf = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    const double put = 100.0 * std::exp(-0.05 * tau) * ncdf(-d2) - 200.0 * ncdf(-d1);
    EXPECT_NEAR(bs_exact(200.0, t), 200.0 - 100.0 * std::exp(-0.05 * tau) + put, 1e-9);
  }
  for (double x : {0.0, 50.0, 99.0, 100.0, 101.0, 180.0}) {
    EXPECT_DOUBLE_EQ(bs_exact(x, 1.0), std::max(x - 100.0, 0.0));
  }
}

TEST(BlackScholes, AtTheMoneyAgainstQuadratureCdf) {
  const double x = 100.0, K = 100.0, r = 0.05, s = 0.2, tau = 1.0;
  const double d1 = (std::log(x / K) + (r + 0.5 * s * s) * tau) / (s * std::sqrt(tau));
  const double d2 = d1 - s * std::sqrt(tau);
  const double ref = x * cdf_simpson(d1) - K * std::exp(-r * tau) * cdf_simpson(d2);
  EXPECT_NEAR(bs_exact(100.0, 0.0), ref, 1e-9);
  EXPECT_NEAR(ref, 10.4505835722, 1e-8);
}

TEST(BlackScholes, ZeroNetLossTerms) {
  BlackScholes p;
  auto rng = make_stream(5, 0x62617463u);
  const CollocationBatch b = p.sample(rng);
  ASSERT_EQ(b.residual.cols(), 100);
  ASSERT_EQ(b.initial.cols(), 10);
  ASSERT_EQ(b.boundary.cols(), 20);
  const SteinEstimator est(2, sg(1e-3));
  const LossBreakdown l = pinn_loss(constant(0.0), p, est, b);
  EXPECT_EQ(l.residual, 0.0);
  // Data terms are reported in units of the output scale (the strike).
  const double s2 = p.output_scale() * p.output_scale();
  EXPECT_NEAR(l.initial * s2, b.initial_target.squaredNorm() / 10.0, 1e-9);
  EXPECT_NEAR(l.boundary * s2, b.boundary_target.squaredNorm() / 20.0, 1e-9);
  EXPECT_NEAR(l.total, l.initial + l.boundary, 1e-15);
}

TEST(BlackScholes, LossIsDeterministic) {
  BlackScholes p;
  const Model net = [](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    return (x.row(0).array() * 0.7 + x.row(1).array().sin()).matrix();
  };
  const auto a = pinn_loss(net, p, sg(1e-3), 9), b = pinn_loss(net, p, sg(1e-3), 9);
  EXPECT_EQ(a.total, b.total);
  EXPECT_NE(a.total, pinn_loss(net, p, sg(1e-3), 10).total);
}

TEST(BlackScholes, ExactSolutionHasSmallLoss) {
  BlackScholes p;
  // Raw-net callable reproducing the exact price through the output transform.
  const Model exact = [&p](const Eigen::MatrixXd& xhat) -> Eigen::MatrixXd {
    const Eigen::MatrixXd x = p.denormalize(xhat);
    Eigen::MatrixXd out(1, x.cols());
    for (Index i = 0; i < x.cols(); ++i) out(0, i) = bs_exact(x(0, i), x(1, i)) / p.output_scale();
    return out;
  };
  const LossBreakdown l = pinn_loss(exact, p, sg(1e-3), 3);
  EXPECT_LT(l.total, 1e-4);
  Eigen::MatrixXd pts = p.holdout_points();
  EXPECT_LT(relative_l2(predict(exact, p, pts), p.reference(pts)), 1e-12);
}

TEST(BlackScholes, SamplingBudget) {
  BlackScholes p;
  EXPECT_EQ(p.budget.residual, 100);
  EXPECT_EQ(p.budget.initial, 10);
  EXPECT_EQ(p.budget.boundary, 10);
  EXPECT_EQ(p.holdout_points().cols(), 201 * 101);
}

TEST(Hjb, ExactSolution) {
  EXPECT_EQ(hjb_exact(Eigen::VectorXd::Zero(20), 1.0), 0.0);
  EXPECT_EQ(hjb_exact(Eigen::VectorXd::Ones(20), 0.0), 21.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::VectorXd x(20);
  for (Index i = 0; i < 20; ++i) x(i) = u(rng);
  EXPECT_NEAR(hjb_exact(x, 0.25), x.cwiseAbs().sum() + 0.75, 1e-14);
}

TEST(Hjb, TransformedForward) {
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(20, 0.0, 1.0);
  const Model wild = [](const Eigen::MatrixXd& in) -> Eigen::MatrixXd {
    return in.colwise().sum().array().exp();
  };
  EXPECT_EQ(hjb_transformed_forward(wild, x, 1.0), x.lpNorm<1>());
  EXPECT_EQ(hjb_transformed_forward(constant(0.0), x, 0.4), x.lpNorm<1>());
  EXPECT_NEAR(hjb_transformed_forward(constant(1.0), x, 0.4), 0.6 + x.lpNorm<1>(), 1e-14);
  Hjb p;
  EXPECT_EQ(p.budget.residual, 100);
  EXPECT_EQ(p.holdout_points().cols(), 10000);
}

TEST(Hjb, ExactInjectionAwayFromKinks) {
  Hjb p;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  CollocationBatch b;
  b.residual.resize(21, 100);
  for (Index i = 0; i < b.residual.size(); ++i) b.residual(i) = u(rng);
  const SteinEstimator est(21, sg(1e-3));
  const LossBreakdown l = pinn_loss(constant(1.0), p, est, b);
  EXPECT_LE(l.total, 1e-4);
  EXPECT_LT(relative_l2(predict(constant(1.0), p, p.holdout_points()),
                        p.reference(p.holdout_points())), 1e-14);
}

TEST(Hjb, InjectionOnDefaultSamplerAndSigma) {
  // The closed-form |x|_1 bypasses smoothing, so kinks do not matter.
  Hjb p;
  const SteinEstimator est(21, sg(p.default_sigma()));
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto rng = make_stream(seed, 0x62617463u);
    EXPECT_LE(pinn_loss(constant(1.0), p, est, p.sample(rng)).total, 1e-20);
  }
  // A non-constant net does see the loss.
  const Model tilt = [](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    return (1.0 + 0.3 * x.row(0).array()).matrix();
  };
  auto rng = make_stream(0, 0x62617463u);
  EXPECT_GT(pinn_loss(tilt, p, est, p.sample(rng)).total, 1e-3);
}

TEST(Burgers, ResidualAndBatch) {
  Burgers p;
  EXPECT_EQ(p.budget.residual, 1200);
  EXPECT_EQ(p.budget.initial, 100);
  EXPECT_EQ(p.budget.boundary, 100);
  auto rng = make_stream(1, 2);
  const CollocationBatch b = p.sample(rng);
  for (Index i = 0; i < b.initial.cols(); ++i) {
    EXPECT_EQ(b.initial(1, i), 0.0);
    EXPECT_DOUBLE_EQ(b.initial_target(i), -std::sin(kPi * b.initial(0, i)));
  }
  for (Index i = 0; i < b.boundary.cols(); ++i) EXPECT_EQ(std::abs(b.boundary(0, i)), 1.0);
  EXPECT_TRUE(b.boundary_target.isZero(0.0));
  // u_t + u u_x - nu u_xx with hand-made derivatives.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 1), g(2, 1), s = Eigen::MatrixXd::Zero(2, 1);
  g << 2.0, 3.0;
  s(0, 0) = 5.0;
  const Eigen::VectorXd r = p.residual(x, Eigen::VectorXd::Constant(1, 0.5), g, s);
  EXPECT_NEAR(r(0), 3.0 + 0.5 * 2.0 - kBurgersNu * 5.0, 1e-15);
}

TEST(Burgers, ReferenceRequiresOracle) {
  Burgers p;
  try {
    p.reference(p.holdout_points());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OracleNotBuilt);
  }
}

TEST(Darcy, ResidualExamples) {
  auto k = std::make_shared<Raster>();
  k->values = Eigen::MatrixXd::Ones(11, 11);
  const SteinConfig cfg = sg(1e-3);
  const Model quad = [](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return x.colwise().squaredNorm(); };
  const Model lin = [](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    return (2.0 * x.row(0) - x.row(1)).array() + 1.0;
  };
  const Eigen::Vector2d x(0.33, 0.61);
  EXPECT_NEAR(darcy_residual(quad, x, *k, cfg), 3.0, 1e-6);
  EXPECT_NEAR(darcy_residual(lin, x, *k, cfg), -1.0, 1e-8);
  // Delta u = 1/2 and k doubled: residual k/2 - 1.
  const Model half = [](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    return 0.25 * x.row(0).array().square();
  };
  k->values *= 2.0;
  EXPECT_NEAR(darcy_residual(half, x, *k, cfg), 0.0, 1e-6);
  EXPECT_THROW(darcy_residual(quad, Eigen::Vector2d(1.5, 0.5), *k, cfg), Error);
}

TEST(Darcy, HardBoundary) {
  Darcy p(std::make_shared<const Raster>(default_permeability(41)));
  Eigen::MatrixXd pts(2, 8);
  pts << 0, 1, 0.3, 0.7, 0, 1, 0.5, 0.2,
         0.4, 0.9, 0, 1, 0, 1, 1, 0;
  const Model big = [](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    return 1e3 * Eigen::MatrixXd::Ones(1, x.cols()) + x.colwise().sum();
  };
  EXPECT_TRUE(predict(big, p, pts).isZero(0.0));
}
