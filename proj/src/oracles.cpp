#include "bpfree/oracles.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bpfree {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

double burgers_cole_hopf(double x, double t, double nu) {
  if (t <= 0.0) return -std::sin(kPi * x);
  if (std::abs(x) >= 1.0) return 0.0;
  // eta = 2 sqrt(nu t) s turns the heat kernel into exp(-s^2).
  const double scale = 2.0 * std::sqrt(nu * t);
  const double a = 1.0 / (2.0 * kPi * nu);
  auto exponent = [&](double s) {
    const double y = x - scale * s;
    return -a * (std::cos(kPi * y) + 1.0) - s * s;
  };
  constexpr double kRange = 30.0;
  double peak = -1e300;
  for (double s = -kRange; s <= kRange; s += 1e-2) peak = std::max(peak, exponent(s));

  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  double num = 0.0, den = 0.0;
  for (double lo = -kRange; lo < kRange; lo += 0.5) {
    const double hi = lo + 0.5;
    den += Rule::integrate([&](double s) { return std::exp(exponent(s) - peak); }, lo, hi, 10,
                           1e-13);
    num += Rule::integrate(
        [&](double s) { return std::sin(kPi * (x - scale * s)) * std::exp(exponent(s) - peak); },
        lo, hi, 10, 1e-13);
  }
  return -num / den;
}

Raster burgers_reference(Index nx, Index nt, double nu) {
  Raster r;
  r.x0 = -1.0;
  r.x1 = 1.0;
  r.y0 = 0.0;
  r.y1 = 1.0;
  r.values.resize(nt, nx);
  for (Index j = 0; j < nt; ++j)
    for (Index i = 0; i < nx; ++i) {
      const double x = r.x0 + 2.0 * double(i) / double(nx - 1);
      const double t = double(j) / double(nt - 1);
      r.values(j, i) = (i == 0 || i == nx - 1) ? 0.0 : burgers_cole_hopf(x, t, nu);
    }
  for (Index i = 0; i < nx; ++i) r.values(0, i) = -std::sin(kPi * r.x_at(i));
  r.meta["kind"] = "burgers-reference";
  r.meta["method"] = "cole-hopf";
  r.meta["axes"] = "x columns, t rows";
  return r;
}

Raster burgers_finite_difference(Index nx, Index nt, double nu) {
  const double dx = 2.0 / double(nx);
  Eigen::ArrayXd u(nx + 1);
  for (Index i = 0; i <= nx; ++i) u(i) = -std::sin(kPi * (-1.0 + dx * double(i)));
  u(0) = 0.0;
  u(nx) = 0.0;

  const double out_dt = 1.0 / double(nt - 1);
  const double stable = 0.2 * std::min(dx * dx / nu, dx);
  const Index sub = static_cast<Index>(std::ceil(out_dt / stable));
  const double dt = out_dt / double(sub);

  auto rhs = [&](const Eigen::ArrayXd& v) {
    Eigen::ArrayXd d = Eigen::ArrayXd::Zero(nx + 1);
    for (Index i = 1; i < nx; ++i) {
      const double fr = 0.25 * (v(i) * v(i) + v(i + 1) * v(i + 1));
      const double fl = 0.25 * (v(i - 1) * v(i - 1) + v(i) * v(i));
      d(i) = -(fr - fl) / dx + nu * (v(i + 1) - 2.0 * v(i) + v(i - 1)) / (dx * dx);
    }
    return d;
  };

  Raster r;
  r.x0 = -1.0;
  r.x1 = 1.0;
  r.y0 = 0.0;
  r.y1 = 1.0;
  r.values.resize(nt, nx + 1);
  r.values.row(0) = u.matrix().transpose();
  for (Index j = 1; j < nt; ++j) {
    for (Index s = 0; s < sub; ++s) {
      const Eigen::ArrayXd u1 = u + dt * rhs(u);
      const Eigen::ArrayXd u2 = 0.75 * u + 0.25 * (u1 + dt * rhs(u1));
      u = u / 3.0 + 2.0 / 3.0 * (u2 + dt * rhs(u2));
    }
    r.values.row(j) = u.matrix().transpose();
  }
  r.meta["kind"] = "burgers-reference";
  r.meta["method"] = "finite-difference";
  r.meta["axes"] = "x columns, t rows";
  return r;
}

Raster default_permeability(Index n, double low, double high) {
  Raster k;
  k.values.resize(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) {
      const double x = k.x0 + double(c) / double(n - 1);
      const double y = k.y0 + double(r) / double(n - 1);
      const double field = std::sin(2.0 * kPi * x) * std::cos(3.0 * kPi * y) +
                           0.6 * std::sin(5.0 * kPi * (x + 0.7 * y) + 0.4) +
                           0.3 * std::cos(7.0 * kPi * x * y);
      k.values(r, c) = field > 0.15 ? high : low;
    }
  k.meta["kind"] = "permeability";
  std::ostringstream v;
  v << low << "," << high;
  k.meta["levels"] = v.str();
  return k;
}

namespace {

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

void check_square(const Raster& k) {
  if (k.rows() < 3 || k.cols() < 3) {
    throw Error(ErrorCode::InvalidDimension, "permeability grid needs at least 3x3 nodes");
  }
  if ((k.values.array() <= 0.0).any()) {
    throw Error(ErrorCode::InvalidConfig, "permeability must be positive everywhere");
  }
}

}  // namespace

Raster darcy_solve(const Raster& k, double f) {
  check_square(k);
  const Index ny = k.rows(), nx = k.cols();
  const double hx = (k.x1 - k.x0) / double(nx - 1);
  const double hy = (k.y1 - k.y0) / double(ny - 1);
  const Index mx = nx - 2, my = ny - 2;
  auto id = [&](Index r, Index c) { return (r - 1) * mx + (c - 1); };

  // Negated operator: SPD.
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(5 * mx * my));
  Eigen::VectorXd b = Eigen::VectorXd::Constant(mx * my, -f);
  for (Index r = 1; r < ny - 1; ++r)
    for (Index c = 1; c < nx - 1; ++c) {
      const double kc = k.values(r, c);
      const double ke = harmonic(kc, k.values(r, c + 1)) / (hx * hx);
      const double kw = harmonic(kc, k.values(r, c - 1)) / (hx * hx);
      const double kn = harmonic(kc, k.values(r + 1, c)) / (hy * hy);
      const double ks = harmonic(kc, k.values(r - 1, c)) / (hy * hy);
      const Index i = id(r, c);
      entries.emplace_back(i, i, ke + kw + kn + ks);
      if (c + 1 < nx - 1) entries.emplace_back(i, id(r, c + 1), -ke);
      if (c - 1 > 0) entries.emplace_back(i, id(r, c - 1), -kw);
      if (r + 1 < ny - 1) entries.emplace_back(i, id(r + 1, c), -kn);
      if (r - 1 > 0) entries.emplace_back(i, id(r - 1, c), -ks);
    }
  Eigen::SparseMatrix<double> A(mx * my, mx * my);
  A.setFromTriplets(entries.begin(), entries.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::SolverFailure, "Darcy factorization failed");
  }
  const Eigen::VectorXd x = solver.solve(b);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "Darcy solve failed");

  Raster u;
  u.x0 = k.x0;
  u.x1 = k.x1;
  u.y0 = k.y0;
  u.y1 = k.y1;
  u.values = Eigen::MatrixXd::Zero(ny, nx);
  for (Index r = 1; r < ny - 1; ++r)
    for (Index c = 1; c < nx - 1; ++c) u.values(r, c) = x(id(r, c));
  const double residual = darcy_discrete_residual(k, u, f);
  if (!(residual < 1e-6 * std::max(1.0, std::abs(f)))) {
    std::ostringstream msg;
    msg << "Darcy solve did not converge, residual " << residual;
    throw Error(ErrorCode::SolverFailure, msg.str());
  }
  u.meta["kind"] = "darcy-reference";
  u.meta["method"] = "finite-volume";
  u.meta["permeability_checksum"] = std::to_string(k.checksum());
  return u;
}

double darcy_discrete_residual(const Raster& k, const Raster& u, double f) {
  check_square(k);
  if (u.rows() != k.rows() || u.cols() != k.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "solution and permeability grids differ");
  }
  const double hx = (k.x1 - k.x0) / double(k.cols() - 1);
  const double hy = (k.y1 - k.y0) / double(k.rows() - 1);
  double worst = 0.0;
  for (Index r = 1; r < k.rows() - 1; ++r)
    for (Index c = 1; c < k.cols() - 1; ++c) {
      const double kc = k.values(r, c);
      const double uc = u.values(r, c);
      const double div =
          (harmonic(kc, k.values(r, c + 1)) * (u.values(r, c + 1) - uc) +
           harmonic(kc, k.values(r, c - 1)) * (u.values(r, c - 1) - uc)) / (hx * hx) +
          (harmonic(kc, k.values(r + 1, c)) * (u.values(r + 1, c) - uc) +
           harmonic(kc, k.values(r - 1, c)) * (u.values(r - 1, c) - uc)) / (hy * hy);
      worst = std::max(worst, std::abs(div - f));
    }
  return worst;
}

}  // namespace bpfree
