#pragma once
/**
 * @file oracles.hpp
 * @brief Reference solutions for the gridded benchmarks: viscous Burgers by the
 *        Cole-Hopf integral and by a fine finite-difference solve, and Darcy flow
 *        by a five-point finite-volume solve.
 */

#include "bpfree/raster.hpp"

#include <Eigen/Core>

#include <vector>

namespace bpfree {

inline constexpr double kBurgersNu = 0.01 / 3.14159265358979323846;

/// u(x, t) for u_t + u u_x = nu u_xx, u(x, 0) = -sin(pi x), u(+-1, t) = 0.
double burgers_cole_hopf(double x, double t, double nu = kBurgersNu);

/// Cole-Hopf values on an nx-by-nt grid over [-1, 1] x [0, 1]; x along columns.
Raster burgers_reference(Index nx = 256, Index nt = 101, double nu = kBurgersNu);

/// Conservative central-difference solve with SSP-RK3 on nx+1 nodes, sampled at
/// nt equally spaced times in [0, 1].
Raster burgers_finite_difference(Index nx = 4096, Index nt = 101, double nu = kBurgersNu);

/// Piecewise-constant two-valued field on an n x n node grid over [0, 1]^2.
Raster default_permeability(Index n = 241, double low = 3.0, double high = 12.0);

/// Solves div(k grad u) = f on the permeability grid with u = 0 on the boundary.
/// Face coefficients are harmonic means of the adjacent node values.
Raster darcy_solve(const Raster& permeability, double f = 1.0);

/// max |div_h(k grad_h u) - f| over interior nodes.
double darcy_discrete_residual(const Raster& permeability, const Raster& u, double f = 1.0);

}  // namespace bpfree
