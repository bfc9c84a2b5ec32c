#pragma once

#include <span>
#include <vector>

#include "prandtl/grid.hpp"

namespace prandtl {

/// Finite-difference weights (Fornberg's recursion) for the `order`-th
/// derivative at z from arbitrary distinct nodes.
std::vector<double> fd_weights(double z, std::span<const double> nodes, int order);

/// Spectral ∂ₓ^order via the discrete Fourier transform along x. The odd
/// derivatives drop the Nyquist mode.
ScalarField ddx(const ScalarField& f, int order = 1);

/// Finite-difference ∂_y^order. Orders 1 and 2 use the grid's three-point
/// stencils; higher orders use (order + 2)-point Fornberg stencils, shifted
/// one-sided near the ends.
ScalarField ddy(const ScalarField& f, int order = 1);

/// ∂ₓ^ax ∂_y^ay.
ScalarField partial(const ScalarField& f, int ax, int ay);

/// Multiplies every Fourier mode k by exp(-eps·k²·tau): the exact solution
/// operator of f_t = eps·f_xx over time tau.
ScalarField fourier_heat(const ScalarField& f, double eps, double tau);

/// Column-wise versions on a bare profile over the grid's y nodes.
std::vector<double> ddy_profile(const Grid2D& grid, std::span<const double> f, int order = 1);

/// ∫₀^y f dy′ by the cumulative trapezoid rule; result[0] = 0.
std::vector<double> cumulative_trapezoid(std::span<const double> y, std::span<const double> f);

/// ∫ f dy on [0, y_max] by the trapezoid rule.
double integrate_profile(const Grid2D& grid, std::span<const double> f);

/// ∬ f dx dy (exact mean in x, trapezoid in y).
double integrate(const ScalarField& f);

enum class NormMode { full_Hs_gamma, single_L2 };

/// single_L2: (∬ |f|²⟨y⟩^{2λ})^{1/2}.
/// full_Hs_gamma: (Σ_{|α|≤s} ‖⟨y⟩^{λ+α₂} ∂^α f‖²)^{1/2}.
/// Throws NumericalOverflow if the result is not finite.
double weighted_norm(const ScalarField& f, int s, double lambda, NormMode mode);

/// ‖f⟨y⟩^λ‖²_{L²}.
double weighted_l2_squared(const ScalarField& f, double lambda);

/// Discrete L² norm (unweighted) restricted to y in [y_lo, y_hi].
double l2_norm_window(const ScalarField& f, double y_lo, double y_hi);

/// max |f|.
double sup_norm(const ScalarField& f);

/// Tridiagonal solve (Thomas algorithm). a: sub-diagonal (a[0] unused),
/// b: diagonal, c: super-diagonal (c[n-1] unused). Returns false when a
/// pivot vanishes. rhs is overwritten with the solution.
bool solve_tridiagonal(std::span<const double> a, std::span<const double> b,
                       std::span<const double> c, std::span<double> rhs);

}  // namespace prandtl
