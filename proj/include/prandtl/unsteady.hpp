#pragma once

#include <functional>
#include <span>
#include <vector>

#include "prandtl/grid.hpp"

namespace prandtl {

/// Manufactured-solution forcing: adds f_ρ to the density equation and f_u
/// to the momentum equation. Either may be empty.
struct Forcing {
    std::function<double(double t, double x, double y)> rho;
    std::function<double(double t, double x, double y)> u;
};

struct UnsteadyParams {
    double eps = 1e-3;
    double rho_inf = 1.0;
    double u_inf = 1.0;
    double dt = 1e-3;
    double t_final = 0.1;
    double cfl_max = 0.5;
    int s_order = 2;
    /// 0 = centered ∂_y in the advection, 1 = first-order upwind.
    double upwind_blend = 0.0;
    /// Allowed |f(y_max) − f_∞| for initial data.
    double far_field_tol = 1e-8;
    Forcing forcing;
};

struct UnsteadyState {
    double t = 0.0;
    ScalarField rho;
    ScalarField u;
    ScalarField v;
    ScalarField w;
};

/// Validates the data (ρ₀ > 0, no-slip, far-field limits) and builds the
/// t = 0 state. Throws DataError.
UnsteadyState init_unsteady(const ScalarField& rho0, const ScalarField& u0, const UnsteadyParams& params);

/// v = −∫₀^y ∂ₓu dy′ by the cumulative trapezoid rule.
ScalarField recover_v(const ScalarField& u);

/// One step of
///   ρ_t + uρ_x + vρ_y − ερ_xx = f_ρ
///   u_t + uu_x + vu_y − εu_xx − (1/ρ)u_yy = f_u
/// as F(dt/2)·M(dt)·F(dt/2): F is the exact Fourier ε-diffusion and M an
/// IMEX Runge–Kutta step, explicit SSP-RK3 on the advection and forcing,
/// L-stable SDIRK on (1/ρ)u_yy with tridiagonal solves per x-column.
/// u = 0 at the wall, u = u_∞ and ρ = ϱ_∞ at y_max.
///
/// Throws StepError (with a suggested dt) when the advective CFL number
/// exceeds cfl_max, and BlowUpError when a column solve fails, a value is
/// non-finite, a sup norm exceeds 1e6 or ρ drops below 1e-8.
UnsteadyState step_unsteady(const UnsteadyState& state, const UnsteadyParams& params);

/// max|u|·dt/dx + max|v|·dt/min_dy.
double cfl_number(const UnsteadyState& state, double dt);

struct HeatOracleOptions {
    int refine = 4;          // each y interval split into this many
    double dt = 1e-3;        // time step of the main solver
    int dt_divisor = 10;     // oracle step is dt / dt_divisor
};

/// Solution of ρ∂_t u = ∂_y²u with u(0) = 0 and
/// u(y_max) = u0(y_max), on a refined copy of y_nodes, returned at y_nodes.
std::vector<double> heat_oracle(double rho_const, const std::function<double(double)>& u0,
                                std::span<const double> y_nodes, double t, const HeatOracleOptions& opt = {});

/// Same, with u0 given on y_nodes (PCHIP-interpolated onto the refined nodes).
std::vector<double> heat_oracle(double rho_const, std::span<const double> u0, std::span<const double> y_nodes,
                                double t, const HeatOracleOptions& opt = {});

/// Implicit steps of ρ∂_t u = ∂_y²u on exactly the given nodes, step size
/// tau, with the SDIRK of step_unsteady. u(0) must be 0; u(y_max) is kept.
std::vector<double> heat_steps(double rho_const, std::vector<double> u, std::span<const double> y_nodes, double tau,
                               int steps);

}  // namespace prandtl
