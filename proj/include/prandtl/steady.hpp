#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "prandtl/grid.hpp"

namespace prandtl {

/// q₀(y) = −∫₀^y ∂_y²u₀/(ρ₀u₀²) dy′ by the cumulative trapezoid rule, with
/// the integrand set to 0 at the wall. Throws DataError when the integrand
/// blows up like 1/y at the wall (∂_y³u₀(0) ≠ 0).
std::vector<double> build_q0(std::span<const double> y, std::span<const double> rho0, std::span<const double> u0);

/// The integrand of build_q0, i.e. ∂_y q₀.
std::vector<double> build_dq0(std::span<const double> y, std::span<const double> rho0, std::span<const double> u0);

/// Manufactured-solution sources, each optional:
///   ∂ₓρ + q∂_yρ = f_ρ
///   ρ(u^{k−1}+θ)²∂_y q + ∂_y²u = r₀ + f_r
///   ∂ₓu + ∂_y(u^{k−1}q) = f_u
struct SteadySources {
    std::function<double(double x, double y)> rho;
    std::function<double(double x, double y)> r;
    std::function<double(double x, double y)> u;
};

struct SteadyParams {
    double theta = 0.0;
    std::vector<double> theta_schedule{1e-1, 1e-2, 1e-3, 0.0};
    int m = 3;
    double sigma_tilde = 2.0;
    double dx = 1e-3;
    double L = 0.1;
    // Derived from the data when ≤ 0 (see prepare_steady_data).
    double lambda0 = 0.0;
    double xi0 = 0.0;
    double kappa3 = 0.0;
    double delta_nb = 0.0;
    double picard_tol = 1e-10;
    int picard_max_iters = 50;
    SteadySources sources;
};

/// Throws ConfigError naming the first violated constraint.
void validate_steady_params(const SteadyParams& p);

/// One x-station. dq is ∂_y q as produced by the first integral; q is its
/// cumulative trapezoid integral.
struct SteadyState {
    double x = 0.0;
    std::vector<double> rho;
    std::vector<double> u;
    std::vector<double> q;
    std::vector<double> dq;
};

using SteadySlab = std::vector<SteadyState>;

/// Wall data and the constants the march monitors.
///   λ₀ = u₀′(0)/4
///   δ̃  = largest y ≤ 1 with u₀ ≥ 2λ₀y on [0, y]
///   ξ₀ = ½ min u₀ on [δ̃/2, y_max]
///   κ₃ = ½ min ρ₀
/// Values given in params (> 0) override the derived ones.
struct SteadyData {
    std::shared_ptr<const Grid2D> grid;  // y nodes (nx unused)
    std::vector<double> y, rho0, u0, q0, dq0;
    double lambda0 = 0.0;
    double xi0 = 0.0;
    double delta_nb = 0.0;
    double kappa3 = 0.0;
    double rho_inf = 0.0;
    double u_inf = 0.0;

    /// r₀ = ρ₀(2u₀θ + θ²)∂_y q₀.
    std::vector<double> r0(double theta) const;
};

/// Throws DataError when u₀(0) ≠ 0, u₀ ≤ 0 inside, u₀′(0) ≤ 0, ρ₀ < κ₃ or
/// the q₀ integrand diverges; UsageError on size mismatch or ny < 5.
SteadyData prepare_steady_data(std::span<const double> y, std::span<const double> rho0,
                               std::span<const double> u0, const SteadyParams& params);

/// ρ_next(y) = ρ_prev(y − dx·q(y)) by monotone cubic (PCHIP) interpolation,
/// clamped to [min ρ_prev, max ρ_prev]. Feet below the wall by at most one
/// cell are moved to 0, feet above y_max to y_max. Throws StepError for a
/// foot more than one cell below the wall.
std::vector<double> advect_density(std::span<const double> y, std::span<const double> rho_prev,
                                   std::span<const double> q, double dx);

/// Stations x_n = n·L/N, N = ceil(L/dx), every one equal to the data.
SteadySlab initial_slab(const SteadyData& data, const SteadyParams& params);

/// Iterate k from iterate k−1 at the given θ. At each step x_n → x_{n+1}:
///   ρ^k by advect_density along the mean of q^{k−1} at x_n and x_{n+1};
///   u^k by Heun on ∂ₓu = −∂_y(u^{k−1}q^k), sub-stepped below the
///   parabolic limit 0.4h²ρ(u^{k−1}+θ)²/u^{k−1};
///   ∂_y q^k = (r₀ − ∂_y²u^k)/(ρ^k(u^{k−1}+θ)²) at every stage above the
///   wall, linearly extrapolated to the wall, and q^k its integral from
///   q^k(0) = 0.
/// u = 0 at the wall and u = u_∞ at y_max.
///
/// Throws DegeneracyError when ρ(u^{k−1}+θ)² < 1e-12 away from the wall and
/// LifeSpanExceeded (with the station) when ∂_yu^k(x, 0) < λ₀.
SteadySlab picard_step(const SteadySlab& prev, const SteadyData& data, const SteadyParams& params, double theta);

enum class R0Stencil {
    march,        // the three-point ∂_y² used by picard_step
    independent,  // five-point Fornberg ∂_y²
};

/// Per station, the discrete L²(y) norm of
///   ρ^k(u^{k−1}+θ)²∂_y q^k + ∂_y²u^k − r₀
/// over the nodes above the wall.
std::vector<double> r0_residuals(std::span<const double> y, const SteadySlab& slab, const SteadySlab& prev,
                                 std::span<const double> r0, double theta, R0Stencil stencil = R0Stencil::march);

/// max over stations of r0_residuals.
double check_r0(std::span<const double> y, const SteadySlab& slab, const SteadySlab& prev, std::span<const double> r0,
                double theta, R0Stencil stencil = R0Stencil::march);

/// L²(y) norm of D_h²u − D_{2h}²u over the interior nodes that carry both
/// stencils: a Richardson-style measure of the ∂_y² discretization error.
double d2_error_estimate(std::span<const double> y, std::span<const double> u);

/// Per interior station, the L²(y) norm of the differential form
///   ∂ₓ{ρ^k(u^{k−1}+θ)²∂_y q^k} − ∂_y³(u^{k−1}q^k)
/// with a centered x-difference; 0 at the end stations.
std::vector<double> differential_form_residual(std::span<const double> y, const SteadySlab& slab, const SteadySlab& prev,
                                               double theta);

struct XYValues {
    double X = 0.0;
    double Y = 0.0;
};

/// Energy and dissipation at window[at] (default: the last station), with
/// x-derivatives by Fornberg weights over the whole window:
///   X = Σ_{|α|≤m} ‖∂^α ϱ̄‖² + Σ_{|α|≤m} ‖√ρ u ∂^α∂_y q ⟨y⟩^σ̃‖² + ‖ū‖² + ‖∂_y ū‖²
///   Y = Σ_{|α|≤m} ‖√u ∂_y²∂^α q ⟨y⟩^σ̃‖²
/// ϱ̄ = ρ − ρ(y_max), ū = u − u(y_max) read from window[0]. Throws
/// UsageError when the window holds fewer than m + 1 stations.
XYValues energy_XY(std::span<const double> y, std::span<const SteadyState> window, const SteadyParams& params,
                   std::size_t at = SIZE_MAX);

struct PicardDiagnostics {
    double theta = 0.0;
    std::vector<double> r0;
    int k_done = 0;
    bool converged = false;
    /// sup_x φ^k for k = 1, 2, ... with
    ///   φ^{k+1} = ∫ ρ^{k+1}(u^k+θ)²|∂_y q̂^{k+1}|²⟨y⟩^{2σ̃} + |ρ̂^{k+1}|² + |û^{k+1}|² + |∂_y û^{k+1}|² + |û^k|²
    /// and ·̂^{k+1} = ·^{k+1} − ·^k (û^0 = 0).
    std::vector<double> phi_series;
    /// max of φ^{k+1}/φ^k over k ≥ 2 (over whatever ratios exist otherwise).
    double contraction_ratio = 0.0;
    /// Successive sup-norm differences of (ρ, u, q).
    std::vector<double> sup_diff;
};

struct SteadyMonitorRow {
    double x = 0.0;
    double dyu_wall = 0.0;
    bool wall_ok = false;   // ∂_yu(x, 0) ≥ 2λ₀
    bool rho_ok = false;    // ρ ≥ κ₃
    bool near_ok = false;   // u ≥ λ₀y on [0, δ̃]
    bool far_ok = false;    // u ≥ ξ₀ on [δ̃/2, y_max]
    bool all() const noexcept { return wall_ok && rho_ok && near_ok && far_ok; }
};

std::vector<SteadyMonitorRow> steady_monitors(const SteadySlab& slab, const SteadyData& data);

/// Largest x such that every station up to x passes all monitors; −1 when
/// the first station fails.
double detect_life_span(std::span<const SteadyMonitorRow> rows);

struct SteadySeriesRow {
    double x = 0.0;
    double X_total = 0.0;
    double Y_total = 0.0;
    double dyu_wall = 0.0;
    double r0_residual = 0.0;
    double phi_last = 0.0;
};

struct SteadyRun {
    SteadyData data;
    SteadySlab slab;       // converged slab for the last θ
    SteadySlab prev;       // the iterate before it
    std::vector<PicardDiagnostics> diagnostics;
    /// sup over stations and y of |u_a − u_b| + |ρ_a − ρ_b| between the
    /// converged slabs of consecutive θ.
    std::vector<double> theta_distances;
    bool cauchy = false;   // theta_distances strictly decreasing
    std::vector<SteadyMonitorRow> monitors;
    double L_a = 0.0;
    std::vector<SteadySeriesRow> series;
};

/// For each θ of the schedule (warm-started from the previous one) iterates
/// picard_step until the sup-norm successive difference falls below
/// picard_tol or picard_max_iters is reached. Throws IterationDivergence
/// when φ^{k+1}/φ^k ≥ 1 for three consecutive k, and propagates the
/// errors of picard_step.
SteadyRun run_steady(std::span<const double> y, std::span<const double> rho0, std::span<const double> u0,
                     const SteadyParams& params);

/// Uniqueness functional along x for two converged slabs on the same
/// stations, q̃ = (u₁q₁ − u₂q₂)/u₂:
///   F(x) = ‖√ρ₁ u₂ ∂_y q̃ ⟨y⟩^σ̃‖² + ‖ρ₁ − ρ₂‖²
/// fitted_growth is the least C with F(x) ≤ F(0) + C∫₀ˣF; envelope_ok when
/// F stays finite and under F(0)e^{Cx}(1 + 1e-9), or when the slabs are
/// bit-identical. Throws UsageError on mismatched stations or nodes.
struct StabilityReport {
    bool identical = false;
    bool envelope_ok = false;
    double fitted_growth = 0.0;
    std::vector<double> functional;
    double sup_functional = 0.0;
};

StabilityReport stability_check(const SteadySlab& a, const SteadySlab& b, std::span<const double> y,
                                double sigma_tilde);

}  // namespace prandtl
