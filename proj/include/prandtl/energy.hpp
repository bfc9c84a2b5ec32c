#pragma once

#include <span>
#include <string>
#include <vector>

#include "prandtl/grid.hpp"
#include "prandtl/unsteady.hpp"

namespace prandtl {

/// Energy, dissipation and pointwise monitors at one time. ϱ = ρ − ϱ_∞ with
/// ϱ_∞ read from the far-field row (the solver keeps it exact there).
///
///   E_w    = Σ_{|α|≤s, α₁≤s−1} ‖∂^α w ⟨y⟩^{γ+α₂}‖²
///   E_rho  = Σ_{|α|≤s, α₁≤s−1} ‖∂^α ϱ ⟨y⟩^{σ+α₂}‖²
///   E_gu   = ‖ϱ_g⟨y⟩^γ‖² + ‖w_g⟨y⟩^γ‖²            (NaN when gu_missing)
///   E_linf = sup Σ_{|α|≤2} ⟨y⟩^{2σ+2α₂}|∂^α w|²
///   E_total = E_w + E_rho + E_gu + E_linf      (E_gu left out when missing)
///   E2 = E_w over α₁ ≤ s + E_rho + ‖∂ₓ^s ϱ⟨y⟩^γ‖² + E_linf
///   D_total = Σ_{|α|≤s, α₁≤s−1} ‖∂_y∂^α w ⟨y⟩^{γ+α₂}‖² + ‖∂_y w_g⟨y⟩^γ‖²
struct EnergyReport {
    double t = 0.0;
    double E_w = 0.0;
    double E_rho = 0.0;
    double E_gu = 0.0;
    double E_linf = 0.0;
    double E_total = 0.0;
    double E2 = 0.0;
    double D_total = 0.0;
    double min_w_sigma = 0.0;
    double rho_min = 0.0;
    double rho_max = 0.0;
    double wall_min_w = 0.0;  // min over x of w(x, 0)
    bool gu_missing = false;
};

struct MonitorBounds {
    double min_w_sigma = 0.0;
    double rho_min = 0.0;
    double rho_max = 0.0;
    double E_linf = 0.0;
    double wall_min_w = 0.0;
};

/// Grid reductions; exact, no tolerance.
MonitorBounds monitor_bounds(const UnsteadyState& state, double sigma);

/// All energy fields of the report (D_total included). With strict = true a
/// degenerate vorticity throws DegeneracyError; otherwise the good-unknown
/// terms are flagged missing.
EnergyReport energy_E(const UnsteadyState& state, const WeightParams& weights, int s_max, double delta_bl,
                      bool strict = false);

/// D_total alone. NaN-free: the good-unknown term is dropped when it cannot
/// be formed and strict is false.
double dissipation_D(const UnsteadyState& state, const WeightParams& weights, int s_max, double delta_bl = 0.0,
                     bool strict = false);

/// Envelope checks on a recorded series.
///
/// Vorticity floor: κ(t) = min(min_w_sigma(0), min_{τ≤t} wall_min_w(τ)) and
/// the series must satisfy min_w_sigma(t) ≥ (1 − λt e^{λt})κ(t) − tol.
/// lambda_fit is the smallest λ ≥ 0 for which this holds at every t. With
/// lambda_est > 0 the check uses lambda_est; otherwise it passes when the
/// fitted envelope stays positive over the series, λT e^{λT} < 1.
///
/// Pointwise bound: E_linf(t) ≤ (E_linf(0) + C t)e^{λt}, λ the least-squares
/// slope of log E_linf (clamped at 0) and C the smallest covering constant.
struct BoundsEnvelope {
    double lambda_fit = 0.0;
    std::vector<double> kappa_series;
    bool passed = false;
    double linf_lambda = 0.0;
    double linf_C = 0.0;
};

BoundsEnvelope check_principle_envelope(std::span<const EnergyReport> series, double lambda_est = 0.0,
                                        double tol = 1e-12);

struct MonitorConfig {
    WeightParams weights;
    int s_max = 2;
    double delta_bl = 0.0;  // δ̃
    double kappa1 = 0.0;
    double kappa2 = 1e300;
    int snapshot_every = 0;  // 0: first and last state only
    bool strict = false;
    bool stop_on_failure = true;
};

enum class RunStatus { completed, life_span_exceeded };

const char* to_string(RunStatus status) noexcept;

struct UnsteadyRun {
    std::vector<UnsteadyState> snapshots;
    std::vector<EnergyReport> series;
    RunStatus status = RunStatus::completed;
    double T0 = 0.0;             // last t with min w⟨y⟩^σ ≥ δ̃ and κ₁ ≤ ρ ≤ κ₂
    double energy_interval = 0.0;  // last t with sup_{τ≤t} E_total ≤ 2E_total(0)
    std::string failure;         // violated bound, empty when completed
};

/// Integrates from init to params.t_final in ceil(t_final/dt) equal steps,
/// recording one EnergyReport per step (and at t = 0). Stops at the first
/// monitor failure when stop_on_failure is set. Blow-up and step errors
/// propagate.
UnsteadyRun run_unsteady(const UnsteadyState& init, const UnsteadyParams& params, const MonitorConfig& monitors);

}  // namespace prandtl
