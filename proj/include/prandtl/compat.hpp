#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prandtl/grid.hpp"

namespace prandtl {

/// γ > 3/2 and γ + 1/2 < σ ≤ 2γ − 1.
bool validate_weights(double gamma, double sigma) noexcept;

/// Throws ConfigError naming the first violated constraint.
void require_weights(const WeightParams& w);

/// Monotone wall profile that is exactly λy on [0, y_c], switches over
/// [y_c, 2y_c] with a C^m smoothstep in u′, and approaches u_∞ as
/// u_∞ − cℓe^{−(y−y_c)/ℓ}.
///
///   u′(y) = λ(1 − S) + S·c·e^{−(y−y_c)/ℓ},  S = I_t(m+1, m+1),  t = (y − y_c)/y_c
///
/// c is fixed by u(∞) = u_∞.
class BlendProfile {
public:
    BlendProfile(double lambda, double u_inf, double y_c, int m, double ell = 1.0);

    double value(double y) const;
    double d1(double y) const;
    double d2(double y) const;

    double lambda() const noexcept { return lambda_; }
    double u_inf() const noexcept { return u_inf_; }
    double y_c() const noexcept { return y_c_; }
    double tail_coefficient() const noexcept { return c_; }

private:
    double S(double y) const;
    double dS(double y) const;

    double lambda_, u_inf_, y_c_, ell_;
    int m_;
    double c_ = 0.0;
    double u_2yc_ = 0.0;
};

struct InitialData1D {
    std::vector<double> y;
    std::vector<double> rho0;
    std::vector<double> u0;
    /// ∂_y^k u0(0) for k = 0..5, when known in closed form.
    std::optional<std::array<double, 6>> analytic_derivs;
    double kappa3 = 0.0;
};

/// u0 from BlendProfile on the given nodes; rho0 is filled with ρ_∞ +
/// rho_amp·e^{−y} and κ₃ = ½ min rho0. Throws ConfigError when λy_c ≥ u_∞
/// or when no positive tail coefficient exists.
InitialData1D build_u0_blend(double lambda, double u_inf, double y_c, int m, std::span<const double> y,
                             double rho_inf = 1.0, double rho_amp = 0.0, double ell = 1.0);

struct CompatEntry {
    std::string name;
    int order = 0;        // wall-derivative order the condition belongs to
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct CompatReport {
    std::vector<CompatEntry> entries;
    /// Highest k ≤ 5 such that every wall condition of order ≤ k passes.
    int overall_order_m = 0;
    /// Every entry of order ≤ m (and the density bound) passes.
    bool pass = false;

    const CompatEntry& at(const std::string& name) const;
};

/// Evaluates the corner conditions
///   u0(0) = 0, u0′(0) > 0, ∂_y^k u0(0) = 0 for k = 2..5,
///   ∂_y³v0(0) = 0 with v0 = −u0·q0,  ρ0 ≥ κ₃.
/// Wall derivatives come from analytic_derivs when present, otherwise from
/// one-sided stencils on k+4 nodes; the threshold is ten times the
/// difference against the same stencil on every other node, floored at
/// 1e-8·max|u0|. Throws UsageError when there are too few nodes.
CompatReport check_compat(const InitialData1D& data, int m);

/// One-sided wall derivative with its Richardson-style error estimate.
struct WallDerivative {
    double value;
    double error;
};
WallDerivative wall_derivative(std::span<const double> y, std::span<const double> f, int order);

struct UnsteadyData {
    ScalarField rho0;
    ScalarField u0;
    double min_w_sigma = 0.0;   // achieved min w₀⟨y⟩^σ
    double delta_bl = 0.0;      // δ̃ the data certifies (min_w_sigma / 2)
};

struct UnsteadyDataParams {
    double rho_inf = 1.0;
    double u_inf = 1.0;
    double wall_slope = 1.0;
    double y_c = 0.25;
    int m = 5;
};

/// ρ₀ = ϱ_∞ + a·cos x·e^{−y} with a = amplitude, shrunk if needed so that
/// 2κ₁ ≤ ρ₀ ≤ κ₂/2; u₀ = blend profile + amplitude·sin x·y⁶e^{−y²}/P
/// (P normalizes the bump to unit height). delta_bl ≤ 0 means "derive δ̃
/// from the data"; otherwise the data must satisfy w₀⟨y⟩^σ ≥ 2·delta_bl.
/// Throws ConfigError on an empty density band or invalid weights and
/// DataError (with the achieved minimum) when the vorticity bound fails.
UnsteadyData build_unsteady_data(const WeightParams& weights, double delta_bl, double kappa1, double kappa2,
                                 double amplitude, const GridPtr& grid, const UnsteadyDataParams& p = {});

}  // namespace prandtl
