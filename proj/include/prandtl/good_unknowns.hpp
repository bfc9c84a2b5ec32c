#pragma once

#include <array>

#include "prandtl/grid.hpp"
#include "prandtl/unsteady.hpp"

namespace prandtl {

/// Cancellation variables at tangential order s:
///   g_w = ∂_y w / w,  g_ϱ = ∂_y ϱ / w,
///   w_g = ∂ₓ^s w − g_w ∂ₓ^s u,  ϱ_g = ∂ₓ^s ϱ − g_ϱ ∂ₓ^s u.
struct GoodUnknowns {
    int s_order = 0;
    ScalarField g_w;
    ScalarField g_rho;
    ScalarField w_g;
    ScalarField rho_g;
};

enum class ResidualKind { wg_equation, rhog_equation, quotient_identity, boundary_reduction_1 };

const char* to_string(ResidualKind kind) noexcept;

struct GoodUnknownResidual {
    ResidualKind which = ResidualKind::quotient_identity;
    double residual_norm = 0.0;
    double grid_h = 0.0;
};

/// Throws DegeneracyError (carrying the minimum) when min w⟨y⟩^σ < delta_bl
/// or w vanishes somewhere.
GoodUnknowns compute_good_unknowns(const UnsteadyState& state, int s, double delta_bl, double sigma = 3.0);

/// ‖w_g − w·∂_y(∂ₓ^s u / w)‖ in discrete L² over the whole grid.
GoodUnknownResidual verify_quotient_identity(const UnsteadyState& state, int s);

/// The two transport–diffusion identities satisfied by the good unknowns,
/// with a = 1/ρ and L = ∂_t + u∂ₓ + v∂_y − ε∂ₓ²:
///
///   L(w_g) − ∂_y(a∂_y w_g) = Q₁ − Q₂g_w − Q₃ − Q₄∂ₓ^s u + F_w
///   L(ϱ_g) = Q₅ − Q₆g_ϱ − Q₇∂ₓ^s u + 2ε∂ₓ^{s+1}u ∂ₓg_ϱ + F_ϱ
///
///   Q₁ = −Σ_{0<k≤s} C_s^k ∂ₓ^k u ∂ₓ^{s+1−k} w − Σ_{0<k<s} C_s^k ∂ₓ^k v ∂ₓ^{s−k} ∂_y w
///   Q₂ = Q₁ with (w, ∂_y w) → (u, w);   Q₅ = Q₁ with (w, ∂_y w) → (ϱ, ∂_y ϱ)
///   S  = Σ_{0<k≤s} C_s^k ∂ₓ^k a ∂ₓ^{s−k} ∂_y w
///   Q₃ = −∂_y S − ∂_y(a∂ₓ^s u ∂_y g_w) − ∂ₓ^s w ∂_y(a g_w) + S g_w − 2ε∂ₓ^{s+1}u ∂ₓg_w
///   Q₄ = L(g_w),  Q₇ = L(g_ϱ)   (∂_t w, ∂_t ϱ taken from the equations)
///   Q₆ = Q₂ + ∂ₓ^s(a∂_y w)
///   F_w = ∂ₓ^s ∂_y f_u − g_w ∂ₓ^s f_u,  F_ϱ = ∂ₓ^s f_ϱ − g_ϱ ∂ₓ^s f_u
///
/// The time derivative on the left is the centered difference over the
/// three states, the rest is evaluated at the middle one. Returns the
/// discrete L² norm of LHS − RHS over y ∈ [h_y, y_max/2]. Throws
/// UsageError for unequal time spacing and DegeneracyError when w ≤ 0.
GoodUnknownResidual residual_good_unknown_equation(ResidualKind which, const std::array<UnsteadyState, 3>& states,
                                                   const UnsteadyParams& params, int s);

/// sup over x of |∂_y³w − ρw∂ₓw − (2∂_yϱ/ρ)∂_y²w| at y = 0, with wall
/// derivatives of u from one-sided fourth-order stencils.
GoodUnknownResidual verify_boundary_reduction_1(const UnsteadyState& state);

/// Both sides of the boundary relation at each x (lhs, rhs).
std::pair<std::vector<double>, std::vector<double>> boundary_reduction_1_sides(const UnsteadyState& state);

}  // namespace prandtl
