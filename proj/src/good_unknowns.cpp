#include "prandtl/good_unknowns.hpp"

#include <boost/math/special_functions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "prandtl/errors.hpp"
#include "prandtl/operators.hpp"

namespace prandtl {

const char* to_string(ResidualKind kind) noexcept {
    switch (kind) {
        case ResidualKind::wg_equation: return "wg_equation";
        case ResidualKind::rhog_equation: return "rhog_equation";
        case ResidualKind::quotient_identity: return "quotient_identity";
        case ResidualKind::boundary_reduction_1: return "boundary_reduction_1";
    }
    return "unknown";
}

namespace {

void check_order(int s) {
    if (s < 1 || s > 6) throw UsageError("good unknowns: s must lie in [1, 6]");
}

void require_positive_w(const ScalarField& w, double sigma, double delta_bl) {
    const double m = weighted(w, sigma).min();
    if (!(m >= delta_bl) || !(w.min() > 0.0)) {
        std::ostringstream os;
        os << "good unknowns: min w<y>^sigma = " << m << " below " << delta_bl;
        throw DegeneracyError(os.str(), m);
    }
}

double binom(int n, int k) { return boost::math::binomial_coefficient<double>(n, k); }

ScalarField sample(const std::function<double(double, double, double)>& f, const GridPtr& g, double t) {
    ScalarField r(g);
    if (!f) return r;
    for (int i = 0; i < g->nx(); ++i)
        for (int j = 0; j < g->ny(); ++j) r(i, j) = f(t, g->x(i), g->y(j));
    return r;
}

// −Σ_{0<k≤s} C_s^k ∂ₓ^k u ∂ₓ^{s+1−k} F − Σ_{0<k<s} C_s^k ∂ₓ^k v ∂ₓ^{s−k} F_y
ScalarField commutator(const std::vector<ScalarField>& dxu, const std::vector<ScalarField>& dxv, const ScalarField& F,
                       const ScalarField& Fy, int s) {
    ScalarField q(F.grid_ptr());
    for (int k = 1; k <= s; ++k) q -= binom(s, k) * (dxu[k] * ddx(F, s + 1 - k));
    for (int k = 1; k < s; ++k) q -= binom(s, k) * (dxv[k] * ddx(Fy, s - k));
    return q;
}

// u∂ₓf + v∂_y f − ε∂ₓ²f
ScalarField transport(const ScalarField& f, const ScalarField& u, const ScalarField& v, double eps) {
    return u * ddx(f, 1) + v * ddy(f, 1) - eps * ddx(f, 2);
}

}  // namespace

GoodUnknowns compute_good_unknowns(const UnsteadyState& state, int s, double delta_bl, double sigma) {
    check_order(s);
    require_positive_w(state.w, sigma, delta_bl);
    GoodUnknowns g;
    g.s_order = s;
    g.g_w = ddy(state.w, 1) / state.w;
    g.g_rho = ddy(state.rho, 1) / state.w;
    const ScalarField dsu = ddx(state.u, s);
    g.w_g = ddx(state.w, s) - g.g_w * dsu;
    g.rho_g = ddx(state.rho, s) - g.g_rho * dsu;
    return g;
}

GoodUnknownResidual verify_quotient_identity(const UnsteadyState& state, int s) {
    check_order(s);
    require_positive_w(state.w, 0.0, 0.0);
    const GoodUnknowns g = compute_good_unknowns(state, s, 0.0, 0.0);
    const ScalarField rhs = state.w * ddy(ddx(state.u, s) / state.w, 1);
    const ScalarField diff = g.w_g - rhs;
    GoodUnknownResidual r;
    r.which = ResidualKind::quotient_identity;
    r.residual_norm = l2_norm_window(diff, 0.0, state.u.grid().y_max());
    r.grid_h = state.u.grid().max_dy();
    return r;
}

GoodUnknownResidual residual_good_unknown_equation(ResidualKind which, const std::array<UnsteadyState, 3>& st,
                                                   const UnsteadyParams& p, int s) {
    check_order(s);
    if (which != ResidualKind::wg_equation && which != ResidualKind::rhog_equation)
        throw UsageError("residual_good_unknown_equation: which must be wg_equation or rhog_equation");
    const double tau = st[1].t - st[0].t;
    if (!(tau > 0.0) || std::abs((st[2].t - st[1].t) - tau) > 1e-9 * std::max(1.0, std::abs(tau)))
        throw UsageError("residual_good_unknown_equation: states are not equally spaced in time");

    const UnsteadyState& m = st[1];
    const GridPtr& grid = m.u.grid_ptr();
    const double eps = p.eps;
    const double t = m.t;
    for (const auto& x : st) require_positive_w(x.w, 0.0, 0.0);

    const GoodUnknowns g0 = compute_good_unknowns(st[0], s, 0.0, 0.0);
    const GoodUnknowns g1 = compute_good_unknowns(m, s, 0.0, 0.0);
    const GoodUnknowns g2 = compute_good_unknowns(st[2], s, 0.0, 0.0);

    const ScalarField& u = m.u;
    const ScalarField& v = m.v;
    const ScalarField& w = m.w;
    const ScalarField a = m.rho.map([](double r) { return 1.0 / r; });
    const ScalarField wy = ddy(w, 1);
    const ScalarField rhoy = ddy(m.rho, 1);

    std::vector<ScalarField> dxu(s + 2), dxv(s + 1);
    for (int k = 0; k <= s + 1; ++k) dxu[k] = k == 0 ? u : ddx(u, k);
    for (int k = 0; k <= s; ++k) dxv[k] = k == 0 ? v : ddx(v, k);
    const ScalarField& dsu = dxu[s];

    const ScalarField fu = sample(p.forcing.u, grid, t);
    const ScalarField frho = sample(p.forcing.rho, grid, t);
    const ScalarField dsfu = ddx(fu, s);

    // ∂_t w and ∂_t ϱ from the equations.
    const ScalarField wt = -1.0 * transport(w, u, v, eps) + ddy(a * wy, 1) + ddy(fu, 1);
    const ScalarField Q2 = commutator(dxu, dxv, u, w, s);

    ScalarField residual(grid);
    if (which == ResidualKind::wg_equation) {
        const ScalarField& gw = g1.g_w;
        const ScalarField& wg = g1.w_g;
        const ScalarField lhs = (1.0 / (2.0 * tau)) * (g2.w_g - g0.w_g) + transport(wg, u, v, eps) -
                                ddy(a * ddy(wg, 1), 1);

        const ScalarField Q1 = commutator(dxu, dxv, w, wy, s);
        ScalarField S(grid);
        for (int k = 1; k <= s; ++k) S += binom(s, k) * (ddx(a, k) * ddx(wy, s - k));
        const ScalarField dsw = ddx(w, s);
        const ScalarField Q3 = -1.0 * ddy(S, 1) - ddy(a * dsu * ddy(gw, 1), 1) - dsw * ddy(a * gw, 1) + S * gw -
                               2.0 * eps * dxu[s + 1] * ddx(gw, 1);
        const ScalarField gwt = ddy(wt, 1) / w - wy * wt / (w * w);
        const ScalarField Q4 = gwt + transport(gw, u, v, eps);
        const ScalarField Fw = ddy(dsfu, 1) - gw * dsfu;

        residual = lhs - (Q1 - Q2 * gw - Q3 - Q4 * dsu + Fw);
    } else {
        const ScalarField& gr = g1.g_rho;
        const ScalarField& rg = g1.rho_g;
        const ScalarField lhs = (1.0 / (2.0 * tau)) * (g2.rho_g - g0.rho_g) + transport(rg, u, v, eps);

        const ScalarField Q5 = commutator(dxu, dxv, m.rho, rhoy, s);
        const ScalarField Q6 = Q2 + ddx(a * wy, s);
        const ScalarField rhot = -1.0 * transport(m.rho, u, v, eps) + frho;
        const ScalarField grt = ddy(rhot, 1) / w - rhoy * wt / (w * w);
        const ScalarField Q7 = grt + transport(gr, u, v, eps);
        const ScalarField Fr = ddx(frho, s) - gr * dsfu;

        residual = lhs - (Q5 - Q6 * gr - Q7 * dsu + 2.0 * eps * dxu[s + 1] * ddx(gr, 1) + Fr);
    }

    GoodUnknownResidual r;
    r.which = which;
    r.residual_norm = l2_norm_window(residual, grid->y(3), 0.5 * grid->y_max());
    r.grid_h = grid->max_dy();
    return r;
}

namespace {

// ∂_y^k f at y = 0 from a one-sided stencil of fourth-order accuracy.
double wall_diff(std::span<const double> y, std::span<const double> f, int k) {
    const std::size_t n = std::min<std::size_t>(y.size(), static_cast<std::size_t>(k + 4));
    auto wts = fd_weights(y[0], y.first(n), k);
    double d = 0.0;
    for (std::size_t q = 0; q < n; ++q) d += wts[q] * f[q];
    return d;
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> boundary_reduction_1_sides(const UnsteadyState& state) {
    const Grid2D& g = state.u.grid();
    if (g.ny() < 8) throw UsageError("boundary reduction: at least 8 y nodes are needed");
    const auto y = g.y_nodes();
    const int nx = g.nx();
    std::vector<double> w0(nx), lhs(nx), rhs(nx);
    for (int i = 0; i < nx; ++i) w0[i] = wall_diff(y, state.u.column(i), 1);
    // ∂ₓw at the wall, spectrally from the wall row.
    ScalarField row(Grid2D::from_nodes(nx, {0.0, 1.0, 2.0, 3.0}));
    for (int i = 0; i < nx; ++i) row(i, 0) = w0[i];
    const ScalarField wx = ddx(row, 1);
    for (int i = 0; i < nx; ++i) {
        const auto u = state.u.column(i);
        const auto rho = state.rho.column(i);
        const double r0 = rho[0];
        const double ry = wall_diff(y, rho, 1);
        const double w2 = wall_diff(y, u, 3);
        lhs[i] = wall_diff(y, u, 4);
        rhs[i] = r0 * w0[i] * wx(i, 0) + 2.0 * ry / r0 * w2;
    }
    return {lhs, rhs};
}

GoodUnknownResidual verify_boundary_reduction_1(const UnsteadyState& state) {
    auto [lhs, rhs] = boundary_reduction_1_sides(state);
    double sup = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) sup = std::max(sup, std::abs(lhs[i] - rhs[i]));
    GoodUnknownResidual r;
    r.which = ResidualKind::boundary_reduction_1;
    r.residual_norm = sup;
    r.grid_h = state.u.grid().max_dy();
    return r;
}

}  // namespace prandtl
