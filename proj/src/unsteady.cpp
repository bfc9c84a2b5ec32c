#include "prandtl/unsteady.hpp"

// pchip.hpp in Boost 1.74 calls isnan unqualified.
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "prandtl/errors.hpp"
#include "prandtl/operators.hpp"

namespace prandtl {

UnsteadyState init_unsteady(const ScalarField& rho0, const ScalarField& u0, const UnsteadyParams& params) {
    if (!(params.dt > 0.0)) throw ConfigError("unsteady: dt must be positive");
    if (!(params.eps >= 0.0)) throw ConfigError("unsteady: eps must be non-negative");
    if (!(params.rho_inf > 0.0) || !(params.u_inf > 0.0)) throw ConfigError("unsteady: rho_inf and u_inf must be positive");
    if (rho0.grid_ptr() != u0.grid_ptr() && rho0.values().size() != u0.values().size())
        throw DataError("unsteady: rho0 and u0 live on different grids");
    if (!rho0.all_finite() || !u0.all_finite()) throw DataError("unsteady: initial data not finite");
    if (!(rho0.min() > 0.0)) {
        std::ostringstream os;
        os << "unsteady: density must be positive (min rho0 = " << rho0.min() << ")";
        throw DataError(os.str());
    }
    const int top = u0.ny() - 1;
    for (int i = 0; i < u0.nx(); ++i) {
        if (u0(i, 0) != 0.0) {
            std::ostringstream os;
            os << "unsteady: no-slip violated, u0(x, 0) = " << u0(i, 0);
            throw DataError(os.str());
        }
        if (std::abs(u0(i, top) - params.u_inf) > params.far_field_tol)
            throw DataError("unsteady: u0 does not reach u_inf at y_max");
        if (std::abs(rho0(i, top) - params.rho_inf) > params.far_field_tol)
            throw DataError("unsteady: rho0 does not reach rho_inf at y_max");
    }
    UnsteadyState s;
    s.t = 0.0;
    s.rho = rho0;
    s.u = u0;
    s.v = recover_v(u0);
    s.w = ddy(u0, 1);
    return s;
}

ScalarField recover_v(const ScalarField& u) {
    ScalarField ux = ddx(u, 1);
    ScalarField v(u.grid_ptr());
    const auto y = u.grid().y_nodes();
    for (int i = 0; i < u.nx(); ++i) {
        auto c = ux.column(i);
        auto out = v.column(i);
        out[0] = 0.0;
        for (int j = 1; j < u.ny(); ++j) out[j] = out[j - 1] - 0.5 * (y[j] - y[j - 1]) * (c[j] + c[j - 1]);
    }
    return v;
}

double cfl_number(const UnsteadyState& s, double dt) {
    return s.u.max_abs() * dt / s.u.grid().dx() + s.v.max_abs() * dt / s.u.grid().min_dy();
}

namespace {

struct ColumnWork {
    std::vector<double> a, b, c, inv;
};

// Solves (I − k·(1/ρ)∂_y²)x = r in place on one column, with Dirichlet rows
// at both ends.
bool implicit_solve(const Grid2D& g, std::span<const double> rho, double k, std::span<double> r, ColumnWork& ws) {
    const int n = g.ny();
    ws.a.assign(n, 0.0);
    ws.b.assign(n, 1.0);
    ws.c.assign(n, 0.0);
    for (int j = 1; j < n - 1; ++j) {
        const auto& s = g.d2(j);
        const double kj = k / rho[j];
        ws.a[j] = -kj * s.w[0];
        ws.b[j] = 1.0 - kj * s.w[1];
        ws.c[j] = -kj * s.w[2];
    }
    return solve_tridiagonal(ws.a, ws.b, ws.c, r);
}

void diffuse_tangential(ScalarField& rho, ScalarField& u, double tau, double eps) {
    if (eps > 0.0) {
        rho = fourier_heat(rho, eps, tau);
        u = fourier_heat(u, eps, tau);
    }
}

ScalarField ddy_blend(const ScalarField& f, const ScalarField& v, double blend) {
    ScalarField d = ddy(f, 1);
    if (blend == 0.0) return d;
    const auto& g = f.grid();
    for (int i = 0; i < g.nx(); ++i) {
        const auto fc = f.column(i);
        const auto vc = v.column(i);
        auto dc = d.column(i);
        for (int j = 1; j < g.ny() - 1; ++j) {
            const double up = vc[j] >= 0.0 ? (fc[j] - fc[j - 1]) / (g.y(j) - g.y(j - 1))
                                           : (fc[j + 1] - fc[j]) / (g.y(j + 1) - g.y(j));
            dc[j] = (1.0 - blend) * dc[j] + blend * up;
        }
    }
    return d;
}

void add_forcing(ScalarField& out, const std::function<double(double, double, double)>& f, double t) {
    if (!f) return;
    const auto& g = out.grid();
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) out(i, j) += f(t, g.x(i), g.y(j));
}

void advection_rhs(const ScalarField& rho, const ScalarField& u, const UnsteadyParams& p, double t, ScalarField& drho,
                   ScalarField& du) {
    const ScalarField v = recover_v(u);
    drho = -(u * ddx(rho, 1) + v * ddy_blend(rho, v, p.upwind_blend));
    du = -(u * ddx(u, 1) + v * ddy_blend(u, v, p.upwind_blend));
    add_forcing(drho, p.forcing.rho, t);
}

void apply_bc(ScalarField& rho, ScalarField& u, const UnsteadyParams& p) {
    const int top = u.ny() - 1;
    for (int i = 0; i < u.nx(); ++i) {
        u(i, 0) = 0.0;
        u(i, top) = p.u_inf;
        rho(i, top) = p.rho_inf;
    }
}

// IMEX-SSP3(4,3,3) of Pareschi and Russo: SSP-RK3 on the advection and the
// forcing, an L-stable SDIRK on (1/ρ)∂_y²u. With explicit = false only the
// implicit part is taken.
void imex_step(ScalarField& rho, ScalarField& u, const UnsteadyParams& p, double t, bool explicit_part) {
    constexpr double al = 0.24169426078821, be = 0.06042356519705, et = 0.12915286960590;
    constexpr double ae[4][4] = {{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 1, 0, 0}, {0, 0.25, 0.25, 0}};
    constexpr double ai[4][4] = {
        {al, 0, 0, 0}, {-al, al, 0, 0}, {0, 1 - al, al, 0}, {be, et, 0.5 - be - et - al, al}};
    constexpr double ce[4] = {0, 0, 1, 0.5};
    constexpr double bw[4] = {0, 1.0 / 6, 1.0 / 6, 2.0 / 3};
    const double dt = p.dt;
    const auto& g = u.grid();
    const int top = g.ny() - 1;

    std::array<ScalarField, 4> K, E, D;
    ColumnWork ws;
    for (int k = 0; k < 4; ++k) {
        ScalarField rk = rho, uk = u;
        for (int j = 0; j < k; ++j) {
            if (ai[k][j] != 0.0) uk += (dt * ai[k][j]) * K[j];
            if (explicit_part && ae[k][j] != 0.0) {
                uk += (dt * ae[k][j]) * E[j];
                rk += (dt * ae[k][j]) * D[j];
            }
        }
        apply_bc(rk, uk, p);
        const ScalarField rhs = uk;
        for (int i = 0; i < g.nx(); ++i)
            if (!implicit_solve(g, rk.column(i), dt * al, uk.column(i), ws))
                throw BlowUpError("unsteady: tridiagonal solve failed (density no longer positive)", t);
        K[k] = (1.0 / (dt * al)) * (uk - rhs);
        for (int i = 0; i < g.nx(); ++i) K[k](i, 0) = K[k](i, top) = 0.0;
        if (explicit_part && k > 0) {
            advection_rhs(rk, uk, p, t + ce[k] * dt, D[k], E[k]);
            add_forcing(E[k], p.forcing.u, t + ce[k] * dt);
        }
    }
    for (int k = 1; k < 4; ++k) {
        u += (dt * bw[k]) * K[k];
        if (explicit_part) {
            u += (dt * bw[k]) * E[k];
            rho += (dt * bw[k]) * D[k];
        }
    }
    apply_bc(rho, u, p);
}

}  // namespace

UnsteadyState step_unsteady(const UnsteadyState& state, const UnsteadyParams& p) {
    if (!(p.dt > 0.0)) throw ConfigError("unsteady: dt must be positive");
    const double cfl = cfl_number(state, p.dt);
    if (cfl > p.cfl_max) {
        const double suggested = 0.9 * p.dt * p.cfl_max / cfl;
        std::ostringstream os;
        os << "unsteady: CFL number " << cfl << " exceeds " << p.cfl_max << " at t = " << state.t
           << "; suggested dt = " << suggested;
        throw StepError(os.str(), suggested, state.t);
    }
    ScalarField rho = state.rho;
    ScalarField u = state.u;
    const double h = 0.5 * p.dt;
    diffuse_tangential(rho, u, h, p.eps);
    imex_step(rho, u, p, state.t, true);
    diffuse_tangential(rho, u, h, p.eps);
    apply_bc(rho, u, p);

    const double t_new = state.t + p.dt;
    if (!rho.all_finite() || !u.all_finite()) throw BlowUpError("unsteady: non-finite values", t_new);
    if (u.max_abs() > 1e6 || rho.max_abs() > 1e6) throw BlowUpError("unsteady: sup norm exceeded 1e6", t_new);
    if (rho.min() < 1e-8) throw BlowUpError("unsteady: density fell below 1e-8", t_new);

    UnsteadyState out;
    out.t = t_new;
    out.v = recover_v(u);
    out.w = ddy(u, 1);
    if (out.v.max_abs() > 1e6 || out.w.max_abs() > 1e6) throw BlowUpError("unsteady: sup norm exceeded 1e6", t_new);
    out.rho = std::move(rho);
    out.u = std::move(u);
    return out;
}

// ---------------------------------------------------------------------------

std::vector<double> heat_steps(double rho_const, std::vector<double> u, std::span<const double> y_nodes, double tau,
                               int steps) {
    if (!(rho_const > 0.0)) throw DomainError("heat: density must be positive");
    auto g = Grid2D::from_nodes(4, std::vector<double>(y_nodes.begin(), y_nodes.end()));
    UnsteadyParams p;
    p.dt = tau;
    p.rho_inf = rho_const;
    p.u_inf = u.back();
    ScalarField rho(g, rho_const);
    if (u.front() != 0.0) throw UsageError("heat: u must vanish at the wall");
    ScalarField f = ScalarField::from_profile(g, u);
    for (int s = 0; s < steps; ++s) imex_step(rho, f, p, 0.0, false);
    std::vector<double> out(f.column(0).begin(), f.column(0).end());
    if (!f.all_finite()) throw NumericalOverflow("heat: tridiagonal solve failed");
    return out;
}

namespace {

std::vector<double> refine_nodes(std::span<const double> y, int refine) {
    std::vector<double> out;
    out.reserve((y.size() - 1) * refine + 1);
    for (std::size_t j = 0; j + 1 < y.size(); ++j)
        for (int k = 0; k < refine; ++k) out.push_back(y[j] + (y[j + 1] - y[j]) * k / refine);
    out.push_back(y.back());
    return out;
}

std::vector<double> run_oracle(double rho_const, std::vector<double> u_fine, std::span<const double> y_nodes,
                               const std::vector<double>& y_fine, double t, const HeatOracleOptions& opt) {
    if (!(rho_const > 0.0)) throw DomainError("heat_oracle: density must be positive");
    if (opt.refine < 1 || opt.dt_divisor < 1 || !(opt.dt > 0.0)) throw UsageError("heat_oracle: invalid options");
    if (t > 0.0) {
        const double tau_target = opt.dt / opt.dt_divisor;
        const int steps = static_cast<int>(std::ceil(t / tau_target - 1e-9));
        u_fine = heat_steps(rho_const, std::move(u_fine), y_fine, t / steps, steps);
    }
    std::vector<double> out(y_nodes.size());
    for (std::size_t j = 0; j < y_nodes.size(); ++j) out[j] = u_fine[j * opt.refine];
    return out;
}

}  // namespace

std::vector<double> heat_oracle(double rho_const, const std::function<double(double)>& u0,
                                std::span<const double> y_nodes, double t, const HeatOracleOptions& opt) {
    const auto y_fine = refine_nodes(y_nodes, std::max(opt.refine, 1));
    std::vector<double> u_fine(y_fine.size());
    for (std::size_t j = 0; j < y_fine.size(); ++j) u_fine[j] = u0(y_fine[j]);
    return run_oracle(rho_const, std::move(u_fine), y_nodes, y_fine, t, opt);
}

std::vector<double> heat_oracle(double rho_const, std::span<const double> u0, std::span<const double> y_nodes,
                                double t, const HeatOracleOptions& opt) {
    if (u0.size() != y_nodes.size()) throw UsageError("heat_oracle: profile length mismatch");
    const auto y_fine = refine_nodes(y_nodes, std::max(opt.refine, 1));
    using boost::math::interpolators::pchip;
    pchip<std::vector<double>> interp(std::vector<double>(y_nodes.begin(), y_nodes.end()),
                                      std::vector<double>(u0.begin(), u0.end()));
    std::vector<double> u_fine(y_fine.size());
    for (std::size_t j = 0; j < y_fine.size(); ++j) u_fine[j] = interp(y_fine[j]);
    return run_oracle(rho_const, std::move(u_fine), y_nodes, y_fine, t, opt);
}

}  // namespace prandtl
