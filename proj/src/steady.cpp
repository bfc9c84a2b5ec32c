#include "prandtl/steady.hpp"

// pchip.hpp in Boost 1.74 calls isnan unqualified.
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "prandtl/errors.hpp"
#include "prandtl/operators.hpp"

namespace prandtl {

namespace {

std::shared_ptr<const Grid2D> profile_grid(std::span<const double> y) {
    return Grid2D::from_nodes(4, std::vector<double>(y.begin(), y.end()));
}

double l2_profile(const Grid2D& g, std::span<const double> f) {
    std::vector<double> sq(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) sq[j] = f[j] * f[j];
    return std::sqrt(integrate_profile(g, sq));
}

// ‖f⟨y⟩^λ‖² for a profile.
double weighted_sq(const Grid2D& g, std::span<const double> f, double lambda) {
    std::vector<double> sq(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) sq[j] = f[j] * f[j] * std::pow(Grid2D::weight(g.y(j)), 2 * lambda);
    return integrate_profile(g, sq);
}

std::vector<double> lerp(std::span<const double> a, std::span<const double> b, double s) {
    std::vector<double> r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = (1 - s) * a[j] + s * b[j];
    return r;
}

// ∂_y q = (r₀ + f_r − ∂_y²u)/(ρ(a+θ)²), a = u^{k−1}, away from the wall.
std::vector<double> first_integral_dq(const Grid2D& g, std::span<const double> rho, std::span<const double> a,
                                      std::span<const double> u, std::span<const double> r0, double theta,
                                      const SteadySources& src, double x) {
    const auto d2 = ddy_profile(g, u, 2);
    const int n = g.ny();
    std::vector<double> dq(n);
    for (int j = 1; j < n; ++j) {
        const double b = rho[j] * (a[j] + theta) * (a[j] + theta);
        double num = r0[j] - d2[j];
        if (src.r) num += src.r(x, g.y(j));
        if (!(b >= 1e-12)) {
            std::ostringstream os;
            os << "picard_step: ρ(u+θ)² = " << b << " at x = " << x << ", y = " << g.y(j);
            throw DegeneracyError(os.str(), b);
        }
        dq[j] = num / b;
    }
    // The wall row carries u = 0; the relation there would divide stencil
    // noise in ∂_y²u(0) by ρθ². Linear extrapolation instead.
    const double t = (g.y(0) - g.y(1)) / (g.y(2) - g.y(1));
    dq[0] = dq[1] + t * (dq[2] - dq[1]);
    return dq;
}

double wall_slope(const Grid2D& g, std::span<const double> u) {
    const auto& s = g.d1(0);
    double acc = 0.0;
    for (int k = 0; k < s.count; ++k) acc += s.w[k] * u[s.first + k];
    return acc;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

std::vector<double> diff(std::span<const double> a, std::span<const double> b) {
    std::vector<double> r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] - b[j];
    return r;
}

void check_aligned(const SteadySlab& a, const SteadySlab& b, const char* who) {
    if (a.size() != b.size() || a.empty()) throw UsageError(std::string(who) + ": slabs are not aligned");
    for (std::size_t n = 0; n < a.size(); ++n)
        if (a[n].x != b[n].x || a[n].u.size() != b[n].u.size())
            throw UsageError(std::string(who) + ": slabs are not aligned");
}

}  // namespace

std::vector<double> build_dq0(std::span<const double> y, std::span<const double> rho0, std::span<const double> u0) {
    const std::size_t n = y.size();
    if (rho0.size() != n || u0.size() != n) throw UsageError("build_q0: array length mismatch");
    auto grid = profile_grid(y);
    const auto d2 = ddy_profile(*grid, u0, 2);
    std::vector<double> integrand(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        const double den = rho0[j] * u0[j] * u0[j];
        if (!(den > 0.0)) throw DataError("build_q0: ρ₀u₀² must be positive away from the wall");
        integrand[j] = d2[j] / den;
    }
    // A compatible profile has y·I(y) → 0 at the wall; ∂_y³u₀(0) ≠ 0 gives
    // y·I(y) → const ≠ 0 and a logarithmically divergent q₀.
    const double a1 = std::abs(y[1] * integrand[1]);
    const double a2 = std::abs(y[2] * integrand[2]);
    if (a1 > 1e-8 && a1 > 0.75 * a2)
        throw DataError("build_q0: ∂_y²u₀/(ρ₀u₀²) diverges at the wall (compatibility violated)");
    for (double& v : integrand) v = -v;
    return integrand;
}

std::vector<double> build_q0(std::span<const double> y, std::span<const double> rho0, std::span<const double> u0) {
    const auto dq = build_dq0(y, rho0, u0);
    return cumulative_trapezoid(y, dq);
}

void validate_steady_params(const SteadyParams& p) {
    if (p.m < 3) throw ConfigError("steady: m ≥ 3 violated");
    if (!(p.sigma_tilde >= 2.0)) throw ConfigError("steady: sigma_tilde ≥ 2 violated");
    if (!(p.dx > 0.0)) throw ConfigError("steady: dx must be positive");
    if (!(p.L >= 0.0)) throw ConfigError("steady: L must be non-negative");
    if (!(p.picard_tol > 0.0)) throw ConfigError("steady: picard_tol must be positive");
    if (p.picard_max_iters < 1) throw ConfigError("steady: picard_max_iters must be at least 1");
    if (p.theta_schedule.empty()) throw ConfigError("steady: empty theta_schedule");
    for (std::size_t k = 0; k < p.theta_schedule.size(); ++k) {
        if (!(p.theta_schedule[k] >= 0.0)) throw ConfigError("steady: theta_schedule entries must be ≥ 0");
        if (k > 0 && !(p.theta_schedule[k] < p.theta_schedule[k - 1]))
            throw ConfigError("steady: theta_schedule must be strictly decreasing");
    }
    if (!(p.theta >= 0.0)) throw ConfigError("steady: theta must be ≥ 0");
}

std::vector<double> SteadyData::r0(double theta) const {
    std::vector<double> r(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) r[j] = rho0[j] * (2 * u0[j] * theta + theta * theta) * dq0[j];
    return r;
}

SteadyData prepare_steady_data(std::span<const double> y, std::span<const double> rho0, std::span<const double> u0,
                               const SteadyParams& p) {
    const std::size_t n = y.size();
    if (rho0.size() != n || u0.size() != n) throw UsageError("steady data: array length mismatch");
    if (n < 5) throw UsageError("steady data: need at least 5 nodes");
    SteadyData d;
    d.grid = profile_grid(y);
    d.y.assign(y.begin(), y.end());
    d.rho0.assign(rho0.begin(), rho0.end());
    d.u0.assign(u0.begin(), u0.end());
    d.rho_inf = rho0.back();
    d.u_inf = u0.back();
    const double umax = *std::max_element(u0.begin(), u0.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    });
    if (std::abs(u0[0]) > 1e-14 * std::max(1.0, std::abs(umax))) throw DataError("steady data: u₀(0) ≠ 0");
    for (std::size_t j = 1; j < n; ++j)
        if (!(u0[j] > 0.0)) throw DataError("steady data: u₀ must be positive for y > 0");
    const double slope = wall_slope(*d.grid, u0);
    if (!(slope > 0.0)) throw DataError("steady data: u₀′(0) must be positive");

    d.kappa3 = p.kappa3 > 0.0 ? p.kappa3 : 0.5 * *std::min_element(rho0.begin(), rho0.end());
    for (double r : rho0)
        if (!(r >= d.kappa3)) throw DataError("steady data: ρ₀ ≥ κ₃ violated");
    d.lambda0 = p.lambda0 > 0.0 ? p.lambda0 : 0.25 * slope;
    if (p.delta_nb > 0.0) {
        d.delta_nb = p.delta_nb;
    } else {
        constexpr double delta0 = 1.0;
        double last = 0.0;
        for (std::size_t j = 1; j < n && y[j] <= delta0; ++j) {
            if (u0[j] < 2 * d.lambda0 * y[j] * (1 - 1e-12)) break;
            last = y[j];
        }
        if (!(last > 0.0)) throw DataError("steady data: u₀ ≥ 2λ₀y fails at the first node");
        d.delta_nb = last;
    }
    if (p.xi0 > 0.0) {
        d.xi0 = p.xi0;
    } else {
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (y[j] >= 0.5 * d.delta_nb) mn = std::min(mn, u0[j]);
        d.xi0 = 0.5 * mn;
    }
    d.dq0 = build_dq0(y, rho0, u0);
    d.q0 = cumulative_trapezoid(y, d.dq0);
    return d;
}

std::vector<double> advect_density(std::span<const double> y, std::span<const double> rho_prev,
                                   std::span<const double> q, double dx) {
    const std::size_t n = y.size();
    if (rho_prev.size() != n || q.size() != n) throw UsageError("advect_density: array length mismatch");
    if (n < 4) throw UsageError("advect_density: need at least 4 nodes");
    const auto [lo_it, hi_it] = std::minmax_element(rho_prev.begin(), rho_prev.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(n);
    if (lo == hi) {
        std::fill(out.begin(), out.end(), lo);
        return out;
    }
    using boost::math::interpolators::pchip;
    pchip<std::vector<double>> interp(std::vector<double>(y.begin(), y.end()),
                                      std::vector<double>(rho_prev.begin(), rho_prev.end()));
    const double cell = y[1] - y[0];
    for (std::size_t j = 0; j < n; ++j) {
        double foot = y[j] - dx * q[j];
        if (foot < 0.0) {
            if (foot < -cell) {
                std::ostringstream os;
                os << "advect_density: characteristic foot " << foot << " below the wall at y = " << y[j];
                throw StepError(os.str(), cell / std::max(std::abs(q[j]), 1e-300));
            }
            foot = 0.0;
        }
        foot = std::min(foot, y.back());
        out[j] = std::clamp(interp(foot), lo, hi);
    }
    return out;
}

SteadySlab initial_slab(const SteadyData& data, const SteadyParams& p) {
    validate_steady_params(p);
    const int N = p.L > 0.0 ? static_cast<int>(std::ceil(p.L / p.dx - 1e-9)) : 0;
    SteadySlab slab(N + 1);
    for (int k = 0; k <= N; ++k) {
        slab[k].x = N > 0 ? p.L * k / N : 0.0;
        slab[k].rho = data.rho0;
        slab[k].u = data.u0;
        slab[k].q = data.q0;
        slab[k].dq = data.dq0;
    }
    return slab;
}

SteadySlab picard_step(const SteadySlab& prev, const SteadyData& data, const SteadyParams& p, double theta) {
    if (prev.empty()) throw UsageError("picard_step: empty slab");
    if (!(theta >= 0.0)) throw ConfigError("picard_step: theta must be ≥ 0");
    const Grid2D& g = *data.grid;
    const int ny = g.ny();
    const auto r0 = data.r0(theta);
    const SteadySources& src = p.sources;

    // h_j² for the parabolic limit.
    std::vector<double> h2(ny, 0.0);
    for (int j = 1; j + 1 < ny; ++j) {
        const double h = std::min(g.y(j) - g.y(j - 1), g.y(j + 1) - g.y(j));
        h2[j] = h * h;
    }

    SteadySlab out(prev.size());
    out[0].x = prev[0].x;
    out[0].rho = data.rho0;
    out[0].u = data.u0;
    out[0].dq = first_integral_dq(g, data.rho0, prev[0].u, data.u0, r0, theta, src, prev[0].x);
    out[0].q = cumulative_trapezoid(g.y_nodes(), out[0].dq);

    // ∂ₓu = −(a_y q + a ∂_y q) + f_u at the interior nodes.
    auto rhs = [&](double x, std::span<const double> u, std::span<const double> rho, std::span<const double> a,
                   std::span<const double> ay, std::vector<double>& dq) {
        dq = first_integral_dq(g, rho, a, u, r0, theta, src, x);
        const auto q = cumulative_trapezoid(g.y_nodes(), dq);
        std::vector<double> du(ny, 0.0);
        for (int j = 1; j + 1 < ny; ++j) {
            du[j] = -(ay[j] * q[j] + a[j] * dq[j]);
            if (src.u) du[j] += src.u(x, g.y(j));
        }
        return du;
    };

    std::vector<double> dq;
    for (std::size_t n = 0; n + 1 < prev.size(); ++n) {
        const double x0 = prev[n].x, x1 = prev[n + 1].x, dx = x1 - x0;
        SteadyState& next = out[n + 1];
        next.x = x1;

        const auto qmid = lerp(prev[n].q, prev[n + 1].q, 0.5);
        try {
            next.rho = advect_density(g.y_nodes(), out[n].rho, qmid, dx);
        } catch (const StepError& e) {
            throw StepError(std::string(e.what()) + " (step from x = " + std::to_string(x0) + ")", e.suggested_dt(), x0);
        }
        if (src.rho)
            for (int j = 0; j < ny; ++j) {
                const double foot = std::clamp(g.y(j) - dx * qmid[j], 0.0, g.y_max());
                next.rho[j] += dx * src.rho(x0 + 0.5 * dx, 0.5 * (g.y(j) + foot));
            }

        const auto& a0 = prev[n].u;
        const auto& a1 = prev[n + 1].u;
        const auto ay0 = ddy_profile(g, a0, 1);
        const auto ay1 = ddy_profile(g, a1, 1);

        double dmax = 0.0;
        for (const auto* st : {&out[n], &next})
            for (const auto* a : {&a0, &a1})
                for (int j = 1; j + 1 < ny; ++j) {
                    const double aj = std::max((*a)[j], 0.0);
                    const double d = aj / (st->rho[j] * (aj + theta) * (aj + theta) * h2[j]);
                    dmax = std::max(dmax, d);
                }
        const int sub = std::max(1, static_cast<int>(std::ceil(dx * dmax / 0.4)));
        const double hstep = dx / sub;

        std::vector<double> u = out[n].u;
        for (int s = 0; s < sub; ++s) {
            const double sa = static_cast<double>(s) / sub, sb = static_cast<double>(s + 1) / sub;
            const double xa = x0 + sa * dx, xb = x0 + sb * dx;
            const auto rho_a = lerp(out[n].rho, next.rho, sa), rho_b = lerp(out[n].rho, next.rho, sb);
            const auto aa = lerp(a0, a1, sa), ab = lerp(a0, a1, sb);
            const auto aya = lerp(ay0, ay1, sa), ayb = lerp(ay0, ay1, sb);
            const auto k1 = rhs(xa, u, rho_a, aa, aya, dq);
            std::vector<double> us(ny);
            for (int j = 0; j < ny; ++j) us[j] = u[j] + hstep * k1[j];
            const auto k2 = rhs(xb, us, rho_b, ab, ayb, dq);
            for (int j = 0; j < ny; ++j) u[j] += 0.5 * hstep * (k1[j] + k2[j]);
            u[0] = 0.0;
            u[ny - 1] = data.u_inf;
        }
        for (double v : u)
            if (!std::isfinite(v)) throw NumericalOverflow("picard_step: non-finite u");
        next.u = std::move(u);
        next.dq = first_integral_dq(g, next.rho, a1, next.u, r0, theta, src, x1);
        next.q = cumulative_trapezoid(g.y_nodes(), next.dq);

        const double slope = wall_slope(g, next.u);
        if (slope < data.lambda0) {
            std::ostringstream os;
            os << "wall slope d_y u(x,0) = " << slope << " fell below lambda0 = " << data.lambda0 << " at x = " << x1;
            throw LifeSpanExceeded(os.str(), x1);
        }
    }
    return out;
}


std::vector<double> r0_residuals(std::span<const double> y, const SteadySlab& slab, const SteadySlab& prev,
                                 std::span<const double> r0, double theta, R0Stencil stencil) {
    check_aligned(slab, prev, "check_r0");
    const auto g = profile_grid(y);
    const int ny = g->ny();
    if (static_cast<int>(r0.size()) != ny || static_cast<int>(slab[0].u.size()) != ny)
        throw UsageError("check_r0: node count mismatch");
    // Five-point weights, shifted one-sided near the ends.
    std::vector<std::vector<double>> w5;
    std::vector<int> first5;
    if (stencil == R0Stencil::independent) {
        if (ny < 5) throw UsageError("check_r0: need at least 5 nodes");
        for (int j = 0; j < ny; ++j) {
            const int f = std::clamp(j - 2, 0, ny - 5);
            first5.push_back(f);
            w5.push_back(fd_weights(y[j], y.subspan(f, 5), 2));
        }
    }
    std::vector<double> out(slab.size());
    std::vector<double> res(ny);
    for (std::size_t n = 0; n < slab.size(); ++n) {
        const auto& s = slab[n];
        std::vector<double> d2;
        if (stencil == R0Stencil::march) {
            d2 = ddy_profile(*g, s.u, 2);
        } else {
            d2.assign(ny, 0.0);
            for (int j = 0; j < ny; ++j)
                for (int k = 0; k < 5; ++k) d2[j] += w5[j][k] * s.u[first5[j] + k];
        }
        // The wall row is a boundary row (u = 0), not a first-integral row.
        res[0] = 0.0;
        for (int j = 1; j < ny; ++j) {
            const double a = prev[n].u[j] + theta;
            res[j] = s.rho[j] * a * a * s.dq[j] + d2[j] - r0[j];
        }
        out[n] = l2_profile(*g, res);
    }
    return out;
}

double check_r0(std::span<const double> y, const SteadySlab& slab, const SteadySlab& prev,
                std::span<const double> r0, double theta, R0Stencil stencil) {
    const auto r = r0_residuals(y, slab, prev, r0, theta, stencil);
    return *std::max_element(r.begin(), r.end());
}

double d2_error_estimate(std::span<const double> y, std::span<const double> u) {
    const auto g = profile_grid(y);
    const int ny = g->ny();
    if (static_cast<int>(u.size()) != ny) throw UsageError("d2_error_estimate: node count mismatch");
    const auto d2 = ddy_profile(*g, u, 2);
    double acc = 0.0;
    for (int j = 2; j + 2 < ny; ++j) {
        const double nodes[3] = {y[j - 2], y[j], y[j + 2]};
        const auto w = fd_weights(y[j], nodes, 2);
        const double coarse = w[0] * u[j - 2] + w[1] * u[j] + w[2] * u[j + 2];
        const double e = d2[j] - coarse;
        acc += 0.5 * (y[j + 1] - y[j - 1]) * e * e;
    }
    return std::sqrt(acc);
}

std::vector<double> differential_form_residual(std::span<const double> y, const SteadySlab& slab,
                                               const SteadySlab& prev, double theta) {
    check_aligned(slab, prev, "differential_form_residual");
    const auto g = profile_grid(y);
    const int ny = g->ny();
    const std::size_t N = slab.size();
    std::vector<std::vector<double>> phi(N, std::vector<double>(ny));
    for (std::size_t n = 0; n < N; ++n)
        for (int j = 0; j < ny; ++j) {
            const double a = prev[n].u[j] + theta;
            phi[n][j] = slab[n].rho[j] * a * a * slab[n].dq[j];
        }
    std::vector<double> out(N, 0.0);
    std::vector<double> aq(ny), res(ny);
    for (std::size_t n = 1; n + 1 < N; ++n) {
        for (int j = 0; j < ny; ++j) aq[j] = prev[n].u[j] * slab[n].q[j];
        const auto d3 = ddy_profile(*g, aq, 3);
        const double h = slab[n + 1].x - slab[n - 1].x;
        for (int j = 0; j < ny; ++j) res[j] = (phi[n + 1][j] - phi[n - 1][j]) / h - d3[j];
        out[n] = l2_profile(*g, res);
    }
    return out;
}

XYValues energy_XY(std::span<const double> y, std::span<const SteadyState> window, const SteadyParams& p,
                   std::size_t at) {
    const int m = p.m;
    if (window.size() < static_cast<std::size_t>(m + 1))
        throw UsageError("energy_XY: the window needs m + 1 stations");
    if (at == SIZE_MAX) at = window.size() - 1;
    if (at >= window.size()) throw UsageError("energy_XY: station index outside the window");
    const auto g = profile_grid(y);
    const int ny = g->ny();
    std::vector<double> xs;
    for (const auto& s : window) xs.push_back(s.x);

    const double rho_inf = window[0].rho.back();
    const double u_inf = window[0].u.back();
    const auto& here = window[at];

    // ∂ₓ^a of a station field over the window.
    auto dxk = [&](int a, auto member) {
        std::vector<double> r(ny, 0.0);
        if (a == 0) {
            const auto& f = here.*member;
            r.assign(f.begin(), f.end());
            return r;
        }
        const auto w = fd_weights(here.x, xs, a);
        for (std::size_t k = 0; k < window.size(); ++k) {
            const auto& f = window[k].*member;
            for (int j = 0; j < ny; ++j) r[j] += w[k] * f[j];
        }
        return r;
    };

    XYValues v;
    std::vector<double> f(ny);
    for (int a1 = 0; a1 <= m; ++a1) {
        auto rho_x = dxk(a1, &SteadyState::rho);
        if (a1 == 0)
            for (double& r : rho_x) r -= rho_inf;
        const auto dq_x = dxk(a1, &SteadyState::dq);
        for (int a2 = 0; a1 + a2 <= m; ++a2) {
            v.X += weighted_sq(*g, ddy_profile(*g, rho_x, a2), 0.0);
            const auto dqd = ddy_profile(*g, dq_x, a2);
            for (int j = 0; j < ny; ++j) f[j] = std::sqrt(here.rho[j]) * here.u[j] * dqd[j];
            v.X += weighted_sq(*g, f, p.sigma_tilde);
            const auto dqd1 = ddy_profile(*g, dq_x, a2 + 1);
            for (int j = 0; j < ny; ++j) f[j] = std::sqrt(std::max(here.u[j], 0.0)) * dqd1[j];
            v.Y += weighted_sq(*g, f, p.sigma_tilde);
        }
    }
    std::vector<double> ub(ny);
    for (int j = 0; j < ny; ++j) ub[j] = here.u[j] - u_inf;
    v.X += weighted_sq(*g, ub, 0.0) + weighted_sq(*g, ddy_profile(*g, ub, 1), 0.0);
    return v;
}

std::vector<SteadyMonitorRow> steady_monitors(const SteadySlab& slab, const SteadyData& d) {
    const Grid2D& g = *d.grid;
    std::vector<SteadyMonitorRow> rows;
    for (const auto& s : slab) {
        SteadyMonitorRow r;
        r.x = s.x;
        r.dyu_wall = wall_slope(g, s.u);
        r.wall_ok = r.dyu_wall >= 2 * d.lambda0;
        r.rho_ok = *std::min_element(s.rho.begin(), s.rho.end()) >= d.kappa3;
        r.near_ok = r.far_ok = true;
        for (int j = 0; j < g.ny(); ++j) {
            const double yj = g.y(j);
            if (yj <= d.delta_nb && s.u[j] < d.lambda0 * yj) r.near_ok = false;
            if (yj >= 0.5 * d.delta_nb && s.u[j] < d.xi0) r.far_ok = false;
        }
        rows.push_back(r);
    }
    return rows;
}

double detect_life_span(std::span<const SteadyMonitorRow> rows) {
    double la = -1.0;
    for (const auto& r : rows) {
        if (!r.all()) break;
        la = r.x;
    }
    return la;
}

namespace {

// φ(x) per station between iterates next = k+1 and cur = k; du_prev is û^k.
std::vector<double> phi_profile(const Grid2D& g, const SteadySlab& next, const SteadySlab& cur,
                                const std::vector<std::vector<double>>& du_prev, double theta, double sigma_tilde) {
    const int ny = g.ny();
    std::vector<double> out(next.size());
    std::vector<double> f(ny);
    for (std::size_t n = 0; n < next.size(); ++n) {
        const auto du = diff(next[n].u, cur[n].u);
        const auto ddu = ddy_profile(g, du, 1);
        double acc = 0.0;
        for (int j = 0; j < ny; ++j) {
            const double a = cur[n].u[j] + theta;
            const double dqh = next[n].dq[j] - cur[n].dq[j];
            const double rh = next[n].rho[j] - cur[n].rho[j];
            const double dp = du_prev.empty() ? 0.0 : du_prev[n][j];
            f[j] = next[n].rho[j] * a * a * dqh * dqh * std::pow(Grid2D::weight(g.y(j)), 2 * sigma_tilde) + rh * rh +
                   du[j] * du[j] + ddu[j] * ddu[j] + dp * dp;
        }
        acc = integrate_profile(g, f);
        out[n] = acc;
    }
    return out;
}

double slab_sup_diff(const SteadySlab& a, const SteadySlab& b) {
    double m = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n)
        m = std::max({m, max_abs_diff(a[n].rho, b[n].rho), max_abs_diff(a[n].u, b[n].u),
                      max_abs_diff(a[n].q, b[n].q)});
    return m;
}

double slab_distance(const SteadySlab& a, const SteadySlab& b) {
    double m = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n)
        for (std::size_t j = 0; j < a[n].u.size(); ++j)
            m = std::max(m, std::abs(a[n].u[j] - b[n].u[j]) + std::abs(a[n].rho[j] - b[n].rho[j]));
    return m;
}

}  // namespace

SteadyRun run_steady(std::span<const double> y, std::span<const double> rho0, std::span<const double> u0,
                     const SteadyParams& params) {
    validate_steady_params(params);
    SteadyRun run;
    run.data = prepare_steady_data(y, rho0, u0, params);
    const SteadyData& d = run.data;
    const Grid2D& g = *d.grid;

    SteadySlab cur = initial_slab(d, params);
    SteadySlab before = cur;
    std::vector<double> phi_last(cur.size(), 0.0);
    SteadySlab last_converged;
    for (double theta : params.theta_schedule) {
        PicardDiagnostics diag;
        diag.theta = theta;
        diag.r0 = d.r0(theta);
        std::vector<std::vector<double>> du_prev;
        int rising = 0;
        for (int k = 1; k <= params.picard_max_iters; ++k) {
            SteadySlab next = picard_step(cur, d, params, theta);
            const auto phi = phi_profile(g, next, cur, du_prev, theta, params.sigma_tilde);
            diag.phi_series.push_back(*std::max_element(phi.begin(), phi.end()));
            diag.sup_diff.push_back(slab_sup_diff(next, cur));
            phi_last = phi;
            du_prev.assign(next.size(), {});
            for (std::size_t n = 0; n < next.size(); ++n) du_prev[n] = diff(next[n].u, cur[n].u);
            before = std::move(cur);
            cur = std::move(next);
            diag.k_done = k;

            const std::size_t c = diag.phi_series.size();
            if (c >= 2) {
                const double ratio = diag.phi_series[c - 1] / diag.phi_series[c - 2];
                rising = ratio >= 1.0 ? rising + 1 : 0;
            }
            if (diag.sup_diff.back() < params.picard_tol) {
                diag.converged = true;
                break;
            }
            if (rising >= 3) {
                std::ostringstream os;
                os << "Picard iteration does not contract at theta = " << theta << " (phi ratio >= 1 for 3 iterates)";
                throw IterationDivergence(os.str(), k);
            }
        }
        // Ratios φ^{k+1}/φ^k with k ≥ 2 sit at index ≥ 2 of phi_series.
        const auto& ps = diag.phi_series;
        const std::size_t start = ps.size() >= 3 ? 2 : 1;
        for (std::size_t i = start; i < ps.size(); ++i)
            if (ps[i - 1] > 0.0) diag.contraction_ratio = std::max(diag.contraction_ratio, ps[i] / ps[i - 1]);
        run.diagnostics.push_back(std::move(diag));
        if (!last_converged.empty()) run.theta_distances.push_back(slab_distance(last_converged, cur));
        last_converged = cur;
    }
    run.cauchy = true;
    for (std::size_t i = 1; i < run.theta_distances.size(); ++i)
        if (!(run.theta_distances[i] < run.theta_distances[i - 1])) run.cauchy = false;

    run.slab = cur;
    run.prev = before;
    run.monitors = steady_monitors(run.slab, d);
    run.L_a = detect_life_span(run.monitors);

    const double theta = params.theta_schedule.back();
    const auto r0 = d.r0(theta);
    const auto res = r0_residuals(y, run.slab, run.prev, r0, theta);
    // Short slabs are extended as x-independent so that every station has a
    // full window.
    SteadySlab padded = run.slab;
    const std::size_t need = static_cast<std::size_t>(params.m + 1);
    while (padded.size() < need) {
        SteadyState s = padded.back();
        s.x += params.dx;
        padded.push_back(std::move(s));
    }
    const std::size_t N = padded.size();
    for (std::size_t n = 0; n < run.slab.size(); ++n) {
        const std::size_t first = std::min(n >= need - 1 ? n - (need - 1) : 0, N - need);
        const auto xy = energy_XY(y, std::span<const SteadyState>(padded).subspan(first, need), params, n - first);
        SteadySeriesRow row;
        row.x = run.slab[n].x;
        row.X_total = xy.X;
        row.Y_total = xy.Y;
        row.dyu_wall = run.monitors[n].dyu_wall;
        row.r0_residual = res[n];
        row.phi_last = phi_last[n];
        run.series.push_back(row);
    }
    return run;
}

StabilityReport stability_check(const SteadySlab& a, const SteadySlab& b, std::span<const double> y,
                                double sigma_tilde) {
    check_aligned(a, b, "stability_check");
    const auto g = profile_grid(y);
    const int ny = g->ny();
    if (static_cast<int>(a[0].u.size()) != ny) throw UsageError("stability_check: node count mismatch");
    StabilityReport r;
    r.identical = true;
    for (std::size_t n = 0; n < a.size() && r.identical; ++n)
        r.identical = a[n].rho == b[n].rho && a[n].u == b[n].u && a[n].q == b[n].q && a[n].dq == b[n].dq;

    std::vector<double> qt(ny), f(ny);
    for (std::size_t n = 0; n < a.size(); ++n) {
        qt[0] = 0.0;
        for (int j = 1; j < ny; ++j) qt[j] = (a[n].u[j] * a[n].q[j] - b[n].u[j] * b[n].q[j]) / b[n].u[j];
        const auto dqt = ddy_profile(*g, qt, 1);
        for (int j = 0; j < ny; ++j) f[j] = std::sqrt(a[n].rho[j]) * b[n].u[j] * dqt[j];
        const auto dr = diff(a[n].rho, b[n].rho);
        r.functional.push_back(weighted_sq(*g, f, sigma_tilde) + weighted_sq(*g, dr, 0.0));
    }
    r.sup_functional = *std::max_element(r.functional.begin(), r.functional.end());
    if (r.identical) {
        r.envelope_ok = true;
        return r;
    }
    const auto& F = r.functional;
    bool finite = true;
    for (double v : F) finite = finite && std::isfinite(v);
    double integral = 0.0, C = 0.0;
    for (std::size_t n = 1; n < F.size(); ++n) {
        integral += 0.5 * (a[n].x - a[n - 1].x) * (F[n] + F[n - 1]);
        if (integral > 0.0) C = std::max(C, (F[n] - F[0]) / integral);
    }
    r.fitted_growth = C;
    bool ok = finite && F[0] > 0.0;
    for (std::size_t n = 0; n < F.size() && ok; ++n)
        ok = F[n] <= F[0] * std::exp(C * (a[n].x - a[0].x)) * (1 + 1e-9);
    r.envelope_ok = ok;
    return r;
}

}  // namespace prandtl
