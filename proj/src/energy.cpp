#include "prandtl/energy.hpp"

#include <boost/math/special_functions/lambert_w.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "prandtl/errors.hpp"
#include "prandtl/good_unknowns.hpp"
#include "prandtl/operators.hpp"

namespace prandtl {

const char* to_string(RunStatus status) noexcept {
    switch (status) {
        case RunStatus::completed: return "completed";
        case RunStatus::life_span_exceeded: return "life_span_exceeded";
    }
    return "unknown";
}

namespace {

void check_s(int s) {
    if (s < 1 || s > 6) throw UsageError("energy: s_max must lie in [1, 6]");
}

ScalarField perturbation_rho(const UnsteadyState& st) {
    const double rho_inf = st.rho(0, st.rho.ny() - 1);
    return st.rho + (-rho_inf);
}

// Σ_{|α|≤s, α₁≤a1max} ‖∂_y^extra ∂^α f ⟨y⟩^{base+α₂}‖². Derivatives of w are
// taken as derivatives of u (extra = 1) with a single stencil each.
double derivative_sum(const ScalarField& f, int s, int a1max, double base, int extra = 0) {
    double sum = 0.0;
    for (int a1 = 0; a1 <= a1max; ++a1)
        for (int a2 = 0; a1 + a2 <= s; ++a2) sum += weighted_l2_squared(partial(f, a1, a2 + extra), base + a2);
    return sum;
}

std::optional<GoodUnknowns> good_unknowns_or_missing(const UnsteadyState& st, int s, double delta_bl, double sigma,
                                                     bool strict) {
    try {
        return compute_good_unknowns(st, s, delta_bl, sigma);
    } catch (const DegeneracyError&) {
        if (strict) throw;
        return std::nullopt;
    }
}

}  // namespace

MonitorBounds monitor_bounds(const UnsteadyState& st, double sigma) {
    MonitorBounds b;
    b.min_w_sigma = weighted(st.w, sigma).min();
    b.rho_min = st.rho.min();
    b.rho_max = st.rho.max();
    const Grid2D& g = st.w.grid();
    std::vector<ScalarField> d;
    std::vector<int> a2s;
    for (int a1 = 0; a1 <= 2; ++a1)
        for (int a2 = 0; a1 + a2 <= 2; ++a2) {
            d.push_back(partial(st.u, a1, a2 + 1));
            a2s.push_back(a2);
        }
    double sup = 0.0;
    b.wall_min_w = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.nx(); ++i) {
        b.wall_min_w = std::min(b.wall_min_w, st.w(i, 0));
        for (int j = 0; j < g.ny(); ++j) {
            const double wy = Grid2D::weight(g.y(j));
            double s = 0.0;
            for (std::size_t k = 0; k < d.size(); ++k) s += std::pow(wy, 2 * sigma + 2 * a2s[k]) * d[k](i, j) * d[k](i, j);
            sup = std::max(sup, s);
        }
    }
    b.E_linf = sup;
    return b;
}

EnergyReport energy_E(const UnsteadyState& st, const WeightParams& wp, int s, double delta_bl, bool strict) {
    check_s(s);
    EnergyReport r;
    r.t = st.t;
    const ScalarField vr = perturbation_rho(st);
    r.E_w = derivative_sum(st.u, s, s - 1, wp.gamma, 1);
    r.E_rho = derivative_sum(vr, s, s - 1, wp.sigma);
    const MonitorBounds b = monitor_bounds(st, wp.sigma);
    r.E_linf = b.E_linf;
    r.min_w_sigma = b.min_w_sigma;
    r.rho_min = b.rho_min;
    r.rho_max = b.rho_max;
    r.wall_min_w = b.wall_min_w;

    r.D_total = derivative_sum(st.u, s, s - 1, wp.gamma, 2);
    const auto gu = good_unknowns_or_missing(st, s, delta_bl, wp.sigma, strict);
    if (gu) {
        r.E_gu = weighted_l2_squared(gu->rho_g, wp.gamma) + weighted_l2_squared(gu->w_g, wp.gamma);
        r.D_total += weighted_l2_squared(ddy(gu->w_g, 1), wp.gamma);
        r.E_total = r.E_w + r.E_rho + r.E_gu + r.E_linf;
    } else {
        r.gu_missing = true;
        r.E_gu = std::numeric_limits<double>::quiet_NaN();
        r.E_total = r.E_w + r.E_rho + r.E_linf;
    }
    // α₁ = s row of the w sum.
    const double top = weighted_l2_squared(partial(st.u, s, 1), wp.gamma);
    r.E2 = r.E_w + top + r.E_rho + weighted_l2_squared(ddx(vr, s), wp.gamma) + r.E_linf;
    return r;
}

double dissipation_D(const UnsteadyState& st, const WeightParams& wp, int s, double delta_bl, bool strict) {
    check_s(s);
    double d = derivative_sum(st.u, s, s - 1, wp.gamma, 2);
    const auto gu = good_unknowns_or_missing(st, s, delta_bl, wp.sigma, strict);
    if (gu) d += weighted_l2_squared(ddy(gu->w_g, 1), wp.gamma);
    return d;
}

BoundsEnvelope check_principle_envelope(std::span<const EnergyReport> series, double lambda_est, double tol) {
    if (series.empty()) throw UsageError("envelope: empty series");
    for (std::size_t k = 1; k < series.size(); ++k)
        if (!(series[k].t > series[k - 1].t)) throw UsageError("envelope: times must increase");

    BoundsEnvelope env;
    const double t0 = series.front().t;
    double kappa = series.front().min_w_sigma;
    double lam = 0.0;
    for (const auto& r : series) {
        kappa = std::min(kappa, r.wall_min_w);
        env.kappa_series.push_back(kappa);
        const double t = r.t - t0;
        if (t <= 0.0 || kappa <= 0.0) continue;
        const double need = 1.0 - (r.min_w_sigma + tol) / kappa;  // λt e^{λt} ≥ need
        if (need > 0.0) lam = std::max(lam, boost::math::lambert_w0(need) / t);
    }
    env.lambda_fit = lam;
    const double T = series.back().t - t0;
    bool ok = env.kappa_series.back() > 0.0;
    if (lambda_est > 0.0) {
        for (std::size_t k = 0; k < series.size(); ++k) {
            const double t = series[k].t - t0;
            const double floor = (1.0 - lambda_est * t * std::exp(lambda_est * t)) * env.kappa_series[k];
            ok = ok && series[k].min_w_sigma >= floor - tol;
        }
    } else {
        ok = ok && lam * T * std::exp(lam * T) < 1.0;
    }
    env.passed = ok;

    // E_linf(t) ≤ (E_linf(0) + C t)e^{λt}.
    const double e0 = series.front().E_linf;
    if (series.size() >= 2 && e0 > 0.0) {
        double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
        const double n = static_cast<double>(series.size());
        for (const auto& r : series) {
            const double t = r.t - t0, l = std::log(std::max(r.E_linf, 1e-300));
            st += t;
            sl += l;
            stt += t * t;
            stl += t * l;
        }
        const double den = n * stt - st * st;
        env.linf_lambda = den > 0.0 ? std::max(0.0, (n * stl - st * sl) / den) : 0.0;
        for (const auto& r : series) {
            const double t = r.t - t0;
            if (t > 0.0) env.linf_C = std::max(env.linf_C, (r.E_linf * std::exp(-env.linf_lambda * t) - e0) / t);
        }
    }
    return env;
}

UnsteadyRun run_unsteady(const UnsteadyState& init, const UnsteadyParams& params, const MonitorConfig& mc) {
    if (!(params.t_final >= 0.0)) throw ConfigError("run_unsteady: t_final must be non-negative");
    if (!(params.dt > 0.0)) throw ConfigError("run_unsteady: dt must be positive");
    UnsteadyRun run;
    const int n = params.t_final > 0.0 ? static_cast<int>(std::ceil(params.t_final / params.dt - 1e-9)) : 0;
    UnsteadyParams p = params;
    if (n > 0) p.dt = params.t_final / n;

    auto in_bounds = [&](const EnergyReport& r, std::string& why) {
        if (!(r.min_w_sigma >= mc.delta_bl)) {
            why = "vorticity lower bound w<y>^sigma >= delta violated";
            return false;
        }
        if (!(r.rho_min >= mc.kappa1) || !(r.rho_max <= mc.kappa2)) {
            why = "density band kappa1 <= rho <= kappa2 violated";
            return false;
        }
        return true;
    };

    UnsteadyState s = init;
    run.snapshots.push_back(s);
    run.series.push_back(energy_E(s, mc.weights, mc.s_max, mc.delta_bl, mc.strict));
    const double e0 = run.series.front().E_total;
    bool energy_ok = true;
    std::string why;
    bool alive = in_bounds(run.series.front(), why);
    run.T0 = s.t;
    if (!alive) {
        run.status = RunStatus::life_span_exceeded;
        run.failure = why;
    }
    run.energy_interval = s.t;

    for (int k = 0; k < n && (alive || !mc.stop_on_failure); ++k) {
        s = step_unsteady(s, p);
        if (k == n - 1) s.t = params.t_final;
        run.series.push_back(energy_E(s, mc.weights, mc.s_max, mc.delta_bl, mc.strict));
        const EnergyReport& r = run.series.back();
        if (alive) {
            if (in_bounds(r, why)) {
                run.T0 = r.t;
            } else {
                alive = false;
                run.status = RunStatus::life_span_exceeded;
                run.failure = why;
            }
        }
        if (energy_ok) {
            if (r.E_total <= 2.0 * e0)
                run.energy_interval = r.t;
            else
                energy_ok = false;
        }
        if (mc.snapshot_every > 0 && (k + 1) % mc.snapshot_every == 0 && k != n - 1) run.snapshots.push_back(s);
    }
    if (n > 0) run.snapshots.push_back(s);
    return run;
}

}  // namespace prandtl
