#include <boost/math/differentiation/autodiff.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "prandtl/compat.hpp"
#include "prandtl/errors.hpp"
#include "prandtl/grid.hpp"
#include "prandtl/steady.hpp"

using namespace prandtl;

namespace {

// Wide C⁶ blend, ρ₀ = 1 + 0.5e^{−y}.
InitialData1D blend(int ny, double y_max = 15.0) {
    auto g = make_grid(4, ny, y_max);
    return build_u0_blend(0.5, 1.0, 1.0, 6, g->y_nodes(), 1.0, 0.5);
}

SteadyParams short_params(std::vector<double> schedule = {1e-1, 1e-2, 1e-3, 0.0}) {
    SteadyParams p;
    p.L = 0.1;
    p.dx = 0.01;
    p.theta_schedule = std::move(schedule);
    return p;
}

double sup_diff(const SteadySlab& a, const SteadySlab& b) {
    double m = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n)
        for (std::size_t j = 0; j < a[n].u.size(); ++j)
            m = std::max({m, std::abs(a[n].u[j] - b[n].u[j]), std::abs(a[n].rho[j] - b[n].rho[j]),
                          std::abs(a[n].q[j] - b[n].q[j])});
    return m;
}

// U = 1 − e^{−g}, g = y + y²/2 + y³/3 + y⁴/4; ∂_y³U(0) = 0.
template <class T>
T g_poly(const T& y) {
    return y + y * y / 2.0 + y * y * y / 3.0 + y * y * y * y / 4.0;
}
double U(double y) { return -std::expm1(-g_poly(y)); }
double U1(double y) { return (1 + y + y * y + y * y * y) * std::exp(-g_poly(y)); }
double U2(double y) {
    return -(4 * std::pow(y, 3) + 3 * std::pow(y, 4) + 2 * std::pow(y, 5) + std::pow(y, 6)) * std::exp(-g_poly(y));
}

// Manufactured steady solution at fixed θ:
//   u* = U + c x y²e^{−2y},  ρ* = 1 + 0.3e^{−y} + 0.2x y e^{−y},  q* = ½x y²e^{−y}
// with the sources the exact residuals of the three relations; r₀ is built
// from the exact ∂_y q₀ = −U″/(ρ₀U²).
struct SteadyMms {
    double theta = 0.1;
    double c = 0.5;

    double u(double x, double y) const { return U(y) + c * x * y * y * std::exp(-2 * y); }
    double uy(double x, double y) const { return U1(y) + c * x * (2 * y - 2 * y * y) * std::exp(-2 * y); }
    double uyy(double x, double y) const { return U2(y) + c * x * (2 - 8 * y + 4 * y * y) * std::exp(-2 * y); }
    double ux(double, double y) const { return c * y * y * std::exp(-2 * y); }
    double rho(double x, double y) const { return 1 + 0.3 * std::exp(-y) + 0.2 * x * y * std::exp(-y); }
    double rhox(double, double y) const { return 0.2 * y * std::exp(-y); }
    double rhoy(double x, double y) const { return (-0.3 + 0.2 * x * (1 - y)) * std::exp(-y); }
    double q(double x, double y) const { return 0.5 * x * y * y * std::exp(-y); }
    double qy(double x, double y) const { return 0.5 * x * (2 * y - y * y) * std::exp(-y); }
    double r0(double y) const {
        if (y == 0.0) return 0.0;
        const double u0 = U(y), rho0 = rho(0, y);
        return rho0 * (2 * u0 * theta + theta * theta) * (-U2(y) / (rho0 * u0 * u0));
    }

    SteadySources sources() const {
        SteadySources s;
        s.rho = [this](double x, double y) { return rhox(x, y) + q(x, y) * rhoy(x, y); };
        s.r = [this](double x, double y) {
            const double a = u(x, y) + theta;
            return rho(x, y) * a * a * qy(x, y) + uyy(x, y) - r0(y);
        };
        s.u = [this](double x, double y) { return ux(x, y) + uy(x, y) * q(x, y) + u(x, y) * qy(x, y); };
        return s;
    }
};

double mms_error(int ny, double dx) {
    SteadyMms ex;
    auto g = make_grid(4, ny, 15.0);
    const auto& y = g->y_nodes();
    std::vector<double> rho0, u0;
    for (double yj : y) {
        rho0.push_back(ex.rho(0, yj));
        u0.push_back(ex.u(0, yj));
    }
    auto p = short_params({ex.theta});
    p.dx = dx;
    p.picard_tol = 1e-12;
    p.sources = ex.sources();
    auto run = run_steady(y, rho0, u0, p);
    REQUIRE(run.diagnostics[0].converged);
    double err = 0.0;
    for (const auto& s : run.slab)
        for (std::size_t j = 0; j < y.size(); ++j)
            err = std::max({err, std::abs(s.u[j] - ex.u(s.x, y[j])), std::abs(s.rho[j] - ex.rho(s.x, y[j]))});
    return err;
}

}  // namespace

TEST_CASE("parameter validation") {
    SteadyParams p;
    CHECK_NOTHROW(validate_steady_params(p));
    auto bad = [](auto edit) {
        SteadyParams q;
        edit(q);
        return q;
    };
    CHECK_THROWS_AS(validate_steady_params(bad([](SteadyParams& q) { q.m = 2; })), ConfigError);
    CHECK_THROWS_AS(validate_steady_params(bad([](SteadyParams& q) { q.sigma_tilde = 1.5; })), ConfigError);
    CHECK_THROWS_AS(validate_steady_params(bad([](SteadyParams& q) { q.dx = 0.0; })), ConfigError);
    CHECK_THROWS_AS(validate_steady_params(bad([](SteadyParams& q) { q.L = -1.0; })), ConfigError);
    CHECK_THROWS_AS(validate_steady_params(bad([](SteadyParams& q) { q.picard_tol = 0.0; })), ConfigError);
    CHECK_THROWS_AS(validate_steady_params(bad([](SteadyParams& q) { q.picard_max_iters = 0; })), ConfigError);
    CHECK_THROWS_AS(validate_steady_params(bad([](SteadyParams& q) { q.theta_schedule = {}; })), ConfigError);
    CHECK_THROWS_AS(validate_steady_params(bad([](SteadyParams& q) { q.theta_schedule = {1e-2, 1e-1}; })),
                    ConfigError);
    CHECK_THROWS_AS(validate_steady_params(bad([](SteadyParams& q) { q.theta_schedule = {1e-2, -1.0}; })),
                    ConfigError);
}

TEST_CASE("derived wall constants") {
    auto d = blend(301);
    SteadyParams p;
    auto sd = prepare_steady_data(d.y, d.rho0, d.u0, p);
    CHECK(sd.lambda0 == doctest::Approx(0.125).epsilon(1e-3));
    CHECK(sd.kappa3 == doctest::Approx(0.5 * *std::min_element(d.rho0.begin(), d.rho0.end())));
    CHECK(sd.delta_nb > 0.0);
    CHECK(sd.delta_nb <= 1.0);
    for (std::size_t j = 0; j < d.y.size() && d.y[j] <= sd.delta_nb; ++j) CHECK(d.u0[j] >= 2 * sd.lambda0 * d.y[j]);
    double umin = 1e300;
    for (std::size_t j = 0; j < d.y.size(); ++j)
        if (d.y[j] >= 0.5 * sd.delta_nb) umin = std::min(umin, d.u0[j]);
    CHECK(sd.xi0 == doctest::Approx(0.5 * umin));
    CHECK(sd.u_inf == d.u0.back());
    CHECK(sd.rho_inf == d.rho0.back());

    // r₀ is linear in ρ₀∂_y q₀ with the θ-polynomial 2u₀θ + θ².
    const auto r = sd.r0(0.1);
    for (std::size_t j = 0; j < r.size(); j += 37)
        CHECK(r[j] == doctest::Approx(sd.rho0[j] * (0.2 * sd.u0[j] + 0.01) * sd.dq0[j]));
    for (double v : sd.r0(0.0)) CHECK(v == 0.0);

    p.kappa3 = 0.25;
    p.lambda0 = 0.1;
    auto over = prepare_steady_data(d.y, d.rho0, d.u0, p);
    CHECK(over.kappa3 == 0.25);
    CHECK(over.lambda0 == 0.1);
}

TEST_CASE("invalid steady data") {
    auto d = blend(101);
    SteadyParams p;
    auto u = d.u0;
    u[0] = 1e-3;
    CHECK_THROWS_AS(prepare_steady_data(d.y, d.rho0, u, p), DataError);
    u = d.u0;
    u[40] = -1e-3;
    CHECK_THROWS_AS(prepare_steady_data(d.y, d.rho0, u, p), DataError);
    p.kappa3 = 10.0;
    CHECK_THROWS_AS(prepare_steady_data(d.y, d.rho0, d.u0, p), DataError);
    p.kappa3 = 0.0;
    std::vector<double> shortv(3, 1.0);
    CHECK_THROWS_AS(prepare_steady_data(std::span(d.y).first(3), shortv, shortv, p), UsageError);
    CHECK_THROWS_AS(prepare_steady_data(d.y, shortv, d.u0, p), UsageError);
    // u₀ = ye^{−y} + 1 − e^{−y} has ∂_y²u₀(0) ≠ 0: the q₀ integrand blows up at the wall.
    std::vector<double> bad(d.y.size());
    for (std::size_t j = 0; j < bad.size(); ++j) bad[j] = d.y[j] * std::exp(-d.y[j]) + (1 - std::exp(-d.y[j]));
    CHECK_THROWS_AS(prepare_steady_data(d.y, d.rho0, bad, p), DataError);
}

TEST_CASE("density transport") {
    auto g = make_grid(4, 401, 10);
    const auto& y = g->y_nodes();
    std::vector<double> rho(y.size()), zero(y.size(), 0.0), shift(y.size(), 0.3), one(y.size(), 2.5);
    for (std::size_t j = 0; j < y.size(); ++j) rho[j] = 2.0 + 0.1 * y[j];

    CHECK(advect_density(y, rho, zero, 0.05) == rho);
    for (double v : advect_density(y, one, shift, 0.05)) CHECK(v == 2.5);
    // Linear data is reproduced exactly away from the clamped ends.
    const auto lin = advect_density(y, rho, shift, 0.05);
    for (std::size_t j = 2; j + 2 < y.size(); ++j) CHECK(std::abs(lin[j] - (2.0 + 0.1 * (y[j] - 0.015))) < 1e-12);

    // Monotone interpolation adds no extrema.
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> U01(0.0, 1.0);
    std::vector<double> r(y.size()), q(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) {
        r[j] = 1.0 + U01(gen);
        q[j] = y[j] * (U01(gen) - 0.5);
    }
    const auto out = advect_density(y, r, q, 0.02);
    const double lo = *std::min_element(r.begin(), r.end()), hi = *std::max_element(r.begin(), r.end());
    for (double v : out) {
        CHECK(v >= lo);
        CHECK(v <= hi);
    }

    std::vector<double> down(y.size(), 0.0);
    down[1] = 10.0;  // foot at y₁ − 0.5, far below the wall
    CHECK_THROWS_AS(advect_density(y, rho, down, 0.05), StepError);
    CHECK_THROWS_AS(advect_density(y, rho, std::span(zero).first(3), 0.05), UsageError);
}

TEST_CASE("zero-length slab returns the data") {
    auto d = blend(201);
    auto p = short_params();
    p.L = 0.0;
    auto run = run_steady(d.y, d.rho0, d.u0, p);
    REQUIRE(run.slab.size() == 1);
    CHECK(run.slab[0].u == d.u0);
    CHECK(run.slab[0].rho == d.rho0);
    CHECK(run.series.size() == 1);
    CHECK(run.L_a == 0.0);
    const auto sd = prepare_steady_data(d.y, d.rho0, d.u0, p);
    CHECK(initial_slab(sd, p).size() == 1);
    p.L = 0.1;
    p.dx = 0.03;
    auto s = initial_slab(sd, p);
    REQUIRE(s.size() == 5);
    CHECK(s.back().x == doctest::Approx(0.1));
}

TEST_CASE("the first integral at x = 0 with θ = 0 returns ∂_y q₀") {
    auto d = blend(301);
    SteadyParams p = short_params({0.0});
    const auto sd = prepare_steady_data(d.y, d.rho0, d.u0, p);
    const auto s = picard_step(initial_slab(sd, p), sd, p, 0.0);
    double scale = 0.0;
    for (double v : sd.dq0) scale = std::max(scale, std::abs(v));
    for (std::size_t j = 1; j < sd.dq0.size(); ++j) CHECK(std::abs(s[0].dq[j] - sd.dq0[j]) <= 1e-12 * scale);
}

TEST_CASE("manufactured steady solution converges") {
    const double e1 = mms_error(151, 0.02), e2 = mms_error(301, 0.01), e3 = mms_error(601, 0.005);
    MESSAGE("errors " << e1 << " " << e2 << " " << e3);
    CHECK(e3 < 1e-3);
    CHECK(std::log2(e1 / e2) > 1.5);
    CHECK(std::log2(e2 / e3) > 1.5);
}

TEST_CASE("converged march: contraction, θ-Cauchy, life span and fixed point") {
    auto d = blend(301);
    auto p = short_params();
    auto run = run_steady(d.y, d.rho0, d.u0, p);
    REQUIRE(run.diagnostics.size() == 4);
    for (const auto& dg : run.diagnostics) {
        CHECK(dg.converged);
        CHECK(dg.phi_series.size() >= 3);
        CHECK(dg.contraction_ratio < 0.9);
        CHECK(dg.sup_diff.back() < p.picard_tol);
    }
    REQUIRE(run.theta_distances.size() == 3);
    CHECK(run.cauchy);
    CHECK(run.L_a >= 0.05);
    CHECK(run.L_a == doctest::Approx(0.1));
    for (const auto& m : run.monitors) CHECK(m.all());
    REQUIRE(run.series.size() == run.slab.size());
    for (const auto& r : run.series) {
        CHECK(std::isfinite(r.X_total));
        CHECK(r.X_total > 0.0);
        CHECK(r.Y_total > 0.0);
        CHECK(r.dyu_wall >= 2 * run.data.lambda0);
        CHECK(r.phi_last >= 0.0);
    }

    // One more sweep at the last θ leaves the slab in place.
    const auto again = picard_step(run.slab, run.data, p, p.theta_schedule.back());
    CHECK(sup_diff(again, run.slab) < 1e-9);

    // Density stays inside the data's range.
    const double lo = *std::min_element(d.rho0.begin(), d.rho0.end());
    const double hi = *std::max_element(d.rho0.begin(), d.rho0.end());
    for (const auto& s : run.slab)
        for (double v : s.rho) {
            CHECK(v >= lo - 1e-14);
            CHECK(v <= hi + 1e-14);
        }

    // End stations carry no centered x-difference.
    const auto dres = differential_form_residual(d.y, run.slab, run.prev, 0.0);
    CHECK(dres.front() == 0.0);
    CHECK(dres.back() == 0.0);
}

TEST_CASE("first-integral residual against an independent stencil") {
    double ind[2];
    for (int l = 0; l < 2; ++l) {
        auto d = blend(301 * (1 << l) - l);
        auto p = short_params({1e-2});
        auto run = run_steady(d.y, d.rho0, d.u0, p);
        const auto r0 = run.data.r0(1e-2);
        // The march stencil is satisfied to rounding, x = 0 included.
        const auto march = r0_residuals(d.y, run.slab, run.prev, r0, 1e-2);
        CHECK(march[0] <= 1e-10);
        CHECK(check_r0(d.y, run.slab, run.prev, r0, 1e-2) <= 1e-10);
        const auto five = r0_residuals(d.y, run.slab, run.prev, r0, 1e-2, R0Stencil::independent);
        for (std::size_t n = 0; n < run.slab.size(); ++n)
            CHECK(five[n] <= 10.0 * d2_error_estimate(d.y, run.slab[n].u));
        ind[l] = check_r0(d.y, run.slab, run.prev, r0, 1e-2, R0Stencil::independent);
    }
    MESSAGE("independent residuals " << ind[0] << " " << ind[1]);
    CHECK(std::log2(ind[0] / ind[1]) >= 1.8);
}

TEST_CASE("differential form residual refines") {
    double r[2];
    for (int l = 0; l < 2; ++l) {
        auto d = blend(301 * (1 << l) - l);
        auto p = short_params({1e-2});
        p.dx = 0.01 / (1 << l);
        auto run = run_steady(d.y, d.rho0, d.u0, p);
        const auto res = differential_form_residual(d.y, run.slab, run.prev, 1e-2);
        // Station x = 0.05 on both grids.
        r[l] = res[5 * (1 << l)];
    }
    MESSAGE("differential form residual " << r[0] << " " << r[1]);
    CHECK(r[1] < r[0]);
}

TEST_CASE("X and Y on x-independent data against quadrature") {
    using namespace boost::math::differentiation;
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double y_max = 15.0, st = 2.0;
    const int m = 3;
    auto g = make_grid(4, 2401, y_max);
    const auto& y = g->y_nodes();
    auto rho_f = [](const auto& t) { return 1.0 + 0.3 * exp(-t); };
    auto dq_f = [&](const auto& t) {
        const auto e = exp(-g_poly(t));
        const auto u = 1.0 - e;
        return (4.0 * t * t * t + 3.0 * t * t * t * t + 2.0 * pow(t, 5) + pow(t, 6)) * e / (rho_f(t) * u * u);
    };
    SteadyState s;
    for (double yj : y) {
        s.rho.push_back(rho_f(yj));
        s.u.push_back(U(yj));
        s.dq.push_back(yj == 0.0 ? 0.0 : dq_f(yj));
        s.q.push_back(0.0);
    }
    std::vector<SteadyState> window(m + 1, s);
    for (int k = 0; k <= m; ++k) window[k].x = 0.01 * k;
    SteadyParams p;
    p.m = m;
    p.sigma_tilde = st;
    const auto xy = energy_XY(y, window, p, 1);

    const double rho_inf = rho_f(y_max);
    auto integ = [&](auto f) { return GK::integrate(f, 0.0, y_max, 12, 1e-12); };
    double X = integ([](double t) { return std::pow(U(t) - 1, 2) + std::pow(U1(t), 2); });
    double Y = 0.0;
    for (int k = 0; k <= m; ++k) {
        X += integ([&](double t) {
            const auto v = rho_f(make_fvar<double, m + 1>(t)).derivative(k) - (k == 0 ? rho_inf : 0.0);
            return v * v;
        });
        X += integ([&](double t) {
            const double v = dq_f(make_fvar<double, m + 1>(t)).derivative(k);
            return rho_f(t) * U(t) * U(t) * v * v * std::pow(1 + t, 2 * st);
        });
        Y += integ([&](double t) {
            const double v = dq_f(make_fvar<double, m + 1>(t)).derivative(k + 1);
            return U(t) * v * v * std::pow(1 + t, 2 * st);
        });
    }
    CHECK(xy.X == doctest::Approx(X).epsilon(1e-2));
    CHECK(xy.Y == doctest::Approx(Y).epsilon(1e-2));
    CHECK(energy_XY(y, window, p).X == doctest::Approx(xy.X).epsilon(1e-9));

    CHECK_THROWS_AS(energy_XY(y, std::span(window).first(m), p), UsageError);
    CHECK_THROWS_AS(energy_XY(y, window, p, m + 1), UsageError);
}

TEST_CASE("monitors and life span") {
    std::vector<SteadyMonitorRow> rows(4);
    for (std::size_t n = 0; n < rows.size(); ++n) {
        rows[n].x = 0.1 * n;
        rows[n].wall_ok = rows[n].rho_ok = rows[n].near_ok = rows[n].far_ok = true;
    }
    CHECK(detect_life_span(rows) == doctest::Approx(0.3));
    rows[2].far_ok = false;
    CHECK(detect_life_span(rows) == doctest::Approx(0.1));
    rows[0].rho_ok = false;
    CHECK(detect_life_span(rows) == -1.0);

    auto d = blend(201);
    SteadyParams p = short_params();
    auto sd = prepare_steady_data(d.y, d.rho0, d.u0, p);
    auto slab = initial_slab(sd, p);
    for (const auto& r : steady_monitors(slab, sd)) CHECK(r.all());
    slab[3].u[1] = 0.0;  // under λ₀y inside δ̃
    slab[5].rho[50] = 0.5 * sd.kappa3;
    auto rows2 = steady_monitors(slab, sd);
    CHECK_FALSE(rows2[3].near_ok);
    CHECK_FALSE(rows2[5].rho_ok);
    CHECK(detect_life_span(rows2) == doctest::Approx(slab[2].x));
}

TEST_CASE("wall slope under λ₀ stops the march") {
    auto d = blend(201);
    auto p = short_params({1e-2});
    p.lambda0 = 0.6;  // above the data's own slope
    p.delta_nb = 0.5;
    auto sd = prepare_steady_data(d.y, d.rho0, d.u0, p);
    try {
        picard_step(initial_slab(sd, p), sd, p, 1e-2);
        FAIL("expected LifeSpanExceeded");
    } catch (const LifeSpanExceeded& e) {
        CHECK(e.station() == doctest::Approx(0.01));
    }
}

TEST_CASE("vanishing ρ(u+θ)² is a degeneracy") {
    auto d = blend(201);
    auto p = short_params({0.0});
    auto sd = prepare_steady_data(d.y, d.rho0, d.u0, p);
    auto prev = initial_slab(sd, p);
    for (auto& v : prev[0].u) v *= 1e-7;
    CHECK_THROWS_AS(picard_step(prev, sd, p, 0.0), DegeneracyError);
}

TEST_CASE("iteration cap is reported as not converged") {
    auto d = blend(201);
    auto p = short_params({1e-1});
    p.picard_max_iters = 1;
    auto run = run_steady(d.y, d.rho0, d.u0, p);
    CHECK_FALSE(run.diagnostics[0].converged);
    CHECK(run.diagnostics[0].k_done == 1);
}

TEST_CASE("stability of the converged slab under data perturbations") {
    auto d = blend(301);
    auto p = short_params();
    auto bump = [&](double delta) {
        auto u = d.u0;
        for (std::size_t j = 0; j < u.size(); ++j) u[j] += delta * std::pow(d.y[j], 6) * std::exp(-d.y[j] * d.y[j]);
        return run_steady(d.y, d.rho0, u, p).slab;
    };
    const auto base = run_steady(d.y, d.rho0, d.u0, p).slab;
    const auto same = stability_check(base, bump(0.0), d.y, p.sigma_tilde);
    CHECK(same.identical);
    CHECK(same.envelope_ok);
    CHECK(same.sup_functional == 0.0);

    const auto small = stability_check(base, bump(1e-6), d.y, p.sigma_tilde);
    const auto large = stability_check(base, bump(1e-3), d.y, p.sigma_tilde);
    CHECK_FALSE(small.identical);
    CHECK(small.envelope_ok);
    CHECK(large.envelope_ok);
    const double ratio = large.sup_functional / small.sup_functional;
    MESSAGE("functional ratio " << ratio << ", growth " << small.fitted_growth << " " << large.fitted_growth);
    CHECK(ratio >= 1e5);
    CHECK(ratio <= 1e7);
    CHECK(std::isfinite(large.fitted_growth));

    auto shorter = base;
    shorter.pop_back();
    CHECK_THROWS_AS(stability_check(base, shorter, d.y, p.sigma_tilde), UsageError);
}
