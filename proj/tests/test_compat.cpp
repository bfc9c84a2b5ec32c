#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "prandtl/compat.hpp"
#include "prandtl/errors.hpp"
#include "prandtl/operators.hpp"
#include "prandtl/steady.hpp"

using namespace prandtl;

namespace {

std::vector<double> uniform(int n, double y_max) {
    std::vector<double> y(n);
    for (int j = 0; j < n; ++j) y[j] = y_max * j / (n - 1);
    return y;
}

InitialData1D sampled(const std::vector<double>& y, double (*f)(double), double u_inf) {
    InitialData1D d;
    d.y = y;
    for (double v : y) {
        d.u0.push_back(u_inf * f(v));
        d.rho0.push_back(1.0);
    }
    d.kappa3 = 0.5;
    return d;
}

double tanh_fn(double y) { return std::tanh(y); }
double erf_fn(double y) { return std::erf(y); }

}  // namespace

TEST_CASE("validate_weights") {
    CHECK(validate_weights(2, 3));
    CHECK_FALSE(validate_weights(2, 3.5));
    CHECK_FALSE(validate_weights(1, 2));
    CHECK_FALSE(validate_weights(2, 2.5));  // σ = γ + 1/2 is excluded
    CHECK(validate_weights(3, 4));
    CHECK_THROWS_WITH_AS(require_weights({2, 4}), "weights: σ ≤ 2γ−1 violated", ConfigError);
    CHECK_THROWS_AS(require_weights({1.5, 2.5}), ConfigError);
}

TEST_CASE("tanh fails at the third-order wall condition") {
    const auto y = uniform(1001, 25);
    auto r = check_compat(sampled(y, tanh_fn, 1.3), 5);
    CHECK(r.at("u0(0)=0").pass);
    CHECK(r.at("u0'(0)>0").pass);
    CHECK(r.at("u0''(0)=0").pass);
    CHECK_FALSE(r.at("d3u0(0)=0").pass);
    // tanh y = y − y³/3 + 2y⁵/15 + …
    CHECK(r.at("d3u0(0)=0").value == doctest::Approx(-2 * 1.3).epsilon(1e-4));
    CHECK(r.at("d4u0(0)=0").pass);
    CHECK(r.at("d5u0(0)=0").value == doctest::Approx(16 * 1.3).epsilon(1e-2));
    CHECK_FALSE(r.at("d3v0(0)=0").pass);
    CHECK(r.overall_order_m == 2);
    CHECK_FALSE(r.pass);
    CHECK(check_compat(sampled(y, tanh_fn, 1.3), 2).pass);
}

TEST_CASE("erf fails at the third-order wall condition") {
    const auto y = uniform(1001, 25);
    auto r = check_compat(sampled(y, erf_fn, 1.0), 5);
    // erf y = (2/√π)(y − y³/3 + y⁵/10 − …)
    CHECK(r.at("d3u0(0)=0").value == doctest::Approx(-4 / std::sqrt(std::numbers::pi)).epsilon(1e-4));
    CHECK_FALSE(r.at("d3u0(0)=0").pass);
    CHECK(r.at("u0''(0)=0").pass);
    CHECK(r.overall_order_m == 2);
}

TEST_CASE("builder profile passes through order 5") {
    const auto y = uniform(2001, 25);
    auto d = build_u0_blend(1.0, 1.0, 0.25, 5, y, 1.0, 0.2);
    auto r = check_compat(d, 5);
    CHECK(r.pass);
    CHECK(r.overall_order_m == 5);
    for (const auto& e : r.entries) CHECK_MESSAGE(e.pass, e.name);

    // Stencil evaluation agrees with the closed form within its own error estimate.
    auto s = d;
    s.analytic_derivs.reset();
    auto rs = check_compat(s, 5);
    CHECK(rs.pass);
    CHECK(rs.overall_order_m == 5);
    for (int k = 1; k <= 5; ++k) {
        const auto& a = r.entries[k];
        const auto& b = rs.entries[k];
        CHECK(std::abs(a.value - b.value) <= b.threshold);
    }
}

TEST_CASE("blend profile shape") {
    const auto y = uniform(2001, 25);
    BlendProfile p(1.0, 1.0, 0.25, 5);
    CHECK(p.value(0.25) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(p.value(0.1) == 0.1);
    CHECK(std::abs(p.value(25) - 1.0) < 1e-8);
    // Continuity across the blend edges.
    CHECK(p.value(0.5 - 1e-12) == doctest::Approx(p.value(0.5 + 1e-12)).epsilon(1e-10));
    // u′ by central differences of value().
    for (double t : {0.3, 0.4, 0.45, 1.0, 3.0}) {
        const double h = 1e-5;
        CHECK((p.value(t + h) - p.value(t - h)) / (2 * h) == doctest::Approx(p.d1(t)).epsilon(1e-7));
        CHECK((p.d1(t + h) - p.d1(t - h)) / (2 * h) == doctest::Approx(p.d2(t)).epsilon(1e-6));
    }
    auto d = build_u0_blend(1.0, 1.0, 0.25, 5, y);
    auto g = Grid2D::from_nodes(4, y);
    auto du = ddy_profile(*g, d.u0, 1);
    CHECK(*std::min_element(du.begin(), du.end()) > 0.0);
    CHECK_THROWS_AS(build_u0_blend(4.0, 1.0, 0.25, 5, y), ConfigError);
    CHECK_THROWS_AS(build_u0_blend(3.0, 1.0, 0.25, 5, y), ConfigError);  // 1.5λy_c ≥ u_inf
}

TEST_CASE("build_q0 against an adaptive quadrature oracle") {
    BlendProfile p(1.0, 1.0, 0.25, 5);
    auto integrand = [&](double s) { return p.d2(s) / (p.value(s) * p.value(s)); };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double err[2];
    for (int l = 0; l < 2; ++l) {
        const auto y = uniform(2000 * (1 << l) + 1, 20);
        auto d = build_u0_blend(1.0, 1.0, 0.25, 5, y);
        auto q = build_q0(y, d.rho0, d.u0);
        CHECK(q[0] == 0.0);
        // Oracle accumulated interval by interval, split at the blend edges.
        double oracle = 0.0, e = 0.0;
        for (std::size_t j = 1; j < y.size(); ++j) {
            double a = std::max(y[j - 1], 0.25);
            for (double edge : {0.5, y[j]}) {
                if (edge <= a || a >= y[j]) continue;
                const double b = std::min(edge, y[j]);
                oracle -= GK::integrate(integrand, a, b, 3, 1e-11);
                a = b;
            }
            if (j + 1 < y.size() && y[j + 1] <= 0.25) CHECK(std::abs(q[j]) < 1e-9);
            e = std::max(e, std::abs(q[j] - oracle));
        }
        err[l] = e;
    }
    CHECK(err[1] < 5e-3);
    CHECK(std::log2(err[0] / err[1]) > 1.8);

    const auto y = uniform(1001, 25);
    auto t = sampled(y, tanh_fn, 1.0);
    CHECK_THROWS_AS(build_q0(y, t.rho0, t.u0), DataError);
}

TEST_CASE("build_unsteady_data") {
    auto g = make_grid(16, 400, 25, 0);
    WeightParams w{2.0, 3.0};
    auto flat = build_unsteady_data(w, 0.0, 0.25, 4.0, 0.0, g);
    for (int j = 0; j < g->ny(); ++j) CHECK(flat.u0(3, j) == flat.u0(7, j));
    CHECK(flat.min_w_sigma > 0.0);
    CHECK(flat.delta_bl == doctest::Approx(0.5 * flat.min_w_sigma));

    auto d = build_unsteady_data(w, 0.0, 0.25, 4.0, 0.02, g);
    CHECK(d.rho0.min() >= 0.5 - 1e-15);
    CHECK(d.rho0.max() <= 2.0 + 1e-15);
    CHECK(d.rho0.max() > 1.0);
    const double achieved = weighted(ddy(d.u0, 1), 3.0).min();
    CHECK(achieved == d.min_w_sigma);
    CHECK(achieved >= 2 * d.delta_bl);
    for (int i = 0; i < g->nx(); ++i) {
        CHECK(d.u0(i, 0) == 0.0);
        CHECK(std::abs(d.u0(i, g->ny() - 1) - 1.0) < 1e-8);
        CHECK(std::abs(d.rho0(i, g->ny() - 1) - 1.0) < 1e-8);
    }

    CHECK_THROWS_AS(build_unsteady_data(w, 0.0, 1.0, 1.0, 0.05, g), ConfigError);
    CHECK_THROWS_AS(build_unsteady_data({2, 4}, 0.0, 0.25, 4.0, 0.05, g), ConfigError);
    CHECK_THROWS_AS(build_unsteady_data(w, 1.0, 0.25, 4.0, 0.05, g), DataError);
    // Half of the largest admissible amplitude for a demanding δ̃ passes.
    const double target = 0.5 * flat.min_w_sigma * 0.9;
    double lo = 0.0, hi = 2.0;
    for (int it = 0; it < 30; ++it) {
        const double mid = 0.5 * (lo + hi);
        try {
            build_unsteady_data(w, target, 0.25, 4.0, mid, g);
            lo = mid;
        } catch (const DataError&) {
            hi = mid;
        }
    }
    CHECK(lo > 0.0);
    CHECK_NOTHROW(build_unsteady_data(w, target, 0.25, 4.0, 0.5 * lo, g));
}
