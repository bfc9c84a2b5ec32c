#include "prandtl/compat.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "prandtl/errors.hpp"
#include "prandtl/operators.hpp"
#include "prandtl/steady.hpp"

namespace prandtl {

bool validate_weights(double gamma, double sigma) noexcept {
    return gamma > 1.5 && gamma + 0.5 < sigma && sigma <= 2.0 * gamma - 1.0;
}

void require_weights(const WeightParams& w) {
    if (!(w.gamma > 1.5)) throw ConfigError("weights: γ > 3/2 violated");
    if (!(w.gamma + 0.5 < w.sigma)) throw ConfigError("weights: γ+1/2 < σ violated");
    if (!(w.sigma <= 2.0 * w.gamma - 1.0)) throw ConfigError("weights: σ ≤ 2γ−1 violated");
}

// ---------------------------------------------------------------------------

using Gauss = boost::math::quadrature::gauss<double, 30>;

BlendProfile::BlendProfile(double lambda, double u_inf, double y_c, int m, double ell)
    : lambda_(lambda), u_inf_(u_inf), y_c_(y_c), ell_(ell), m_(m) {
    if (!(lambda > 0.0) || !(u_inf > 0.0) || !(y_c > 0.0) || !(ell > 0.0))
        throw ConfigError("blend profile: λ, u_inf, y_c and ℓ must be positive");
    if (m < 0 || m > 6) throw ConfigError("blend profile: smoothness order m must lie in [0, 6]");
    if (lambda * y_c >= u_inf) throw ConfigError("blend profile: λ·y_c < u_inf violated");
    // ∫_{y_c}^{2y_c} (1 − S) = y_c/2 by the symmetry S(t) + S(1 − t) = 1.
    const double J = Gauss::integrate([&](double y) { return S(y) * std::exp(-(y - y_c_) / ell_); }, y_c_, 2 * y_c_) +
                     ell_ * std::exp(-y_c_ / ell_);
    c_ = (u_inf_ - 1.5 * lambda_ * y_c_) / J;
    if (!(c_ > 0.0)) throw ConfigError("blend profile: u_inf ≤ 1.5·λ·y_c leaves no room for the tail");
    u_2yc_ = lambda_ * y_c_ + Gauss::integrate([&](double y) { return d1(y); }, y_c_, 2 * y_c_);
}

double BlendProfile::S(double y) const {
    const double t = (y - y_c_) / y_c_;
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    // Regularized incomplete beta I_t(m+1, m+1) for integer m.
    const int n = 2 * m_ + 1;
    double acc = 0.0;
    for (int k = m_ + 1; k <= n; ++k)
        acc += boost::math::binomial_coefficient<double>(n, k) * std::pow(t, k) * std::pow(1.0 - t, n - k);
    return acc;
}

double BlendProfile::dS(double y) const {
    const double t = (y - y_c_) / y_c_;
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const int n = 2 * m_ + 1;
    const double norm = (m_ + 1) * boost::math::binomial_coefficient<double>(n, m_ + 1);
    return norm * std::pow(t * (1.0 - t), m_) / y_c_;
}

double BlendProfile::value(double y) const {
    if (y <= y_c_) return lambda_ * y;
    if (y < 2 * y_c_) return lambda_ * y_c_ + Gauss::integrate([&](double s) { return d1(s); }, y_c_, y);
    return u_2yc_ + c_ * ell_ * (std::exp(-y_c_ / ell_) - std::exp(-(y - y_c_) / ell_));
}

double BlendProfile::d1(double y) const {
    if (y <= y_c_) return lambda_;
    const double s = S(y);
    return lambda_ * (1.0 - s) + s * c_ * std::exp(-(y - y_c_) / ell_);
}

double BlendProfile::d2(double y) const {
    if (y <= y_c_) return 0.0;
    const double e = c_ * std::exp(-(y - y_c_) / ell_);
    return (e - lambda_) * dS(y) - S(y) * e / ell_;
}

InitialData1D build_u0_blend(double lambda, double u_inf, double y_c, int m, std::span<const double> y,
                             double rho_inf, double rho_amp, double ell) {
    if (!(rho_inf > 0.0) || !(rho_inf - std::abs(rho_amp) > 0.0))
        throw ConfigError("blend data: density must stay positive");
    BlendProfile p(lambda, u_inf, y_c, m, ell);
    InitialData1D d;
    d.y.assign(y.begin(), y.end());
    d.u0.resize(y.size());
    d.rho0.resize(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) {
        d.u0[j] = p.value(y[j]);
        d.rho0[j] = rho_inf + rho_amp * std::exp(-y[j]);
    }
    d.analytic_derivs = std::array<double, 6>{0.0, lambda, 0.0, 0.0, 0.0, 0.0};
    d.kappa3 = 0.5 * *std::min_element(d.rho0.begin(), d.rho0.end());
    return d;
}

// ---------------------------------------------------------------------------

WallDerivative wall_derivative(std::span<const double> y, std::span<const double> f, int order) {
    const int n = order + 4;
    if (static_cast<int>(y.size()) < 2 * n - 1)
        throw UsageError("wall derivative of order " + std::to_string(order) + " needs at least " +
                         std::to_string(2 * n - 1) + " nodes");
    std::vector<double> yh(y.begin(), y.begin() + n), y2h(n), f2h(n);
    for (int k = 0; k < n; ++k) {
        y2h[k] = y[2 * k];
        f2h[k] = f[2 * k];
    }
    const auto wh = fd_weights(0.0, yh, order);
    const auto w2h = fd_weights(0.0, y2h, order);
    double dh = 0.0, d2h = 0.0;
    for (int k = 0; k < n; ++k) {
        dh += wh[k] * f[k];
        d2h += w2h[k] * f2h[k];
    }
    return {dh, std::abs(dh - d2h)};
}

const CompatEntry& CompatReport::at(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return e;
    throw UsageError("compat report has no entry '" + name + "'");
}

CompatReport check_compat(const InitialData1D& data, int m) {
    if (m < 1 || m > 5) throw UsageError("check_compat: m must lie in [1, 5]");
    const std::size_t n = data.y.size();
    if (data.u0.size() != n || data.rho0.size() != n) throw UsageError("check_compat: array length mismatch");
    if (!data.analytic_derivs && n < 17)
        throw UsageError("check_compat: at least 17 nodes are needed without analytic derivatives");

    double umax = 0.0;
    for (double v : data.u0) umax = std::max(umax, std::abs(v));
    const double floor = 1e-8 * std::max(umax, 1e-300);

    CompatReport r;
    static const char* names[6] = {"u0(0)=0", "u0'(0)>0", "u0''(0)=0", "d3u0(0)=0", "d4u0(0)=0", "d5u0(0)=0"};
    for (int k = 0; k <= 5; ++k) {
        CompatEntry e;
        e.name = names[k];
        e.order = k;
        if (data.analytic_derivs) {
            e.value = (*data.analytic_derivs)[k];
            e.threshold = 0.0;
        } else if (k == 0) {
            e.value = data.u0[0];
            e.threshold = floor;
        } else {
            const auto d = wall_derivative(data.y, data.u0, k);
            e.value = d.value;
            e.threshold = std::max(10.0 * d.error, floor);
        }
        e.pass = k == 1 ? e.value > e.threshold : std::abs(e.value) <= e.threshold;
        r.entries.push_back(e);
    }

    {
        CompatEntry e;
        e.name = "d3v0(0)=0";
        e.order = 3;
        try {
            const auto q0 = build_q0(data.y, data.rho0, data.u0);
            std::vector<double> v0(n);
            for (std::size_t j = 0; j < n; ++j) v0[j] = -data.u0[j] * q0[j];
            const auto d = wall_derivative(data.y, v0, 3);
            e.value = d.value;
            e.threshold = std::max(10.0 * d.error, floor);
            e.pass = std::abs(e.value) <= e.threshold;
        } catch (const DataError&) {
            e.value = std::numeric_limits<double>::infinity();
            e.threshold = floor;
            e.pass = false;
        }
        r.entries.push_back(e);
    }

    {
        CompatEntry e;
        e.name = "rho0>=kappa3";
        e.order = 0;
        e.value = *std::min_element(data.rho0.begin(), data.rho0.end());
        e.threshold = data.kappa3;
        e.pass = data.kappa3 > 0.0 && e.value >= data.kappa3;
        r.entries.push_back(e);
    }

    r.overall_order_m = -1;
    for (int k = 0; k <= 5; ++k) {
        bool ok = true;
        for (const auto& e : r.entries)
            if (e.name != "rho0>=kappa3" && e.order == k) ok = ok && e.pass;
        if (!ok) break;
        r.overall_order_m = k;
    }
    r.overall_order_m = std::max(r.overall_order_m, 0);
    r.pass = true;
    for (const auto& e : r.entries)
        if (e.order <= m) r.pass = r.pass && e.pass;
    return r;
}

// ---------------------------------------------------------------------------

UnsteadyData build_unsteady_data(const WeightParams& weights, double delta_bl, double kappa1, double kappa2,
                                 double amplitude, const GridPtr& grid, const UnsteadyDataParams& p) {
    require_weights(weights);
    if (!(kappa1 > 0.0) || !(2.0 * kappa1 < 0.5 * kappa2))
        throw ConfigError("unsteady data: empty density band, need 0 < 2κ₁ < κ₂/2");
    if (!(p.rho_inf >= 2.0 * kappa1 && p.rho_inf <= 0.5 * kappa2))
        throw ConfigError("unsteady data: ϱ_∞ must lie in [2κ₁, κ₂/2]");
    if (!(amplitude >= 0.0)) throw ConfigError("unsteady data: amplitude must be non-negative");

    const double margin = std::min(p.rho_inf - 2.0 * kappa1, 0.5 * kappa2 - p.rho_inf);
    const double a_rho = std::min(amplitude, margin);
    BlendProfile base(p.wall_slope, p.u_inf, p.y_c, p.m);
    // y⁶e^{−y²} peaks at y = √3 with height 27e^{−3}.
    const double bump = 27.0 * std::exp(-3.0);

    UnsteadyData d;
    d.rho0 = ScalarField::from_function(
        grid, [&](double x, double y) { return p.rho_inf + a_rho * std::cos(x) * std::exp(-y); });
    std::vector<double> prof(grid->ny());
    for (int j = 0; j < grid->ny(); ++j) prof[j] = base.value(grid->y(j));
    d.u0 = ScalarField::from_function(grid, [&](double x, double y) {
        const double y3 = y * y * y;
        return amplitude * std::sin(x) * y3 * y3 * std::exp(-y * y) / bump;
    });
    for (int i = 0; i < grid->nx(); ++i) {
        auto c = d.u0.column(i);
        for (int j = 0; j < grid->ny(); ++j) c[j] += prof[j];
        c[0] = 0.0;
        c[grid->ny() - 1] = p.u_inf;
    }

    d.min_w_sigma = weighted(ddy(d.u0, 1), weights.sigma).min();
    if (delta_bl <= 0.0) {
        if (!(d.min_w_sigma > 0.0)) {
            std::ostringstream os;
            os << "unsteady data: min w0<y>^sigma = " << d.min_w_sigma << " is not positive";
            throw DataError(os.str());
        }
        d.delta_bl = 0.5 * d.min_w_sigma;
    } else {
        if (!(d.min_w_sigma >= 2.0 * delta_bl)) {
            std::ostringstream os;
            os << "unsteady data: min w0<y>^sigma = " << d.min_w_sigma << " < 2*delta_bl = " << 2.0 * delta_bl;
            throw DataError(os.str());
        }
        d.delta_bl = delta_bl;
    }
    return d;
}

}  // namespace prandtl
