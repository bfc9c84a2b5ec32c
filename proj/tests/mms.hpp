#pragma once

// Manufactured solution of the forced unsteady system on 𝕋 × [0, 20]:
//   u = U(y) + A(t) sin x P(y),   P = (7y⁶ − 2y⁸)e^{−y²} = (y⁷e^{−y²})′
//   v = −A(t) cos x y⁷e^{−y²}
//   ρ = ϱ_∞ + B(t) cos x e^{−y}
// with U = 1 − e^{−y}, A = A₀(1 + t), B = B₀(1 − t). The forcing is the
// exact residual of both equations.

#include <cmath>

#include "prandtl/operators.hpp"
#include "prandtl/unsteady.hpp"

namespace mms {

struct Solution {
    double A0 = 5e-3;
    double B0 = 0.2;
    double rho_inf = 1.0;
    double eps = 1e-3;

    static double P(double y) { return (7 * std::pow(y, 6) - 2 * std::pow(y, 8)) * std::exp(-y * y); }
    static double P1(double y) {
        return (42 * std::pow(y, 5) - 30 * std::pow(y, 7) + 4 * std::pow(y, 9)) * std::exp(-y * y);
    }
    static double P2(double y) {
        return (210 * std::pow(y, 4) - 294 * std::pow(y, 6) + 96 * std::pow(y, 8) - 8 * std::pow(y, 10)) *
               std::exp(-y * y);
    }
    static double Pint(double y) { return std::pow(y, 7) * std::exp(-y * y); }

    static double U(double y) { return 1.0 - std::exp(-y); }
    static double U1(double y) { return std::exp(-y); }
    static double U2(double y) { return -std::exp(-y); }

    double A(double t) const { return A0 * (1 + t); }
    double B(double t) const { return B0 * (1 - t); }

    double u(double t, double x, double y) const { return U(y) + A(t) * std::sin(x) * P(y); }
    double v(double t, double x, double y) const { return -A(t) * std::cos(x) * Pint(y); }
    double rho(double t, double x, double y) const { return rho_inf + B(t) * std::cos(x) * std::exp(-y); }

    double f_rho(double t, double x, double y) const {
        const double e = std::exp(-y);
        const double rt = -B0 * std::cos(x) * e;
        const double rx = -B(t) * std::sin(x) * e;
        const double ry = -B(t) * std::cos(x) * e;
        const double rxx = -B(t) * std::cos(x) * e;
        return rt + u(t, x, y) * rx + v(t, x, y) * ry - eps * rxx;
    }
    double f_u(double t, double x, double y) const {
        const double ut = A0 * std::sin(x) * P(y);
        const double ux = A(t) * std::cos(x) * P(y);
        const double uy = U1(y) + A(t) * std::sin(x) * P1(y);
        const double uxx = -A(t) * std::sin(x) * P(y);
        const double uyy = U2(y) + A(t) * std::sin(x) * P2(y);
        return ut + u(t, x, y) * ux + v(t, x, y) * uy - eps * uxx - uyy / rho(t, x, y);
    }

    prandtl::UnsteadyParams params(double dt) const {
        prandtl::UnsteadyParams p;
        p.eps = eps;
        p.rho_inf = rho_inf;
        p.dt = dt;
        p.forcing.rho = [this](double t, double x, double y) { return f_rho(t, x, y); };
        p.forcing.u = [this](double t, double x, double y) { return f_u(t, x, y); };
        return p;
    }

    /// Exact fields sampled at time t (v and w from the discrete operators,
    /// as the solver would produce them).
    prandtl::UnsteadyState state(const prandtl::GridPtr& g, double t) const {
        prandtl::UnsteadyState s;
        s.t = t;
        s.rho = prandtl::ScalarField::from_function(g, [&](double x, double y) { return rho(t, x, y); });
        s.u = prandtl::ScalarField::from_function(g, [&](double x, double y) { return u(t, x, y); });
        s.v = prandtl::recover_v(s.u);
        s.w = prandtl::ddy(s.u, 1);
        return s;
    }
};

}  // namespace mms
