#include "prandtl/inequalities.hpp"

#include <cmath>
#include <random>

#include "prandtl/errors.hpp"
#include "prandtl/operators.hpp"

namespace prandtl {

const char* to_string(InequalityKind kind) noexcept {
    switch (kind) {
        case InequalityKind::hardy1: return "hardy1";
        case InequalityKind::hardy2: return "hardy2";
        case InequalityKind::sobolev_inf: return "sobolev_inf";
        case InequalityKind::trace: return "trace";
        case InequalityKind::morse: return "morse";
    }
    return "?";
}

InequalityKind inequality_kind_from_string(const std::string& name) {
    for (auto k : {InequalityKind::hardy1, InequalityKind::hardy2, InequalityKind::sobolev_inf, InequalityKind::trace,
                   InequalityKind::morse}) {
        if (name == to_string(k)) return k;
    }
    throw UsageError("unknown inequality kind '" + name + "'");
}

namespace {

double l2(const ScalarField& f, double lambda = 0.0) { return std::sqrt(weighted_l2_squared(f, lambda)); }

double wall_l2(const ScalarField& f) {
    double acc = 0.0;
    for (int i = 0; i < f.nx(); ++i) acc += f(i, 0) * f(i, 0);
    return std::sqrt(acc * f.grid().dx());
}

double wall_product(const ScalarField& f, const ScalarField& g) {
    double acc = 0.0;
    for (int i = 0; i < f.nx(); ++i) acc += f(i, 0) * g(i, 0);
    return acc * f.grid().dx();
}

double sobolev_ratio(const ScalarField& f, double& lhs, double& rhs) {
    lhs = sup_norm(f);
    rhs = l2(f) + l2(ddx(f, 1)) + l2(ddy(f, 2));
    return lhs / rhs;
}

double morse_ratio(const ScalarField& f, const ScalarField& g, double lambda, double& lhs, double& rhs) {
    constexpr int m = 3;
    lhs = l2(ddx(f, 1) * ddy(g, 1), lambda + 1.0);
    rhs = weighted_norm(f, m, 0.5 * lambda, NormMode::full_Hs_gamma) *
          weighted_norm(g, m, 0.5 * lambda, NormMode::full_Hs_gamma);
    return lhs / rhs;
}

}  // namespace

ScalarField coarsen(const ScalarField& f) {
    const auto& g = f.grid();
    if (g.nx() < 8) throw UsageError("coarsen: nx must be at least 8");
    std::vector<int> keep;
    for (int j = 0; j < g.ny(); j += 2) keep.push_back(j);
    if (keep.back() != g.ny() - 1) keep.push_back(g.ny() - 1);
    std::vector<double> y;
    for (int j : keep) y.push_back(g.y(j));
    auto cg = Grid2D::from_nodes(g.nx() / 2, std::move(y));
    ScalarField r(cg);
    for (int i = 0; i < cg->nx(); ++i)
        for (std::size_t q = 0; q < keep.size(); ++q) r(i, static_cast<int>(q)) = f(2 * i, keep[q]);
    return r;
}

std::vector<InequalityReport> run_inequality_suite(InequalityKind kind, std::span<const ScalarField> samples,
                                                   double lambda, const InequalityOptions& options) {
    if (kind == InequalityKind::hardy1 && !(lambda > -0.5))
        throw DomainError("hardy1 requires lambda > -1/2");
    if (kind == InequalityKind::hardy2 && !(lambda < -0.5))
        throw DomainError("hardy2 requires lambda < -1/2");

    std::vector<InequalityReport> out;
    const std::size_t n = samples.size();
    for (std::size_t s = 0; s < n; ++s) {
        const ScalarField& f = samples[s];
        const ScalarField& g = samples[(s + 1) % n];
        InequalityReport r;
        r.kind = kind;
        r.sample_id = static_cast<int>(s);
        switch (kind) {
            case InequalityKind::hardy1: {
                double edge = 0.0;
                for (int i = 0; i < f.nx(); ++i) edge = std::max(edge, std::abs(f(i, f.ny() - 1)));
                if (edge > 1e-6 * std::max(1.0, f.max_abs()))
                    throw DataError("hardy1 sample " + std::to_string(s) + " does not decay at y_max");
                r.lhs = l2(f, lambda);
                r.rhs = 2.0 / (2.0 * lambda + 1.0) * l2(ddy(f, 1), lambda + 1.0);
                break;
            }
            case InequalityKind::hardy2: {
                const double k = 2.0 * lambda + 1.0;
                r.lhs = l2(f, lambda);
                r.rhs = std::sqrt(-1.0 / k) * wall_l2(f) - 2.0 / k * l2(ddy(f, 1), lambda + 1.0);
                break;
            }
            case InequalityKind::trace: {
                r.lhs = wall_product(f, g);
                r.rhs = l2(ddy(f, 1)) * l2(g) + l2(f) * l2(ddy(g, 1));
                break;
            }
            case InequalityKind::sobolev_inf: {
                r.empirical_constant = sobolev_ratio(f, r.lhs, r.rhs);
                double cl = 0.0, cr = 0.0;
                const double coarse = sobolev_ratio(coarsen(f), cl, cr);
                r.holds = std::abs(coarse - r.empirical_constant) <= options.stability * r.empirical_constant;
                break;
            }
            case InequalityKind::morse: {
                r.empirical_constant = morse_ratio(f, g, lambda, r.lhs, r.rhs);
                double cl = 0.0, cr = 0.0;
                const double coarse = morse_ratio(coarsen(f), coarsen(g), lambda, cl, cr);
                r.holds = std::abs(coarse - r.empirical_constant) <= options.stability * r.empirical_constant;
                break;
            }
        }
        if (kind == InequalityKind::hardy1 || kind == InequalityKind::hardy2 || kind == InequalityKind::trace) {
            r.empirical_constant = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
            r.holds = r.lhs <= r.rhs * (1.0 + options.tol);
        }
        out.push_back(r);
    }
    return out;
}

std::vector<ScalarField> random_decaying_samples(const GridPtr& grid, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
    std::vector<ScalarField> out;
    out.reserve(count);
    for (int s = 0; s < count; ++s) {
        const double c0 = uni(0.5, 1.5), c1 = uni(-0.5, 0.5), c2 = uni(-0.5, 0.5);
        const double p1 = uni(0.0, Grid2D::x_period), p2 = uni(0.0, Grid2D::x_period);
        const double a = uni(-0.5, 1.0), b = uni(0.0, 0.5), beta = uni(1.0, 2.5);
        out.push_back(ScalarField::from_function(grid, [=](double x, double y) {
            return (c0 + c1 * std::cos(x + p1) + c2 * std::sin(2.0 * x + p2)) * (1.0 + a * y + b * y * y) *
                   std::exp(-beta * y);
        }));
    }
    return out;
}

}  // namespace prandtl
