#include "prandtl/operators.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>

#include "prandtl/errors.hpp"

namespace prandtl {

std::vector<double> fd_weights(double z, std::span<const double> x, int m) {
    // Fornberg, "Generation of finite difference formulas on arbitrarily
    // spaced grids" (1988), single-point variant.
    const int n = static_cast<int>(x.size()) - 1;
    if (n < m) throw UsageError("fd_weights: not enough nodes for the requested derivative order");
    std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n + 1);
    for (int i = 0; i <= n; ++i) w[i] = c[i][m];
    return w;
}

namespace {

struct FftPlans {
    fftw_plan forward;
    fftw_plan backward;
};

// FFTW planning is not thread-safe; execution with the new-array interface is.
const FftPlans& plans_for(int nx, int ny) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, FftPlans> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find({nx, ny});
    if (it != cache.end()) return it->second;
    const int nk = nx / 2 + 1;
    double* in = fftw_alloc_real(static_cast<std::size_t>(nx) * ny);
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(nk) * ny);
    int n[1] = {nx};
    FftPlans p;
    p.forward = fftw_plan_many_dft_r2c(1, n, ny, in, nullptr, ny, 1, out, nullptr, ny, 1, FFTW_ESTIMATE);
    p.backward = fftw_plan_many_dft_c2r(1, n, ny, out, nullptr, ny, 1, in, nullptr, ny, 1, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    return cache.emplace(std::make_pair(nx, ny), p).first->second;
}

class Spectrum {
public:
    explicit Spectrum(const ScalarField& f) : grid_(f.grid_ptr()) {
        const int nx = grid_->nx(), ny = grid_->ny();
        nk_ = nx / 2 + 1;
        real_ = fftw_alloc_real(static_cast<std::size_t>(nx) * ny);
        modes_ = fftw_alloc_complex(static_cast<std::size_t>(nk_) * ny);
        std::copy(f.values().begin(), f.values().end(), real_);
        fftw_execute_dft_r2c(plans_for(nx, ny).forward, real_, modes_);
    }
    ~Spectrum() {
        fftw_free(real_);
        fftw_free(modes_);
    }
    Spectrum(const Spectrum&) = delete;
    Spectrum& operator=(const Spectrum&) = delete;

    int modes() const { return nk_; }
    std::complex<double>* mode(int k) {
        return reinterpret_cast<std::complex<double>*>(modes_ + static_cast<std::size_t>(k) * grid_->ny());
    }

    ScalarField to_field() {
        const int nx = grid_->nx(), ny = grid_->ny();
        fftw_execute_dft_c2r(plans_for(nx, ny).backward, modes_, real_);
        ScalarField r(grid_);
        const double scale = 1.0 / nx;
        for (std::size_t k = 0; k < r.values().size(); ++k) r.values()[k] = real_[k] * scale;
        return r;
    }

private:
    GridPtr grid_;
    int nk_;
    double* real_;
    fftw_complex* modes_;
};

}  // namespace

ScalarField ddx(const ScalarField& f, int order) {
    if (order < 0) throw UsageError("ddx: negative order");
    if (order == 0) return f;
    const int nx = f.nx(), ny = f.ny();
    Spectrum sp(f);
    static const std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (int k = 0; k < sp.modes(); ++k) {
        std::complex<double> factor = ipow[order % 4] * std::pow(static_cast<double>(k), order);
        if (2 * k == nx && order % 2 == 1) factor = 0.0;
        auto* m = sp.mode(k);
        for (int j = 0; j < ny; ++j) m[j] *= factor;
    }
    return sp.to_field();
}

ScalarField fourier_heat(const ScalarField& f, double eps, double tau) {
    if (eps == 0.0 || tau == 0.0) return f;
    const int ny = f.ny();
    Spectrum sp(f);
    for (int k = 0; k < sp.modes(); ++k) {
        const double factor = std::exp(-eps * static_cast<double>(k) * k * tau);
        auto* m = sp.mode(k);
        for (int j = 0; j < ny; ++j) m[j] *= factor;
    }
    return sp.to_field();
}

namespace {

void apply_stencil_column(const Grid2D& g, std::span<const double> in, std::span<double> out, int order) {
    const int ny = g.ny();
    for (int j = 0; j < ny; ++j) {
        const auto& s = order == 1 ? g.d1(j) : g.d2(j);
        double acc = 0.0;
        for (int q = 0; q < s.count; ++q) acc += s.w[q] * in[s.first + q];
        out[j] = acc;
    }
}

// Orders ≥ 3: one (order + 2)-point stencil per node, as centered as the
// ends allow. Composing the low-order stencils instead loses accuracy near
// the boundaries at every application.
struct HighStencils {
    int n = 0;
    std::vector<int> first;
    std::vector<double> w;  // ny × n
};

HighStencils high_stencils(const Grid2D& g, int order) {
    const int ny = g.ny();
    HighStencils h;
    h.n = std::min(order + 2, ny);
    if (h.n <= order) throw UsageError("ddy: too few y nodes for the requested order");
    h.first.resize(ny);
    h.w.resize(static_cast<std::size_t>(ny) * h.n);
    const auto y = g.y_nodes();
    for (int j = 0; j < ny; ++j) {
        const int f = std::clamp(j - h.n / 2, 0, ny - h.n);
        h.first[j] = f;
        const auto wts = fd_weights(y[j], y.subspan(f, h.n), order);
        std::copy(wts.begin(), wts.end(), h.w.begin() + static_cast<std::ptrdiff_t>(j) * h.n);
    }
    return h;
}

void apply_high_column(const HighStencils& h, std::span<const double> in, std::span<double> out) {
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double* w = h.w.data() + j * h.n;
        double acc = 0.0;
        for (int q = 0; q < h.n; ++q) acc += w[q] * in[h.first[j] + q];
        out[j] = acc;
    }
}

}  // namespace

ScalarField ddy(const ScalarField& f, int order) {
    if (order < 0) throw UsageError("ddy: negative order");
    if (order == 0) return f;
    ScalarField r(f.grid_ptr());
    if (order > 2) {
        const HighStencils h = high_stencils(f.grid(), order);
        for (int i = 0; i < f.nx(); ++i) apply_high_column(h, f.column(i), r.column(i));
        return r;
    }
    for (int i = 0; i < f.nx(); ++i) apply_stencil_column(f.grid(), f.column(i), r.column(i), order);
    return r;
}

ScalarField partial(const ScalarField& f, int ax, int ay) {
    ScalarField r = ax > 0 ? ddx(f, ax) : f;
    return ay > 0 ? ddy(r, ay) : r;
}

std::vector<double> ddy_profile(const Grid2D& grid, std::span<const double> f, int order) {
    if (static_cast<int>(f.size()) != grid.ny()) throw UsageError("ddy_profile: length mismatch");
    if (order == 0) return {f.begin(), f.end()};
    std::vector<double> out(f.size());
    if (order > 2)
        apply_high_column(high_stencils(grid, order), f, out);
    else
        apply_stencil_column(grid, f, out, order);
    return out;
}

std::vector<double> cumulative_trapezoid(std::span<const double> y, std::span<const double> f) {
    std::vector<double> r(f.size(), 0.0);
    for (std::size_t j = 1; j < f.size(); ++j) r[j] = r[j - 1] + 0.5 * (y[j] - y[j - 1]) * (f[j] + f[j - 1]);
    return r;
}

double integrate_profile(const Grid2D& grid, std::span<const double> f) {
    const auto w = grid.quad_weights();
    double acc = 0.0;
    for (int j = 0; j < grid.ny(); ++j) acc += w[j] * f[j];
    return acc;
}

double integrate(const ScalarField& f) {
    const auto& g = f.grid();
    double acc = 0.0;
    for (int i = 0; i < g.nx(); ++i) acc += integrate_profile(g, f.column(i));
    return acc * g.dx();
}

double weighted_l2_squared(const ScalarField& f, double lambda) {
    const auto& g = f.grid();
    const auto w = g.quad_weights();
    std::vector<double> wy(g.ny());
    for (int j = 0; j < g.ny(); ++j) wy[j] = w[j] * std::pow(Grid2D::weight(g.y(j)), 2.0 * lambda);
    double acc = 0.0;
    for (int i = 0; i < g.nx(); ++i) {
        const auto c = f.column(i);
        for (int j = 0; j < g.ny(); ++j) acc += wy[j] * c[j] * c[j];
    }
    return acc * g.dx();
}

double weighted_norm(const ScalarField& f, int s, double lambda, NormMode mode) {
    if (s < 0 || s > 6) throw UsageError("weighted_norm: s must lie in [0, 6]");
    double total = 0.0;
    if (mode == NormMode::single_L2) {
        total = weighted_l2_squared(f, lambda);
    } else {
        for (int a1 = 0; a1 <= s; ++a1) {
            ScalarField fx = ddx(f, a1);
            ScalarField fy = fx;
            for (int a2 = 0; a1 + a2 <= s; ++a2) {
                if (a2 > 0) fy = ddy(fy, 1);
                total += weighted_l2_squared(fy, lambda + a2);
            }
        }
    }
    const double r = std::sqrt(total);
    if (!std::isfinite(r)) throw NumericalOverflow("weighted_norm: non-finite result");
    return r;
}

double l2_norm_window(const ScalarField& f, double y_lo, double y_hi) {
    const auto& g = f.grid();
    // Trapezoid on the node subset inside the window.
    double acc = 0.0;
    for (int i = 0; i < g.nx(); ++i) {
        const auto c = f.column(i);
        for (int j = 0; j + 1 < g.ny(); ++j) {
            if (g.y(j) < y_lo || g.y(j + 1) > y_hi) continue;
            const double h = g.y(j + 1) - g.y(j);
            acc += 0.5 * h * (c[j] * c[j] + c[j + 1] * c[j + 1]);
        }
    }
    return std::sqrt(acc * g.dx());
}

double sup_norm(const ScalarField& f) { return f.max_abs(); }

bool solve_tridiagonal(std::span<const double> a, std::span<const double> b, std::span<const double> c,
                       std::span<double> rhs) {
    const std::size_t n = b.size();
    std::vector<double> cp(n);
    double denom = b[0];
    if (denom == 0.0 || !std::isfinite(denom)) return false;
    cp[0] = c[0] / denom;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = b[i] - a[i] * cp[i - 1];
        if (denom == 0.0 || !std::isfinite(denom)) return false;
        cp[i] = i + 1 < n ? c[i] / denom : 0.0;
        rhs[i] = (rhs[i] - a[i] * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= cp[i] * rhs[i + 1];
    return true;
}

}  // namespace prandtl
