#include "prandtl/grid.hpp"

#include <algorithm>
#include <sstream>

#include "prandtl/errors.hpp"
#include "prandtl/operators.hpp"

namespace prandtl {

namespace {

Grid2D::Stencil make_stencil(std::span<const double> y, int first, int count, int at, int order) {
    Grid2D::Stencil s{first, {0.0, 0.0, 0.0, 0.0}, count};
    auto w = fd_weights(y[at], y.subspan(first, count), order);
    std::copy(w.begin(), w.end(), s.w);
    return s;
}

}  // namespace

Grid2D::Grid2D(int nx, std::vector<double> y, double stretch)
    : nx_(nx), stretch_(stretch), y_(std::move(y)) {
    const int n = static_cast<int>(y_.size());
    wq_.assign(n, 0.0);
    min_dy_ = y_[1] - y_[0];
    max_dy_ = min_dy_;
    for (int j = 0; j + 1 < n; ++j) {
        const double h = y_[j + 1] - y_[j];
        wq_[j] += 0.5 * h;
        wq_[j + 1] += 0.5 * h;
        min_dy_ = std::min(min_dy_, h);
        max_dy_ = std::max(max_dy_, h);
    }
    d1_.resize(n);
    d2_.resize(n);
    for (int j = 0; j < n; ++j) {
        if (j == 0) {
            d1_[j] = make_stencil(y_, 0, 3, j, 1);
            d2_[j] = make_stencil(y_, 0, 4, j, 2);
        } else if (j == n - 1) {
            d1_[j] = make_stencil(y_, n - 3, 3, j, 1);
            d2_[j] = make_stencil(y_, n - 4, 4, j, 2);
        } else {
            d1_[j] = make_stencil(y_, j - 1, 3, j, 1);
            d2_[j] = make_stencil(y_, j - 1, 3, j, 2);
        }
    }
}

GridPtr Grid2D::make(int nx, int ny, double y_max, double stretch) {
    if (nx < 4) throw ConfigError("grid: nx must be at least 4 (got " + std::to_string(nx) + ")");
    if (ny < 16) throw ConfigError("grid: ny must be at least 16 (got " + std::to_string(ny) + ")");
    if (!(y_max >= 10.0)) {
        std::ostringstream os;
        os << "grid: y_max must be at least 10 (got " << y_max << ")";
        throw ConfigError(os.str());
    }
    if (!(stretch >= 0.0)) throw ConfigError("grid: stretch must be non-negative");
    std::vector<double> y(ny);
    for (int j = 0; j < ny; ++j) {
        const double eta = static_cast<double>(j) / (ny - 1);
        if (stretch == 0.0) {
            y[j] = y_max * eta;
        } else {
            y[j] = y_max * (1.0 - std::tanh(stretch * (1.0 - eta)) / std::tanh(stretch));
        }
    }
    y.front() = 0.0;
    y.back() = y_max;
    return GridPtr(new Grid2D(nx, std::move(y), stretch));
}

GridPtr Grid2D::from_nodes(int nx, std::vector<double> y_nodes) {
    if (nx < 4) throw ConfigError("grid: nx must be at least 4");
    if (y_nodes.size() < 4) throw ConfigError("grid: at least 4 y nodes required");
    if (y_nodes.front() != 0.0) throw ConfigError("grid: first y node must be 0");
    for (std::size_t j = 1; j < y_nodes.size(); ++j) {
        if (!(y_nodes[j] > y_nodes[j - 1])) throw ConfigError("grid: y nodes must be strictly increasing");
    }
    return GridPtr(new Grid2D(nx, std::move(y_nodes), 0.0));
}

GridPtr Grid2D::with_nx(int nx) const {
    if (nx < 4) throw ConfigError("grid: nx must be at least 4");
    return GridPtr(new Grid2D(nx, y_, stretch_));
}

GridPtr make_grid(int nx, int ny, double y_max, double stretch) {
    return Grid2D::make(nx, ny, y_max, stretch);
}

ScalarField::ScalarField(GridPtr grid, double fill) : grid_(std::move(grid)), v_(grid_->size(), fill) {}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), v_(std::move(values)) {
    if (v_.size() != grid_->size()) throw UsageError("field: value count does not match grid");
}

ScalarField ScalarField::from_function(GridPtr grid, const std::function<double(double, double)>& f) {
    ScalarField r(grid);
    for (int i = 0; i < grid->nx(); ++i)
        for (int j = 0; j < grid->ny(); ++j) r(i, j) = f(grid->x(i), grid->y(j));
    return r;
}

ScalarField ScalarField::from_profile(GridPtr grid, std::span<const double> profile) {
    if (static_cast<int>(profile.size()) != grid->ny()) throw UsageError("field: profile length must equal ny");
    ScalarField r(grid);
    for (int i = 0; i < grid->nx(); ++i) std::copy(profile.begin(), profile.end(), r.column(i).begin());
    return r;
}

bool ScalarField::all_finite() const noexcept {
    return std::all_of(v_.begin(), v_.end(), [](double a) { return std::isfinite(a); });
}

double ScalarField::max() const { return *std::max_element(v_.begin(), v_.end()); }
double ScalarField::min() const { return *std::min_element(v_.begin(), v_.end()); }
double ScalarField::max_abs() const {
    double m = 0.0;
    for (double a : v_) m = std::max(m, std::abs(a));
    return m;
}

namespace {
void check_same(const ScalarField& a, const ScalarField& b) {
    if (a.values().size() != b.values().size()) throw UsageError("field: shape mismatch");
}
}  // namespace

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    check_same(*this, o);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
    return *this;
}
ScalarField& ScalarField::operator-=(const ScalarField& o) {
    check_same(*this, o);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
    return *this;
}
ScalarField& ScalarField::operator*=(const ScalarField& o) {
    check_same(*this, o);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] *= o.v_[k];
    return *this;
}
ScalarField& ScalarField::operator/=(const ScalarField& o) {
    check_same(*this, o);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] /= o.v_[k];
    return *this;
}
ScalarField& ScalarField::operator+=(double a) {
    for (double& x : v_) x += a;
    return *this;
}
ScalarField& ScalarField::operator*=(double a) {
    for (double& x : v_) x *= a;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
ScalarField operator/(ScalarField a, const ScalarField& b) { return a /= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
ScalarField operator*(ScalarField a, double s) { return a *= s; }
ScalarField operator+(ScalarField a, double s) { return a += s; }
ScalarField operator-(ScalarField a) { return a *= -1.0; }

ScalarField weighted(const ScalarField& f, double power) {
    ScalarField r = f;
    const auto& g = f.grid();
    std::vector<double> w(g.ny());
    for (int j = 0; j < g.ny(); ++j) w[j] = std::pow(Grid2D::weight(g.y(j)), power);
    for (int i = 0; i < g.nx(); ++i) {
        auto c = r.column(i);
        for (int j = 0; j < g.ny(); ++j) c[j] *= w[j];
    }
    return r;
}

}  // namespace prandtl
