#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace prandtl {

/// Periodic-in-x, truncated-half-line-in-y structured grid on 𝕋 × [0, y_max].
///
/// x nodes are x_i = i·2π/nx. y nodes are arbitrary but strictly increasing
/// from 0 to y_max; the finite-difference weights for ∂_y and ∂_y² and the
/// trapezoidal quadrature weights are precomputed once per grid.
class Grid2D {
public:
    static constexpr double x_period = 2.0 * std::numbers::pi;

    /// Grid with a uniform (stretch = 0) or tanh-clustered (stretch > 0)
    /// y distribution. Throws ConfigError on invalid sizes.
    static std::shared_ptr<const Grid2D> make(int nx, int ny, double y_max, double stretch = 0.0);

    /// Grid on caller-supplied y nodes (used for 2× coarsening and refinement).
    static std::shared_ptr<const Grid2D> from_nodes(int nx, std::vector<double> y_nodes);

    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return static_cast<int>(y_.size()); }
    std::size_t size() const noexcept { return static_cast<std::size_t>(nx_) * y_.size(); }
    double dx() const noexcept { return x_period / nx_; }
    double x(int i) const noexcept { return i * dx(); }
    double y(int j) const noexcept { return y_[j]; }
    double y_max() const noexcept { return y_.back(); }
    double stretch() const noexcept { return stretch_; }
    std::span<const double> y_nodes() const noexcept { return y_; }

    /// Smallest y spacing.
    double min_dy() const noexcept { return min_dy_; }
    /// Largest y spacing (the h of refinement studies).
    double max_dy() const noexcept { return max_dy_; }

    /// ⟨y⟩ = 1 + y.
    static double weight(double y) noexcept { return 1.0 + y; }

    /// Trapezoid weights in y.
    std::span<const double> quad_weights() const noexcept { return wq_; }

    // Three-point stencils for ∂_y (second order everywhere) and ∂_y²
    // (three points in the interior, four-point one-sided at both ends).
    struct Stencil {
        int first;        // index of the first node used
        double w[4];      // weights; unused slots are zero
        int count;
    };
    const Stencil& d1(int j) const noexcept { return d1_[j]; }
    const Stencil& d2(int j) const noexcept { return d2_[j]; }

    /// Same y nodes, different nx.
    std::shared_ptr<const Grid2D> with_nx(int nx) const;

private:
    Grid2D(int nx, std::vector<double> y, double stretch);

    int nx_;
    double stretch_;
    std::vector<double> y_;
    std::vector<double> wq_;
    std::vector<Stencil> d1_;
    std::vector<Stencil> d2_;
    double min_dy_ = 0.0;
    double max_dy_ = 0.0;
};

using GridPtr = std::shared_ptr<const Grid2D>;

/// Convenience free function mirroring Grid2D::make.
GridPtr make_grid(int nx, int ny, double y_max, double stretch = 0.0);

/// nx × ny real field. Storage is x-major with y contiguous, so every
/// x-column is a contiguous span (the unit of the tridiagonal y-solves).
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridPtr grid, double fill = 0.0);
    ScalarField(GridPtr grid, std::vector<double> values);

    /// Samples f(x, y) on the grid nodes.
    static ScalarField from_function(GridPtr grid, const std::function<double(double, double)>& f);
    /// x-independent field from a profile over y (size ny).
    static ScalarField from_profile(GridPtr grid, std::span<const double> profile);

    const GridPtr& grid_ptr() const noexcept { return grid_; }
    const Grid2D& grid() const noexcept { return *grid_; }
    int nx() const noexcept { return grid_->nx(); }
    int ny() const noexcept { return grid_->ny(); }

    double& operator()(int i, int j) noexcept { return v_[index(i, j)]; }
    double operator()(int i, int j) const noexcept { return v_[index(i, j)]; }

    std::span<double> column(int i) noexcept {
        return {v_.data() + static_cast<std::size_t>(i) * ny(), static_cast<std::size_t>(ny())};
    }
    std::span<const double> column(int i) const noexcept {
        return {v_.data() + static_cast<std::size_t>(i) * ny(), static_cast<std::size_t>(ny())};
    }
    std::vector<double>& values() noexcept { return v_; }
    const std::vector<double>& values() const noexcept { return v_; }

    bool all_finite() const noexcept;
    double max() const;
    double min() const;
    double max_abs() const;

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(const ScalarField& o);
    ScalarField& operator/=(const ScalarField& o);
    ScalarField& operator+=(double a);
    ScalarField& operator*=(double a);

    /// Applies f to every value.
    template <class F>
    ScalarField map(F&& f) const {
        ScalarField r(grid_);
        for (std::size_t k = 0; k < v_.size(); ++k) r.v_[k] = f(v_[k]);
        return r;
    }

private:
    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(grid_->ny()) + j;
    }

    GridPtr grid_;
    std::vector<double> v_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, const ScalarField& b);
ScalarField operator/(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
ScalarField operator*(ScalarField a, double s);
ScalarField operator+(ScalarField a, double s);
ScalarField operator-(ScalarField a);

/// Multiplies every value at height y by ⟨y⟩^p.
ScalarField weighted(const ScalarField& f, double power);

/// Weight exponents for the unsteady energy: γ on vorticity and good
/// unknowns, σ on density and on the pointwise vorticity bound.
struct WeightParams {
    double gamma = 2.0;
    double sigma = 3.0;
};

}  // namespace prandtl
