#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prandtl/grid.hpp"

namespace prandtl {

enum class InequalityKind { hardy1, hardy2, sobolev_inf, trace, morse };

const char* to_string(InequalityKind kind) noexcept;
InequalityKind inequality_kind_from_string(const std::string& name);

struct InequalityReport {
    InequalityKind kind = InequalityKind::hardy1;
    int sample_id = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    double empirical_constant = 0.0;
};

struct InequalityOptions {
    /// Relative slack for the kinds with explicit constants.
    double tol = 1e-6;
    /// Allowed relative change of the empirical constant under one 2×
    /// coarsening, for sobolev_inf and morse.
    double stability = 0.2;
};

/// Evaluates one inequality on every sample.
///
///  hardy1  ‖f⟨y⟩^λ‖ ≤ 2/(2λ+1)·‖∂_y f⟨y⟩^{λ+1}‖,                  λ > -1/2
///  hardy2  ‖f⟨y⟩^λ‖ ≤ √(-1/(2λ+1))·‖f|_{y=0}‖ - 2/(2λ+1)·‖∂_y f⟨y⟩^{λ+1}‖, λ < -1/2
///  trace   ∫ f g|_{y=0} dx ≤ ‖∂_y f‖‖g‖ + ‖f‖‖∂_y g‖
///  sobolev_inf  ‖f‖_∞ ≤ C(‖f‖ + ‖∂ₓf‖ + ‖∂_y²f‖)
///  morse   ‖∂ₓf ∂_y g ⟨y⟩^{λ+1}‖ ≤ C‖f‖_{H³_{λ/2}}‖g‖_{H³_{λ/2}}
///
/// For trace and morse, sample i is paired with sample (i+1) mod n. The
/// last two kinds have no explicit constant: the ratio lhs/rhs is
/// recorded and `holds` means it moved by less than options.stability
/// when the sample is restricted to the 2×-coarsened grid.
///
/// Throws DomainError when λ violates the kind's precondition and
/// DataError when a hardy1 sample does not decay at y_max.
std::vector<InequalityReport> run_inequality_suite(InequalityKind kind, std::span<const ScalarField> samples,
                                                   double lambda, const InequalityOptions& options = {});

/// Smooth, decaying random fields
/// (c₀ + c₁cos(x+φ₁) + c₂sin(2x+φ₂))(1 + a y + b y²)e^{-βy}.
std::vector<ScalarField> random_decaying_samples(const GridPtr& grid, int count, std::uint64_t seed);

/// Restriction to every other x node and every other y node (the last y
/// node is always kept).
ScalarField coarsen(const ScalarField& f);

}  // namespace prandtl
