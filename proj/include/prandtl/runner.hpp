#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prandtl/energy.hpp"
#include "prandtl/grid.hpp"
#include "prandtl/inequalities.hpp"
#include "prandtl/steady.hpp"

namespace prandtl {

struct GridConfig {
    int nx = 32;
    int ny = 200;
    double y_max = 20.0;
    double stretch = 0.0;
};

struct UnsteadyConfig {
    double eps = 1e-3;
    double dt = 1e-3;
    double t_final = 0.1;
    int s_order = 2;
    double amplitude = 0.05;
    double delta_bl = 0.0;  // 0: derived from the data
    double kappa1 = 0.25;
    double kappa2 = 4.0;
    // Data builder and solver knobs.
    double rho_inf = 1.0;
    double u_inf = 1.0;
    double wall_slope = 1.0;
    double y_c = 0.25;
    int profile_order = 5;
    double cfl_max = 0.5;
};

struct SteadyConfig {
    std::vector<double> theta_schedule{1e-1, 1e-2, 1e-3, 0.0};
    double dx = 0.01;
    double L = 0.1;
    int m = 3;
    double sigma_tilde = 2.0;
    double kappa3 = 0.0;  // 0: ½ min ρ₀
    double picard_tol = 1e-10;
    int picard_max_iters = 50;
    // Data builder.
    double rho_inf = 1.0;
    double rho_amp = 0.5;
    double u_inf = 1.0;
    double wall_slope = 0.5;
    double y_c = 1.0;
    int profile_order = 6;
};

struct OutputConfig {
    std::string dir = "out";
    int snapshot_every = 1;  // 0: first and last state only
    int csv_precision = 17;  // significant digits
};

enum class CompatProfile { blend, tanh, erf };

struct CompatConfig {
    CompatProfile profile = CompatProfile::blend;
    int order = 5;
};

struct InequalityConfig {
    int samples = 100;
    int nx = 16;
    int ny = 601;
    double y_max = 30.0;
    double hardy1_lambda = 1.5;
    double hardy2_lambda = -1.0;
    double unspecified_lambda = 2.0;  // sobolev_inf and morse
};

enum class ConvergenceAxis { h, dt, eps, theta };

struct ConvergenceConfig {
    ConvergenceAxis axis = ConvergenceAxis::h;
    int levels = 3;
};

/// Parsed INI document with defaults filled in. sections lists the
/// sections present in the document.
struct RunConfig {
    GridConfig grid;
    WeightParams weights;
    UnsteadyConfig unsteady;
    SteadyConfig steady;
    OutputConfig output;
    CompatConfig compat;
    InequalityConfig inequalities;
    ConvergenceConfig convergence;
    std::uint64_t seed = 20261016;
    std::set<std::string> sections;
};

/// Parses and validates an INI document. Syntax errors are ConfigError with
/// the line number; unknown sections or keys, malformed values and violated
/// constraints are ConfigError naming the key or constraint. [grid] is
/// required. Keys describing a non-constant outer flow are rejected: the
/// outer flow is the constant (u_inf, rho_inf).
RunConfig parse_config(const std::string& text);

/// parse_config on a file; IoError when it cannot be read.
RunConfig load_config(const std::filesystem::path& path);

enum class Subcommand { unsteady, steady, verify_identities, check_compat, inequalities };

const char* to_string(Subcommand cmd) noexcept;
/// "unsteady", "steady", "verify-identities", "check-compat", "inequalities";
/// UsageError otherwise.
Subcommand subcommand_from_string(const std::string& name);

const char* to_string(ConvergenceAxis axis) noexcept;
ConvergenceAxis convergence_axis_from_string(const std::string& name);

enum class ScenarioStatus { completed, life_span_exceeded, blow_up, iteration_divergence };

const char* to_string(ScenarioStatus status) noexcept;

/// status ≠ completed ⇒ summary holds "failure" and "failure_time" or
/// "failure_station" (plus "failure_iteration" for Picard divergence).
struct ScenarioResult {
    ScenarioStatus status = ScenarioStatus::completed;
    std::vector<std::string> artifacts;
    std::vector<std::pair<std::string, std::string>> summary;

    /// Value of a summary key, empty when absent.
    std::string get(const std::string& key) const;
};

/// Runs one scenario and writes its files under config.output.dir:
///   unsteady           energy.csv, profiles.csv, summary.json
///   steady             steady.csv, picard.csv, steady_profiles.csv, summary.json
///   verify-identities  identities.csv, summary.json
///   check-compat       compat.csv, compat.txt, summary.json
///   inequalities       inequality.csv, summary.json
/// unsteady and verify-identities need [weights] and [unsteady] in the
/// document, steady needs [steady] (ConfigError otherwise). Monitor
/// failures, blow-up and Picard divergence become statuses; other errors
/// propagate. Identical configs give byte-identical files.
ScenarioResult run_scenario(const RunConfig& config, Subcommand cmd);

struct ConvergenceRow {
    int level = 0;
    double parameter = 0.0;
    double error = 0.0;
    double observed_order = 0.0;  // NaN where undefined
};

/// Runs at geometric levels of one parameter.
///   h      heat-reduction data (x-independent, ρ ≡ ρ_∞), ny·2^l nodes and
///          dt/2^l; error = sup |u − heat_oracle| at t_final
///   dt     dt/2^l on the configured grid and data
///   eps    eps/10^l
///   theta  θ-schedule θ₀/10^l with θ₀ the first configured entry
/// For dt, eps and theta the error of level l ≥ 1 is the distance
/// ‖·_l − ·_{l−1}‖ (sup for dt and theta, L² for eps); observed_order is
/// log(e_{l−1}/e_l)/log(ratio). Throws UsageError when levels < 3 and
/// ConfigError when the document lacks [unsteady] (h), [weights] and
/// [unsteady] (dt, eps) or [steady] (theta).
std::vector<ConvergenceRow> convergence_study(const RunConfig& config, ConvergenceAxis axis, int levels);

/// convergence_study plus convergence.csv and summary.json under
/// config.output.dir; the summary holds error_<l> and order_<l> per row.
ScenarioResult run_convergence(const RunConfig& config, ConvergenceAxis axis, int levels);

/// Fixed CSV headers.
inline constexpr const char* energy_csv_header = "t,E_total,E_w,E_rho,E_gu,E_linf,D_total,min_w_sigma,rho_min,rho_max";
inline constexpr const char* steady_csv_header = "x,X_total,Y_total,dyu_wall,r0_residual,phi_last";
inline constexpr const char* inequality_csv_header = "kind,sample_id,lhs,rhs,holds,empirical_constant";
inline constexpr const char* convergence_csv_header = "level,parameter,error,observed_order";

/// Scientific notation with the given number of significant digits.
std::string format_number(double v, int precision = 17);

/// Each writer creates dir when needed, writes header plus one row per
/// element with '\n' line ends and returns the file path. IoError on
/// failure.
std::string write_energy_csv(std::span<const EnergyReport> rows, const std::filesystem::path& dir,
                             int precision = 17);
std::string write_steady_csv(std::span<const SteadySeriesRow> rows, const std::filesystem::path& dir,
                             int precision = 17);
std::string write_inequality_csv(std::span<const InequalityReport> rows, const std::filesystem::path& dir,
                                 int precision = 17);
std::string write_convergence_csv(std::span<const ConvergenceRow> rows, const std::filesystem::path& dir,
                                  int precision = 17);

}  // namespace prandtl
