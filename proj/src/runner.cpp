#include "prandtl/runner.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "prandtl/compat.hpp"
#include "prandtl/errors.hpp"
#include "prandtl/good_unknowns.hpp"
#include "prandtl/operators.hpp"
#include "prandtl/unsteady.hpp"

namespace prandtl {

namespace fs = std::filesystem;

const char* to_string(Subcommand cmd) noexcept {
    switch (cmd) {
        case Subcommand::unsteady: return "unsteady";
        case Subcommand::steady: return "steady";
        case Subcommand::verify_identities: return "verify-identities";
        case Subcommand::check_compat: return "check-compat";
        case Subcommand::inequalities: return "inequalities";
    }
    return "unknown";
}

Subcommand subcommand_from_string(const std::string& name) {
    for (auto c : {Subcommand::unsteady, Subcommand::steady, Subcommand::verify_identities, Subcommand::check_compat,
                   Subcommand::inequalities})
        if (name == to_string(c)) return c;
    throw UsageError("unknown subcommand '" + name + "'");
}

const char* to_string(ConvergenceAxis axis) noexcept {
    switch (axis) {
        case ConvergenceAxis::h: return "h";
        case ConvergenceAxis::dt: return "dt";
        case ConvergenceAxis::eps: return "eps";
        case ConvergenceAxis::theta: return "theta";
    }
    return "unknown";
}

ConvergenceAxis convergence_axis_from_string(const std::string& name) {
    for (auto a : {ConvergenceAxis::h, ConvergenceAxis::dt, ConvergenceAxis::eps, ConvergenceAxis::theta})
        if (name == to_string(a)) return a;
    throw UsageError("unknown convergence axis '" + name + "' (expected h, dt, eps or theta)");
}

const char* to_string(ScenarioStatus status) noexcept {
    switch (status) {
        case ScenarioStatus::completed: return "completed";
        case ScenarioStatus::life_span_exceeded: return "life_span_exceeded";
        case ScenarioStatus::blow_up: return "blow_up";
        case ScenarioStatus::iteration_divergence: return "iteration_divergence";
    }
    return "unknown";
}

std::string ScenarioResult::get(const std::string& key) const {
    for (const auto& [k, v] : summary)
        if (k == key) return v;
    return {};
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

[[noreturn]] void bad_value(const std::string& where, const std::string& what, const std::string& v) {
    throw ConfigError("config: " + where + ": expected " + what + ", got '" + v + "'");
}

double parse_double(const std::string& where, const std::string& raw) {
    const std::string v = trim(raw);
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty() || !std::isfinite(out))
        bad_value(where, "a finite number", raw);
    return out;
}

int parse_int(const std::string& where, const std::string& raw) {
    const std::string v = trim(raw);
    int out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad_value(where, "an integer", raw);
    return out;
}

std::uint64_t parse_u64(const std::string& where, const std::string& raw) {
    const std::string v = trim(raw);
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad_value(where, "a non-negative integer", raw);
    return out;
}

std::vector<double> parse_list(const std::string& where, const std::string& raw) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(raw);
    while (std::getline(is, item, ','))
        if (!trim(item).empty()) out.push_back(parse_double(where, item));
    if (out.empty()) bad_value(where, "a comma-separated list of numbers", raw);
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string& where, const std::string& value)>;
using KeyTable = std::map<std::string, Setter>;

template <class T, class S>
Setter dbl(T S::*sec, double T::*field) {
    return [=](RunConfig& c, const std::string& w, const std::string& v) { (c.*sec).*field = parse_double(w, v); };
}
template <class T, class S>
Setter integer(T S::*sec, int T::*field) {
    return [=](RunConfig& c, const std::string& w, const std::string& v) { (c.*sec).*field = parse_int(w, v); };
}

const std::map<std::string, KeyTable>& key_tables() {
    static const std::map<std::string, KeyTable> t = [] {
        std::map<std::string, KeyTable> m;
        using C = RunConfig;
        m["grid"] = {
            {"nx", integer(&C::grid, &GridConfig::nx)},
            {"ny", integer(&C::grid, &GridConfig::ny)},
            {"y_max", dbl(&C::grid, &GridConfig::y_max)},
            {"stretch", dbl(&C::grid, &GridConfig::stretch)},
        };
        m["weights"] = {
            {"gamma", dbl(&C::weights, &WeightParams::gamma)},
            {"sigma", dbl(&C::weights, &WeightParams::sigma)},
        };
        m["unsteady"] = {
            {"eps", dbl(&C::unsteady, &UnsteadyConfig::eps)},
            {"dt", dbl(&C::unsteady, &UnsteadyConfig::dt)},
            {"t_final", dbl(&C::unsteady, &UnsteadyConfig::t_final)},
            {"s_order", integer(&C::unsteady, &UnsteadyConfig::s_order)},
            {"amplitude", dbl(&C::unsteady, &UnsteadyConfig::amplitude)},
            {"delta_bl", dbl(&C::unsteady, &UnsteadyConfig::delta_bl)},
            {"kappa1", dbl(&C::unsteady, &UnsteadyConfig::kappa1)},
            {"kappa2", dbl(&C::unsteady, &UnsteadyConfig::kappa2)},
            {"rho_inf", dbl(&C::unsteady, &UnsteadyConfig::rho_inf)},
            {"u_inf", dbl(&C::unsteady, &UnsteadyConfig::u_inf)},
            {"wall_slope", dbl(&C::unsteady, &UnsteadyConfig::wall_slope)},
            {"y_c", dbl(&C::unsteady, &UnsteadyConfig::y_c)},
            {"profile_order", integer(&C::unsteady, &UnsteadyConfig::profile_order)},
            {"cfl_max", dbl(&C::unsteady, &UnsteadyConfig::cfl_max)},
        };
        m["steady"] = {
            {"theta_schedule",
             [](C& c, const std::string& w, const std::string& v) { c.steady.theta_schedule = parse_list(w, v); }},
            {"dx", dbl(&C::steady, &SteadyConfig::dx)},
            {"L", dbl(&C::steady, &SteadyConfig::L)},
            {"m", integer(&C::steady, &SteadyConfig::m)},
            {"sigma_tilde", dbl(&C::steady, &SteadyConfig::sigma_tilde)},
            {"kappa3", dbl(&C::steady, &SteadyConfig::kappa3)},
            {"picard_tol", dbl(&C::steady, &SteadyConfig::picard_tol)},
            {"picard_max_iters", integer(&C::steady, &SteadyConfig::picard_max_iters)},
            {"rho_inf", dbl(&C::steady, &SteadyConfig::rho_inf)},
            {"rho_amp", dbl(&C::steady, &SteadyConfig::rho_amp)},
            {"u_inf", dbl(&C::steady, &SteadyConfig::u_inf)},
            {"wall_slope", dbl(&C::steady, &SteadyConfig::wall_slope)},
            {"y_c", dbl(&C::steady, &SteadyConfig::y_c)},
            {"profile_order", integer(&C::steady, &SteadyConfig::profile_order)},
        };
        m["output"] = {
            {"dir", [](C& c, const std::string&, const std::string& v) { c.output.dir = trim(v); }},
            {"snapshot_every", integer(&C::output, &OutputConfig::snapshot_every)},
            {"csv_precision", integer(&C::output, &OutputConfig::csv_precision)},
        };
        m["compat"] = {
            {"profile",
             [](C& c, const std::string& w, const std::string& v) {
                 const std::string s = trim(v);
                 if (s == "blend")
                     c.compat.profile = CompatProfile::blend;
                 else if (s == "tanh")
                     c.compat.profile = CompatProfile::tanh;
                 else if (s == "erf")
                     c.compat.profile = CompatProfile::erf;
                 else
                     bad_value(w, "blend, tanh or erf", v);
             }},
            {"order", integer(&C::compat, &CompatConfig::order)},
        };
        m["inequalities"] = {
            {"samples", integer(&C::inequalities, &InequalityConfig::samples)},
            {"nx", integer(&C::inequalities, &InequalityConfig::nx)},
            {"ny", integer(&C::inequalities, &InequalityConfig::ny)},
            {"y_max", dbl(&C::inequalities, &InequalityConfig::y_max)},
            {"hardy1_lambda", dbl(&C::inequalities, &InequalityConfig::hardy1_lambda)},
            {"hardy2_lambda", dbl(&C::inequalities, &InequalityConfig::hardy2_lambda)},
            {"unspecified_lambda", dbl(&C::inequalities, &InequalityConfig::unspecified_lambda)},
            {"seed", [](C& c, const std::string& w, const std::string& v) { c.seed = parse_u64(w, v); }},
        };
        m["convergence"] = {
            {"axis",
             [](C& c, const std::string& w, const std::string& v) {
                 try {
                     c.convergence.axis = convergence_axis_from_string(trim(v));
                 } catch (const UsageError&) {
                     bad_value(w, "h, dt, eps or theta", v);
                 }
             }},
            {"levels", integer(&C::convergence, &ConvergenceConfig::levels)},
        };
        return m;
    }();
    return t;
}

bool outer_flow_key(const std::string& key) {
    for (const char* s : {"outer", "pressure", "dpdx", "dp_dx", "u_e", "bernoulli"})
        if (key.find(s) != std::string::npos) return true;
    return false;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
}

SteadyParams steady_params(const SteadyConfig& s) {
    SteadyParams p;
    p.theta_schedule = s.theta_schedule;
    p.dx = s.dx;
    p.L = s.L;
    p.m = s.m;
    p.sigma_tilde = s.sigma_tilde;
    p.kappa3 = s.kappa3;
    p.picard_tol = s.picard_tol;
    p.picard_max_iters = s.picard_max_iters;
    return p;
}

void validate(const RunConfig& c) {
    require(c.sections.count("grid") == 1, "missing [grid] section");
    const auto& g = c.grid;
    require(g.nx >= 4, "[grid] nx ≥ 4 violated");
    require(g.ny >= 16, "[grid] ny ≥ 16 violated");
    require(g.y_max >= 10.0, "[grid] y_max ≥ 10 violated");
    require(g.stretch >= 0.0, "[grid] stretch ≥ 0 violated");

    require_weights(c.weights);

    const auto& u = c.unsteady;
    require(u.eps >= 0.0, "[unsteady] eps ≥ 0 violated");
    require(u.dt > 0.0, "[unsteady] dt > 0 violated");
    require(u.t_final >= 0.0, "[unsteady] t_final ≥ 0 violated");
    require(u.s_order >= 1 && u.s_order <= 6, "[unsteady] s_order in [1, 6] violated");
    require(u.amplitude >= 0.0, "[unsteady] amplitude ≥ 0 violated");
    require(u.delta_bl >= 0.0, "[unsteady] delta_bl ≥ 0 violated");
    require(u.kappa1 > 0.0 && 2.0 * u.kappa1 < 0.5 * u.kappa2, "[unsteady] 0 < 2·kappa1 < kappa2/2 violated");
    require(u.rho_inf >= 2.0 * u.kappa1 && u.rho_inf <= 0.5 * u.kappa2,
            "[unsteady] 2·kappa1 ≤ rho_inf ≤ kappa2/2 violated");
    require(u.u_inf > 0.0, "[unsteady] u_inf > 0 violated");
    require(u.wall_slope > 0.0, "[unsteady] wall_slope > 0 violated");
    require(u.y_c > 0.0, "[unsteady] y_c > 0 violated");
    require(u.wall_slope * u.y_c < u.u_inf, "[unsteady] wall_slope·y_c < u_inf violated");
    require(u.profile_order >= 0 && u.profile_order <= 6, "[unsteady] profile_order in [0, 6] violated");
    require(u.cfl_max > 0.0, "[unsteady] cfl_max > 0 violated");

    const auto& s = c.steady;
    try {
        validate_steady_params(steady_params(s));
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("config: [steady] ") + e.what());
    }
    require(s.kappa3 >= 0.0, "[steady] kappa3 ≥ 0 violated");
    require(s.rho_inf > 0.0 && s.rho_inf + std::min(s.rho_amp, 0.0) > 0.0, "[steady] rho_inf + min(rho_amp, 0) > 0 violated");
    require(s.u_inf > 0.0, "[steady] u_inf > 0 violated");
    require(s.wall_slope > 0.0, "[steady] wall_slope > 0 violated");
    require(s.y_c > 0.0, "[steady] y_c > 0 violated");
    require(s.wall_slope * s.y_c < s.u_inf, "[steady] wall_slope·y_c < u_inf violated");
    require(s.profile_order >= 0 && s.profile_order <= 6, "[steady] profile_order in [0, 6] violated");

    require(!c.output.dir.empty(), "[output] dir must not be empty");
    require(c.output.snapshot_every >= 0, "[output] snapshot_every ≥ 0 violated");
    require(c.output.csv_precision >= 1 && c.output.csv_precision <= 17, "[output] csv_precision in [1, 17] violated");

    require(c.compat.order >= 0 && c.compat.order <= 5, "[compat] order in [0, 5] violated");

    const auto& q = c.inequalities;
    require(q.samples >= 1, "[inequalities] samples ≥ 1 violated");
    require(q.nx >= 4 && q.ny >= 16 && q.y_max >= 10.0, "[inequalities] grid needs nx ≥ 4, ny ≥ 16, y_max ≥ 10");
    require(q.hardy1_lambda > -0.5, "[inequalities] hardy1_lambda > -1/2 violated");
    require(q.hardy2_lambda < -0.5, "[inequalities] hardy2_lambda < -1/2 violated");

    require(c.convergence.levels >= 1, "[convergence] levels ≥ 1 violated");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        std::ostringstream os;
        os << "config: parse error at line " << e.line() << ": " << e.message();
        throw ConfigError(os.str());
    }
    RunConfig c;
    const auto& tables = key_tables();
    auto table = [&](const std::string& section) {
        if (outer_flow_key(section))
            throw ConfigError("config: non-constant outer flow [" + section +
                              "] is not supported; the outer flow is the constant (u_inf, rho_inf)");
        const auto t = tables.find(section);
        if (t == tables.end()) throw ConfigError("config: unknown section [" + section + "]");
        c.sections.insert(section);
        return t;
    };
    // read_ini drops sections without keys; they still count as present.
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);) {
        const std::string l = trim(line);
        if (l.size() >= 2 && l.front() == '[' && l.back() == ']') table(trim(l.substr(1, l.size() - 2)));
    }
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("config: key '" + section + "' outside any section");
        const auto t = table(section);
        for (const auto& [key, node] : body) {
            const std::string where = "[" + section + "] " + key;
            if (!node.empty()) throw ConfigError("config: " + where + ": nested keys are not supported");
            if (outer_flow_key(key))
                throw ConfigError("config: " + where +
                                  ": non-constant outer flow is not supported; the outer flow is the constant "
                                  "(u_inf, rho_inf)");
            const auto s = t->second.find(key);
            if (s == t->second.end()) throw ConfigError("config: unknown key " + where);
            s->second(c, where, node.data());
        }
    }
    validate(c);
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("config: cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

// ---------------------------------------------------------------------------
// Output

std::string format_number(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*e", std::clamp(precision, 1, 17) - 1, v);
    return buf;
}

namespace {

std::string write_file(const fs::path& dir, const std::string& name, const std::string& content) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
    return path.string();
}

class Csv {
public:
    Csv(const std::string& header, int precision) : precision_(precision) { os_ << header << '\n'; }
    Csv& num(double v) { return cell(format_number(v, precision_)); }
    Csv& integer(long long v) { return cell(std::to_string(v)); }
    Csv& text(const std::string& s) { return cell(s); }
    void end() {
        os_ << '\n';
        first_ = true;
    }
    std::string str() const { return os_.str(); }

private:
    Csv& cell(const std::string& s) {
        if (!first_) os_ << ',';
        os_ << s;
        first_ = false;
        return *this;
    }
    std::ostringstream os_;
    int precision_;
    bool first_ = true;
};

}  // namespace

std::string write_energy_csv(std::span<const EnergyReport> rows, const fs::path& dir, int precision) {
    Csv csv(energy_csv_header, precision);
    for (const auto& r : rows) {
        csv.num(r.t).num(r.E_total).num(r.E_w).num(r.E_rho).num(r.E_gu).num(r.E_linf).num(r.D_total);
        csv.num(r.min_w_sigma).num(r.rho_min).num(r.rho_max).end();
    }
    return write_file(dir, "energy.csv", csv.str());
}

std::string write_steady_csv(std::span<const SteadySeriesRow> rows, const fs::path& dir, int precision) {
    Csv csv(steady_csv_header, precision);
    for (const auto& r : rows)
        csv.num(r.x).num(r.X_total).num(r.Y_total).num(r.dyu_wall).num(r.r0_residual).num(r.phi_last).end();
    return write_file(dir, "steady.csv", csv.str());
}

std::string write_inequality_csv(std::span<const InequalityReport> rows, const fs::path& dir, int precision) {
    Csv csv(inequality_csv_header, precision);
    for (const auto& r : rows)
        csv.text(to_string(r.kind))
            .integer(r.sample_id)
            .num(r.lhs)
            .num(r.rhs)
            .integer(r.holds ? 1 : 0)
            .num(r.empirical_constant)
            .end();
    return write_file(dir, "inequality.csv", csv.str());
}

std::string write_convergence_csv(std::span<const ConvergenceRow> rows, const fs::path& dir, int precision) {
    Csv csv(convergence_csv_header, precision);
    for (const auto& r : rows) csv.integer(r.level).num(r.parameter).num(r.error).num(r.observed_order).end();
    return write_file(dir, "convergence.csv", csv.str());
}

// ---------------------------------------------------------------------------
// Scenarios

namespace {

void put(ScenarioResult& r, const std::string& key, const std::string& value) { r.summary.emplace_back(key, value); }
void put(ScenarioResult& r, const std::string& key, const char* value) { put(r, key, std::string(value)); }
void put(ScenarioResult& r, const std::string& key, double value) { put(r, key, format_number(value)); }
void put(ScenarioResult& r, const std::string& key, int value) { put(r, key, std::to_string(value)); }
void put(ScenarioResult& r, const std::string& key, std::size_t value) { put(r, key, std::to_string(value)); }
void put(ScenarioResult& r, const std::string& key, bool value) { put(r, key, value ? "true" : "false"); }

void write_summary(ScenarioResult& r, const fs::path& dir, const std::string& cmd) {
    nlohmann::ordered_json j;
    j["subcommand"] = cmd;
    j["status"] = to_string(r.status);
    r.artifacts.push_back((dir / "summary.json").string());
    // Names relative to dir so that the file does not depend on where it lives.
    std::vector<std::string> names;
    for (const auto& a : r.artifacts) names.push_back(fs::path(a).filename().string());
    j["artifacts"] = names;
    nlohmann::ordered_json s = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.summary) s[k] = v;
    j["summary"] = s;
    write_file(dir, "summary.json", j.dump(2) + "\n");
}

GridPtr config_grid(const RunConfig& c, int ny_scale = 1) {
    return make_grid(c.grid.nx, (c.grid.ny - 1) * ny_scale + 1, c.grid.y_max, c.grid.stretch);
}

struct UnsteadySetup {
    GridPtr grid;
    UnsteadyData data;
    UnsteadyParams params;
    MonitorConfig monitors;
};

UnsteadyParams unsteady_params(const UnsteadyConfig& u) {
    UnsteadyParams p;
    p.eps = u.eps;
    p.rho_inf = u.rho_inf;
    p.u_inf = u.u_inf;
    p.dt = u.dt;
    p.t_final = u.t_final;
    p.cfl_max = u.cfl_max;
    p.s_order = u.s_order;
    return p;
}

UnsteadySetup unsteady_setup(const RunConfig& c, double amplitude, GridPtr grid = nullptr) {
    const auto& u = c.unsteady;
    UnsteadySetup s;
    s.grid = grid ? grid : config_grid(c);
    UnsteadyDataParams dp;
    dp.rho_inf = u.rho_inf;
    dp.u_inf = u.u_inf;
    dp.wall_slope = u.wall_slope;
    dp.y_c = u.y_c;
    dp.m = u.profile_order;
    s.data = build_unsteady_data(c.weights, u.delta_bl, u.kappa1, u.kappa2, amplitude, s.grid, dp);
    s.params = unsteady_params(u);
    s.monitors.weights = c.weights;
    s.monitors.s_max = u.s_order;
    s.monitors.delta_bl = s.data.delta_bl;
    s.monitors.kappa1 = u.kappa1;
    s.monitors.kappa2 = u.kappa2;
    s.monitors.snapshot_every = c.output.snapshot_every;
    return s;
}

int step_count(double t_final, double dt) {
    return t_final > 0.0 ? static_cast<int>(std::ceil(t_final / dt - 1e-9)) : 0;
}

// Series indices of the states run_unsteady keeps as snapshots.
std::vector<std::size_t> snapshot_rows(std::size_t recorded, int steps, int every) {
    std::vector<std::size_t> idx{0};
    for (std::size_t i = 1; i < recorded; ++i)
        if (every > 0 && i % every == 0 && static_cast<int>(i) != steps) idx.push_back(i);
    if (steps > 0) idx.push_back(recorded - 1);
    return idx;
}

UnsteadyState run_to(UnsteadyState s, UnsteadyParams p) {
    const int n = step_count(p.t_final, p.dt);
    if (n > 0) p.dt = p.t_final / n;
    for (int k = 0; k < n; ++k) s = step_unsteady(s, p);
    return s;
}

ScenarioResult scenario_unsteady(const RunConfig& c) {
    const fs::path dir = c.output.dir;
    const int prec = c.output.csv_precision;
    const auto su = unsteady_setup(c, c.unsteady.amplitude);
    const auto s0 = init_unsteady(su.data.rho0, su.data.u0, su.params);
    ScenarioResult r;
    const int steps = step_count(su.params.t_final, su.params.dt);
    put(r, "steps", steps);
    put(r, "delta_bl", su.monitors.delta_bl);
    put(r, "min_w_sigma_0", su.data.min_w_sigma);
    put(r, "cfl_0", cfl_number(s0, steps > 0 ? su.params.t_final / steps : su.params.dt));
    try {
        const auto run = run_unsteady(s0, su.params, su.monitors);
        std::vector<EnergyReport> rows;
        for (std::size_t i : snapshot_rows(run.series.size(), steps, c.output.snapshot_every))
            rows.push_back(run.series[i]);
        r.artifacts.push_back(write_energy_csv(rows, dir, prec));

        Csv prof("t,y,rho,u,v,w", prec);
        for (const auto& s : run.snapshots)
            for (int j = 0; j < s.u.ny(); ++j)
                prof.num(s.t).num(s.u.grid().y(j)).num(s.rho(0, j)).num(s.u(0, j)).num(s.v(0, j)).num(s.w(0, j)).end();
        r.artifacts.push_back(write_file(dir, "profiles.csv", prof.str()));

        const double e0 = run.series.front().E_total;
        double emax = e0, rho_lo = run.series.front().rho_min, rho_hi = run.series.front().rho_max;
        std::vector<EnergyReport> alive;
        for (const auto& e : run.series) {
            if (e.t <= run.T0) {
                alive.push_back(e);
                emax = std::max(emax, e.E_total);
            }
            rho_lo = std::min(rho_lo, e.rho_min);
            rho_hi = std::max(rho_hi, e.rho_max);
        }
        const auto env = check_principle_envelope(alive);
        put(r, "T0", run.T0);
        put(r, "energy_interval", run.energy_interval);
        put(r, "E_total_0", e0);
        put(r, "E_total_max", emax);
        put(r, "energy_ratio", emax / e0);
        put(r, "envelope_passed", env.passed);
        put(r, "lambda_fit", env.lambda_fit);
        put(r, "rho_min_0", run.series.front().rho_min);
        put(r, "rho_max_0", run.series.front().rho_max);
        put(r, "rho_min", rho_lo);
        put(r, "rho_max", rho_hi);
        put(r, "min_w_sigma_final", run.series.back().min_w_sigma);
        if (run.status == RunStatus::life_span_exceeded) {
            r.status = ScenarioStatus::life_span_exceeded;
            put(r, "failure", run.failure);
            put(r, "failure_time", run.series.back().t);
        }
    } catch (const BlowUpError& e) {
        r.status = ScenarioStatus::blow_up;
        r.artifacts.push_back(write_energy_csv({}, dir, prec));
        put(r, "failure", e.what());
        put(r, "failure_time", e.time());
    } catch (const StepError& e) {
        r.status = ScenarioStatus::blow_up;
        r.artifacts.push_back(write_energy_csv({}, dir, prec));
        put(r, "failure", e.what());
        put(r, "failure_time", e.at());
        put(r, "suggested_dt", e.suggested_dt());
    }
    return r;
}

InitialData1D steady_data(const RunConfig& c, std::span<const double> y) {
    const auto& s = c.steady;
    return build_u0_blend(s.wall_slope, s.u_inf, s.y_c, s.profile_order, y, s.rho_inf, s.rho_amp);
}

std::string first_failure(const SteadyMonitorRow& m) {
    if (!m.wall_ok) return "wall slope d_y u(x,0) >= 2 lambda0 violated";
    if (!m.rho_ok) return "density floor rho >= kappa3 violated";
    if (!m.near_ok) return "near-wall bound u >= lambda0 y on [0, delta] violated";
    return "far-field bound u >= xi0 on [delta/2, y_max] violated";
}

ScenarioResult scenario_steady(const RunConfig& c) {
    const fs::path dir = c.output.dir;
    const int prec = c.output.csv_precision;
    const auto g = make_grid(4, c.grid.ny, c.grid.y_max, c.grid.stretch);
    const auto y = g->y_nodes();
    const auto d = steady_data(c, y);
    const auto p = steady_params(c.steady);
    ScenarioResult r;
    try {
        const auto run = run_steady(y, d.rho0, d.u0, p);
        r.artifacts.push_back(write_steady_csv(run.series, dir, prec));

        Csv pic("theta,k,phi,sup_diff", prec);
        for (const auto& dg : run.diagnostics)
            for (std::size_t k = 0; k < dg.phi_series.size(); ++k)
                pic.num(dg.theta).integer(static_cast<long long>(k + 1)).num(dg.phi_series[k]).num(dg.sup_diff[k]).end();
        r.artifacts.push_back(write_file(dir, "picard.csv", pic.str()));

        Csv prof("x,y,rho,u,q,dq", prec);
        for (const auto& s : run.slab)
            for (std::size_t j = 0; j < y.size(); ++j)
                prof.num(s.x).num(y[j]).num(s.rho[j]).num(s.u[j]).num(s.q[j]).num(s.dq[j]).end();
        r.artifacts.push_back(write_file(dir, "steady_profiles.csv", prof.str()));

        const auto& dd = run.data;
        put(r, "lambda0", dd.lambda0);
        put(r, "delta_nb", dd.delta_nb);
        put(r, "xi0", dd.xi0);
        put(r, "kappa3", dd.kappa3);
        bool converged = true;
        double ratio = 0.0;
        for (const auto& dg : run.diagnostics) {
            converged = converged && dg.converged;
            ratio = std::max(ratio, dg.contraction_ratio);
            put(r, "iterations_theta_" + format_number(dg.theta, 3), dg.k_done);
        }
        put(r, "picard_converged", converged);
        put(r, "contraction_ratio_max", ratio);
        for (std::size_t i = 0; i < run.theta_distances.size(); ++i)
            put(r, "theta_distance_" + std::to_string(i + 1), run.theta_distances[i]);
        put(r, "theta_cauchy", run.cauchy);
        const double theta = p.theta_schedule.back();
        const auto res = r0_residuals(y, run.slab, run.prev, dd.r0(theta), theta);
        put(r, "r0_residual_x0", res.front());
        put(r, "r0_residual_max", *std::max_element(res.begin(), res.end()));
        put(r, "L_a", run.L_a);
        const double x_end = run.slab.back().x;
        put(r, "x_end", x_end);
        for (const auto& m : run.monitors)
            if (!m.all()) {
                r.status = ScenarioStatus::life_span_exceeded;
                put(r, "failure", first_failure(m));
                put(r, "failure_station", m.x);
                break;
            }
    } catch (const LifeSpanExceeded& e) {
        r.status = ScenarioStatus::life_span_exceeded;
        r.artifacts.push_back(write_steady_csv({}, dir, prec));
        put(r, "failure", e.what());
        put(r, "failure_station", e.station());
    } catch (const IterationDivergence& e) {
        r.status = ScenarioStatus::iteration_divergence;
        r.artifacts.push_back(write_steady_csv({}, dir, prec));
        put(r, "failure", e.what());
        put(r, "failure_iteration", e.iteration());
        put(r, "failure_station", p.L);
    } catch (const StepError& e) {
        r.status = ScenarioStatus::blow_up;
        r.artifacts.push_back(write_steady_csv({}, dir, prec));
        put(r, "failure", e.what());
        put(r, "failure_station", e.at());
    }
    return r;
}

ScenarioResult scenario_identities(const RunConfig& c) {
    const fs::path dir = c.output.dir;
    const int prec = c.output.csv_precision;
    ScenarioResult r;
    Csv csv("check,s,residual_norm,grid_h", prec);
    auto row = [&](const std::string& name, int s, const GoodUnknownResidual& g) {
        csv.text(name).integer(s).num(g.residual_norm).num(g.grid_h).end();
        put(r, name + "_s" + std::to_string(s), g.residual_norm);
    };

    const auto su = unsteady_setup(c, c.unsteady.amplitude);
    const auto s0 = init_unsteady(su.data.rho0, su.data.u0, su.params);
    const auto s1 = step_unsteady(s0, su.params);
    const auto s2 = step_unsteady(s1, su.params);
    const int smax = std::min(c.unsteady.s_order, 3);
    for (int s = 1; s <= smax; ++s) row("quotient_identity", s, verify_quotient_identity(s1, s));
    for (int s = 1; s <= smax; ++s) {
        row("wg_equation", s, residual_good_unknown_equation(ResidualKind::wg_equation, {s0, s1, s2}, su.params, s));
        row("rhog_equation", s,
            residual_good_unknown_equation(ResidualKind::rhog_equation, {s0, s1, s2}, su.params, s));
    }
    row("boundary_reduction_1_data", 0, verify_boundary_reduction_1(s0));
    row("boundary_reduction_1_step2", 0, verify_boundary_reduction_1(s2));

    const auto flat = unsteady_setup(c, 0.0, su.grid);
    const auto f0 = init_unsteady(flat.data.rho0, flat.data.u0, flat.params);
    for (int s = 1; s <= smax; ++s) row("quotient_identity_x_independent", s, verify_quotient_identity(f0, s));
    r.artifacts.push_back(write_file(dir, "identities.csv", csv.str()));
    return r;
}

InitialData1D compat_data(const RunConfig& c, std::span<const double> y) {
    const auto& u = c.unsteady;
    if (c.compat.profile == CompatProfile::blend)
        return build_u0_blend(u.wall_slope, u.u_inf, u.y_c, u.profile_order, y, u.rho_inf);
    InitialData1D d;
    d.y.assign(y.begin(), y.end());
    d.rho0.assign(y.size(), u.rho_inf);
    d.kappa3 = 0.5 * u.rho_inf;
    const double k = u.wall_slope / u.u_inf;
    for (double yj : y)
        d.u0.push_back(c.compat.profile == CompatProfile::tanh ? u.u_inf * std::tanh(k * yj)
                                                               : u.u_inf * std::erf(0.5 * std::sqrt(std::numbers::pi) * k * yj));
    return d;
}

ScenarioResult scenario_compat(const RunConfig& c) {
    const fs::path dir = c.output.dir;
    const int prec = c.output.csv_precision;
    const auto g = make_grid(4, c.grid.ny, c.grid.y_max, c.grid.stretch);
    const auto report = check_compat(compat_data(c, g->y_nodes()), c.compat.order);
    ScenarioResult r;
    Csv csv("name,order,value,threshold,pass", prec);
    std::ostringstream txt;
    txt << "condition                 order  value                    threshold                pass\n";
    for (const auto& e : report.entries) {
        csv.text(e.name).integer(e.order).num(e.value).num(e.threshold).integer(e.pass ? 1 : 0).end();
        char line[256];
        std::snprintf(line, sizeof line, "%-25s %5d  %-24s %-24s %s\n", e.name.c_str(), e.order,
                      format_number(e.value, prec).c_str(), format_number(e.threshold, prec).c_str(),
                      e.pass ? "yes" : "NO");
        txt << line;
    }
    r.artifacts.push_back(write_file(dir, "compat.csv", csv.str()));
    r.artifacts.push_back(write_file(dir, "compat.txt", txt.str()));
    put(r, "pass", report.pass);
    put(r, "overall_order_m", report.overall_order_m);
    int first_fail = -1;
    for (const auto& e : report.entries)
        if (!e.pass && (first_fail < 0 || e.order < first_fail)) first_fail = e.order;
    put(r, "first_failing_order", first_fail);
    put(r, "weights_admissible", validate_weights(c.weights.gamma, c.weights.sigma));
    return r;
}

ScenarioResult scenario_inequalities(const RunConfig& c) {
    const auto& q = c.inequalities;
    const auto g = make_grid(q.nx, q.ny, q.y_max);
    const auto samples = random_decaying_samples(g, q.samples, c.seed);
    std::vector<InequalityReport> all;
    ScenarioResult r;
    put(r, "seed", std::to_string(c.seed));
    for (auto [kind, lam] : {std::pair{InequalityKind::hardy1, q.hardy1_lambda},
                             std::pair{InequalityKind::hardy2, q.hardy2_lambda}, std::pair{InequalityKind::trace, 0.0},
                             std::pair{InequalityKind::sobolev_inf, q.unspecified_lambda},
                             std::pair{InequalityKind::morse, q.unspecified_lambda}}) {
        const auto rows = run_inequality_suite(kind, samples, lam);
        bool holds = true;
        double cmax = 0.0;
        for (const auto& e : rows) {
            holds = holds && e.holds;
            cmax = std::max(cmax, e.empirical_constant);
        }
        put(r, std::string(to_string(kind)) + "_all_hold", holds);
        put(r, std::string(to_string(kind)) + "_max_constant", cmax);
        all.insert(all.end(), rows.begin(), rows.end());
    }
    put(r, "rows", all.size());
    r.artifacts.push_back(write_inequality_csv(all, c.output.dir, c.output.csv_precision));
    return r;
}

}  // namespace

namespace {

void require_sections(const RunConfig& c, std::initializer_list<const char*> names, const std::string& what) {
    for (const char* n : names)
        if (c.sections.count(n) == 0) throw ConfigError("config: " + what + " needs a [" + n + "] section");
}

}  // namespace

ScenarioResult run_scenario(const RunConfig& c, Subcommand cmd) {
    switch (cmd) {
        case Subcommand::unsteady:
        case Subcommand::verify_identities: require_sections(c, {"weights", "unsteady"}, to_string(cmd)); break;
        case Subcommand::steady: require_sections(c, {"steady"}, to_string(cmd)); break;
        case Subcommand::check_compat:
        case Subcommand::inequalities: break;
    }
    ScenarioResult r;
    switch (cmd) {
        case Subcommand::unsteady: r = scenario_unsteady(c); break;
        case Subcommand::steady: r = scenario_steady(c); break;
        case Subcommand::verify_identities: r = scenario_identities(c); break;
        case Subcommand::check_compat: r = scenario_compat(c); break;
        case Subcommand::inequalities: r = scenario_inequalities(c); break;
    }
    write_summary(r, c.output.dir, to_string(cmd));
    return r;
}

// ---------------------------------------------------------------------------
// Convergence

namespace {

double sup_distance(const UnsteadyState& a, const UnsteadyState& b) {
    return (a.u - b.u).max_abs() + (a.rho - b.rho).max_abs();
}

double l2_distance(const UnsteadyState& a, const UnsteadyState& b) {
    return std::sqrt(weighted_l2_squared(a.u - b.u, 0.0) + weighted_l2_squared(a.rho - b.rho, 0.0));
}

void fill_orders(std::vector<ConvergenceRow>& rows, double ratio) {
    for (std::size_t i = 0; i < rows.size(); ++i)
        rows[i].observed_order = i == 0 ? std::numeric_limits<double>::quiet_NaN()
                                        : std::log(rows[i - 1].error / rows[i].error) / std::log(ratio);
}

}  // namespace

std::vector<ConvergenceRow> convergence_study(const RunConfig& c, ConvergenceAxis axis, int levels) {
    if (levels < 3) throw UsageError("convergence_study: at least 3 levels are needed");
    const std::string what = std::string("convergence along ") + to_string(axis);
    switch (axis) {
        case ConvergenceAxis::h: require_sections(c, {"unsteady"}, what); break;
        case ConvergenceAxis::dt:
        case ConvergenceAxis::eps: require_sections(c, {"weights", "unsteady"}, what); break;
        case ConvergenceAxis::theta: require_sections(c, {"steady"}, what); break;
    }
    std::vector<ConvergenceRow> rows;
    const auto& u = c.unsteady;
    switch (axis) {
        case ConvergenceAxis::h: {
            const BlendProfile prof(u.wall_slope, u.u_inf, u.y_c, u.profile_order);
            for (int l = 0; l < levels; ++l) {
                const auto g = make_grid(4, (c.grid.ny - 1) * (1 << l) + 1, c.grid.y_max, c.grid.stretch);
                const auto d = build_u0_blend(u.wall_slope, u.u_inf, u.y_c, u.profile_order, g->y_nodes(), u.rho_inf);
                auto p = unsteady_params(u);
                p.dt = u.dt / (1 << l);
                const auto s = run_to(init_unsteady(ScalarField(g, u.rho_inf), ScalarField::from_profile(g, d.u0), p), p);
                const double y_max = g->y_max();
                const auto ref = heat_oracle(
                    u.rho_inf, [&](double y) { return y >= y_max ? u.u_inf : prof.value(y); }, g->y_nodes(),
                    s.t, {4, p.dt, 10});
                double e = 0.0;
                for (int j = 0; j < g->ny(); ++j) e = std::max(e, std::abs(s.u(0, j) - ref[j]));
                rows.push_back({l, g->max_dy(), e, 0.0});
            }
            fill_orders(rows, 2.0);
            break;
        }
        case ConvergenceAxis::dt:
        case ConvergenceAxis::eps: {
            const auto su = unsteady_setup(c, u.amplitude);
            const double ratio = axis == ConvergenceAxis::dt ? 2.0 : 10.0;
            UnsteadyState prev;
            for (int l = 0; l < levels; ++l) {
                auto p = su.params;
                double param;
                if (axis == ConvergenceAxis::dt)
                    param = p.dt = u.dt / std::pow(ratio, l);
                else
                    param = p.eps = u.eps / std::pow(ratio, l);
                const auto s = run_to(init_unsteady(su.data.rho0, su.data.u0, p), p);
                if (l > 0)
                    rows.push_back({l, param, axis == ConvergenceAxis::dt ? sup_distance(s, prev) : l2_distance(s, prev), 0.0});
                prev = s;
            }
            fill_orders(rows, ratio);
            break;
        }
        case ConvergenceAxis::theta: {
            const auto g = make_grid(4, c.grid.ny, c.grid.y_max, c.grid.stretch);
            const auto d = steady_data(c, g->y_nodes());
            auto p = steady_params(c.steady);
            const double th0 = c.steady.theta_schedule.front();
            if (!(th0 > 0.0)) throw UsageError("convergence_study: theta axis needs a positive first theta");
            p.theta_schedule.clear();
            for (int l = 0; l < levels; ++l) p.theta_schedule.push_back(th0 / std::pow(10.0, l));
            const auto run = run_steady(g->y_nodes(), d.rho0, d.u0, p);
            for (std::size_t i = 0; i < run.theta_distances.size(); ++i)
                rows.push_back({static_cast<int>(i + 1), p.theta_schedule[i + 1], run.theta_distances[i], 0.0});
            fill_orders(rows, 10.0);
            break;
        }
    }
    return rows;
}

ScenarioResult run_convergence(const RunConfig& c, ConvergenceAxis axis, int levels) {
    const auto rows = convergence_study(c, axis, levels);
    ScenarioResult r;
    put(r, "axis", to_string(axis));
    for (const auto& row : rows) {
        put(r, "error_" + std::to_string(row.level), row.error);
        put(r, "order_" + std::to_string(row.level), row.observed_order);
    }
    r.artifacts.push_back(write_convergence_csv(rows, c.output.dir, c.output.csv_precision));
    write_summary(r, c.output.dir, "convergence");
    return r;
}

}  // namespace prandtl
