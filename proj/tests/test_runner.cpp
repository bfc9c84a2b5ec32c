#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "prandtl/errors.hpp"
#include "prandtl/runner.hpp"

using namespace prandtl;
namespace fs = std::filesystem;

namespace {

const std::string small_grid = "[grid]\nnx = 8\nny = 100\ny_max = 20\n";

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "prandtl_test_runner" / name;
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

const std::string weights = "[weights]\ngamma = 2\nsigma = 3\n";

RunConfig config(const std::string& extra, const fs::path& dir) {
    auto c = parse_config(small_grid + weights + extra);
    c.output.dir = dir.string();
    return c;
}

std::string config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("parse_config: defaults and values") {
    const auto c = parse_config(small_grid + "[weights]\ngamma = 2\nsigma = 3\n[steady]\ntheta_schedule = 0.1, 0.01, 0\n");
    CHECK(c.grid.nx == 8);
    CHECK(c.grid.ny == 100);
    CHECK(c.weights.gamma == 2.0);
    CHECK(c.weights.sigma == 3.0);
    CHECK(c.steady.theta_schedule == std::vector<double>{0.1, 0.01, 0.0});
    CHECK(c.unsteady.eps == 1e-3);
    CHECK(c.output.csv_precision == 17);
    CHECK(c.sections.count("weights") == 1);
}

TEST_CASE("parse_config: rejected documents") {
    CHECK(config_error(small_grid + "[weights]\ngamma = 2\nsigma = 4\n").find("σ ≤ 2γ−1") != std::string::npos);
    CHECK(config_error("[weights]\ngamma = 2\n").find("missing [grid]") != std::string::npos);
    CHECK(config_error(small_grid + "[unsteady]\nfoo = 1\n").find("unknown key [unsteady] foo") != std::string::npos);
    CHECK(config_error(small_grid + "[bogus]\na = 1\n").find("unknown section [bogus]") != std::string::npos);
    CHECK(config_error(small_grid + "[outer_flow]\nu_e = 1\n").find("outer flow") != std::string::npos);
    CHECK(config_error(small_grid + "[steady]\ndpdx = 0.1\n").find("outer flow") != std::string::npos);
    CHECK(config_error(small_grid + "[unsteady]\ndt = 1e-3x\n").find("[unsteady] dt") != std::string::npos);
    CHECK(config_error(small_grid + "[unsteady]\ndt = -1\n").find("dt > 0") != std::string::npos);
    CHECK(config_error(small_grid + "[compat]\nprofile = cubic\n").find("[compat] profile") != std::string::npos);
    CHECK(config_error("[grid]\nnx = 8\n[grid\n").find("line 3") != std::string::npos);
    CHECK(config_error("nx = 8\n" + small_grid).find("outside any section") != std::string::npos);
    CHECK(parse_config(small_grid + "[steady]\n").sections.count("steady") == 1);
    CHECK_THROWS_AS(load_config("/nonexistent/prandtl.ini"), IoError);
}

TEST_CASE("subcommand and axis names round-trip") {
    for (auto s : {Subcommand::unsteady, Subcommand::steady, Subcommand::verify_identities, Subcommand::check_compat,
                   Subcommand::inequalities})
        CHECK(subcommand_from_string(to_string(s)) == s);
    for (auto a : {ConvergenceAxis::h, ConvergenceAxis::dt, ConvergenceAxis::eps, ConvergenceAxis::theta})
        CHECK(convergence_axis_from_string(to_string(a)) == a);
    CHECK_THROWS_AS(subcommand_from_string("bogus"), UsageError);
}

TEST_CASE("csv writers: header-only on empty input, fixed format") {
    const auto d = fresh_dir("writers");
    CHECK(slurp(write_energy_csv({}, d)) == std::string(energy_csv_header) + "\n");
    CHECK(slurp(write_steady_csv({}, d)) == std::string(steady_csv_header) + "\n");
    CHECK(slurp(write_inequality_csv({}, d)) == std::string(inequality_csv_header) + "\n");
    CHECK(slurp(write_convergence_csv({}, d)) == std::string(convergence_csv_header) + "\n");

    CHECK(format_number(0.1) == "1.0000000000000001e-01");
    CHECK(format_number(-2.5, 3) == "-2.50e+00");
    CHECK(std::stod(format_number(M_PI)) == M_PI);

    std::vector<InequalityReport> rows{{InequalityKind::trace, 7, 1.5, 2.0, true, 0.75}};
    const auto body = lines(slurp(write_inequality_csv(rows, d, 4)));
    REQUIRE(body.size() == 2);
    CHECK(body[1] == "trace,7,1.500e+00,2.000e+00,1,7.500e-01");
}

TEST_CASE("unsteady scenario: snapshot rows, byte-identical reruns, summary") {
    const auto d = fresh_dir("unsteady");
    const auto c = config("[unsteady]\ndt = 5e-3\nt_final = 0.02\n[output]\nsnapshot_every = 2\n", d);
    const auto r = run_scenario(c, Subcommand::unsteady);
    CHECK(r.status == ScenarioStatus::completed);
    CHECK(r.get("steps") == "4");
    // t = 0, 0.01 and the final state.
    const auto energy = slurp(d / "energy.csv");
    CHECK(lines(energy).size() == 1 + 3);
    CHECK(lines(energy).front() == energy_csv_header);
    const auto profiles = slurp(d / "profiles.csv");
    CHECK(lines(profiles).size() == 1 + 3 * 100);

    const auto r2 = run_scenario(c, Subcommand::unsteady);
    CHECK(slurp(d / "energy.csv") == energy);
    CHECK(slurp(d / "profiles.csv") == profiles);

    const auto j = nlohmann::json::parse(slurp(d / "summary.json"));
    CHECK(j["subcommand"] == "unsteady");
    CHECK(j["status"] == "completed");
    CHECK(j["artifacts"].size() == 3);
    CHECK(j["summary"]["steps"] == "4");
    CHECK(std::stod(j["summary"]["rho_min"].get<std::string>()) >= std::stod(r2.get("rho_min_0")) - 1e-12);
}

TEST_CASE("unsteady scenario: an oversized step is a blow-up status") {
    const auto d = fresh_dir("blowup");
    const auto r = run_scenario(config("[unsteady]\ndt = 1\nt_final = 1\n", d), Subcommand::unsteady);
    CHECK(r.status == ScenarioStatus::blow_up);
    CHECK_FALSE(r.get("failure").empty());
    CHECK(std::stod(r.get("failure_time")) == 0.0);
    CHECK(std::stod(r.get("suggested_dt")) > 0.0);
    CHECK(slurp(d / "energy.csv") == std::string(energy_csv_header) + "\n");
    CHECK(nlohmann::json::parse(slurp(d / "summary.json"))["status"] == "blow_up");
}

TEST_CASE("steady scenario") {
    const auto d = fresh_dir("steady");
    const auto r = run_scenario(config("[steady]\nL = 0.05\ndx = 0.01\n", d), Subcommand::steady);
    CHECK(r.status == ScenarioStatus::completed);
    CHECK(r.get("picard_converged") == "true");
    CHECK(r.get("theta_cauchy") == "true");
    CHECK(std::stod(r.get("contraction_ratio_max")) < 0.9);
    CHECK(std::stod(r.get("r0_residual_x0")) <= 1e-10);
    const auto steady = lines(slurp(d / "steady.csv"));
    CHECK(steady.front() == steady_csv_header);
    CHECK(steady.size() == 1 + 6);
    CHECK(lines(slurp(d / "picard.csv")).front() == "theta,k,phi,sup_diff");
}

TEST_CASE("verify-identities scenario") {
    const auto d = fresh_dir("identities");
    const auto r = run_scenario(config("[unsteady]\n", d), Subcommand::verify_identities);
    CHECK(r.status == ScenarioStatus::completed);
    const auto rows = lines(slurp(d / "identities.csv"));
    REQUIRE(rows.size() > 1);
    CHECK(rows.front() == "check,s,residual_norm,grid_h");
    bool found = false;
    for (const auto& l : rows)
        if (l.rfind("quotient_identity_x_independent,", 0) == 0) {
            found = true;
            CHECK(std::stod(l.substr(l.find(',', l.find(',') + 1) + 1)) <= 1e-10);
        }
    CHECK(found);
}

TEST_CASE("check-compat scenario") {
    const auto d = fresh_dir("compat");
    auto c = config("[compat]\nprofile = blend\norder = 5\n", d);
    auto r = run_scenario(c, Subcommand::check_compat);
    CHECK(r.get("pass") == "true");
    CHECK(r.get("first_failing_order") == "-1");
    CHECK(lines(slurp(d / "compat.csv")).front() == "name,order,value,threshold,pass");
    CHECK(fs::exists(d / "compat.txt"));
    for (auto p : {CompatProfile::tanh, CompatProfile::erf}) {
        c.compat.profile = p;
        r = run_scenario(c, Subcommand::check_compat);
        CHECK(r.get("pass") == "false");
        CHECK(r.get("first_failing_order") == "3");
    }
}

TEST_CASE("inequalities scenario") {
    const auto d = fresh_dir("inequalities");
    const auto r = run_scenario(config("[inequalities]\nsamples = 100\nny = 301\n", d), Subcommand::inequalities);
    CHECK(r.get("rows") == "500");
    for (const char* k : {"hardy1", "hardy2", "trace", "sobolev_inf", "morse"})
        CHECK(r.get(std::string(k) + "_all_hold") == "true");
    CHECK(lines(slurp(d / "inequality.csv")).size() == 501);
}

TEST_CASE("subcommands need their sections") {
    const auto c = config("", fresh_dir("sections"));
    CHECK_THROWS_WITH_AS(run_scenario(c, Subcommand::unsteady), "config: unsteady needs a [unsteady] section",
                         ConfigError);
    CHECK_THROWS_AS(run_scenario(c, Subcommand::steady), ConfigError);
    CHECK_THROWS_AS(run_scenario(c, Subcommand::verify_identities), ConfigError);
    CHECK_THROWS_AS(convergence_study(c, ConvergenceAxis::theta, 3), ConfigError);
    auto bare = parse_config(small_grid + "[unsteady]\n");
    bare.output.dir = fresh_dir("sections_bare").string();
    CHECK_THROWS_WITH_AS(run_scenario(bare, Subcommand::unsteady), "config: unsteady needs a [weights] section",
                         ConfigError);
    CHECK_THROWS_AS(convergence_study(bare, ConvergenceAxis::eps, 3), ConfigError);
}

TEST_CASE("convergence: level count") {
    const auto c = config("[unsteady]\n", fresh_dir("conv_levels"));
    CHECK_THROWS_AS(convergence_study(c, ConvergenceAxis::h, 2), UsageError);
}

TEST_CASE("convergence: h axis against the heat oracle") {
    const auto c = config("[unsteady]\ndt = 0.01\nt_final = 0.25\n", fresh_dir("conv_h"));
    const auto rows = convergence_study(c, ConvergenceAxis::h, 3);
    REQUIRE(rows.size() == 3);
    CHECK(std::isnan(rows[0].observed_order));
    CHECK(rows[1].observed_order >= 1.8);
    CHECK(rows[2].observed_order >= 1.8);
    CHECK(rows[2].error <= 5e-3);
}

TEST_CASE("convergence: eps axis distances decrease") {
    const auto d = fresh_dir("conv_eps");
    const auto c = config("[unsteady]\neps = 1e-2\ndt = 5e-3\nt_final = 0.05\n", d);
    const auto r = run_convergence(c, ConvergenceAxis::eps, 3);
    const double e1 = std::stod(r.get("error_1")), e2 = std::stod(r.get("error_2"));
    CHECK(e1 > 0.0);
    CHECK(e2 < e1);
    CHECK(lines(slurp(d / "convergence.csv")).size() == 1 + 2);
}
