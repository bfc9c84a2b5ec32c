#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "prandtl/prandtl.h"

namespace {

void print_result(const prandtl_result* r) {
    std::printf("status: %s\n", prandtl_result_status(r));
    for (size_t i = 0; i < prandtl_result_summary_count(r); ++i)
        std::printf("  %s = %s\n", prandtl_result_summary_key(r, i), prandtl_result_summary_value(r, i));
    for (size_t i = 0; i < prandtl_result_artifact_count(r); ++i) std::printf("  wrote %s\n", prandtl_result_artifact(r, i));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inhomogeneous Prandtl boundary-layer solver and verification harness"};
    app.require_subcommand(1);

    std::string config_path, out_dir, axis;
    std::optional<std::uint64_t> seed;
    int levels = 0;
    bool quiet = false;
    app.add_option("--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides [output] dir)");
    app.add_option("--seed", seed, "seed for randomized inequality samples");
    app.add_flag("--quiet", quiet, "print nothing on success");

    for (const char* name : {"unsteady", "steady", "verify-identities", "check-compat", "inequalities"})
        app.add_subcommand(name)->fallthrough();
    auto* conv = app.add_subcommand("convergence", "refinement study along one parameter")->fallthrough();
    conv->add_option("--axis", axis, "h, dt, eps or theta (default: [convergence] axis)");
    conv->add_option("--levels", levels, "number of levels, at least 3 (default: [convergence] levels)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : PRANDTL_CONFIG_ERROR;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    prandtl_config* config = nullptr;
    prandtl_status st = prandtl_config_load(config_path.c_str(), &config);
    if (st == PRANDTL_OK && !out_dir.empty()) st = prandtl_config_set_output_dir(config, out_dir.c_str());
    if (st == PRANDTL_OK && seed) st = prandtl_config_set_seed(config, *seed);
    if (st != PRANDTL_OK) {
        std::fprintf(stderr, "prandtl: %s\n", prandtl_last_error());
        prandtl_config_free(config);
        return st;
    }

    prandtl_result* result = nullptr;
    if (cmd == "convergence")
        st = prandtl_convergence(config, axis.empty() ? nullptr : axis.c_str(), levels, &result);
    else
        st = prandtl_run(config, cmd.c_str(), &result);

    if (result && (!quiet || st != PRANDTL_OK)) print_result(result);
    if (st != PRANDTL_OK) std::fprintf(stderr, "prandtl: %s\n", prandtl_last_error());
    prandtl_result_free(result);
    prandtl_config_free(config);
    return st;
}
