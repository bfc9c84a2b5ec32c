#include "prandtl/prandtl.h"

#include <exception>
#include <string>

#include "prandtl/errors.hpp"
#include "prandtl/runner.hpp"

struct prandtl_config {
    prandtl::RunConfig config;
};

struct prandtl_result {
    prandtl::ScenarioResult result;
};

namespace {

thread_local std::string last_error;

prandtl_status fail(prandtl_status code, const std::string& what) {
    last_error = what;
    return code;
}

prandtl_status status_of(const prandtl::Error& e) {
    using prandtl::ErrorKind;
    switch (e.kind()) {
        case ErrorKind::config:
        case ErrorKind::data:
        case ErrorKind::domain:
        case ErrorKind::usage: return PRANDTL_CONFIG_ERROR;
        case ErrorKind::blow_up:
        case ErrorKind::life_span_exceeded:
        case ErrorKind::iteration_divergence: return PRANDTL_MONITOR_FAILURE;
        default: return PRANDTL_INTERNAL_ERROR;
    }
}

template <class F>
prandtl_status guarded(F&& f) {
    try {
        last_error.clear();
        return f();
    } catch (const prandtl::Error& e) {
        return fail(status_of(e), std::string(prandtl::to_string(e.kind())) + ": " + e.what());
    } catch (const std::exception& e) {
        return fail(PRANDTL_INTERNAL_ERROR, std::string("internal error: ") + e.what());
    } catch (...) {
        return fail(PRANDTL_INTERNAL_ERROR, "internal error: unknown exception");
    }
}

prandtl_status finish(prandtl::ScenarioResult r, prandtl_result** out) {
    const bool ok = r.status == prandtl::ScenarioStatus::completed;
    if (!ok) last_error = r.get("failure");
    *out = new prandtl_result{std::move(r)};
    return ok ? PRANDTL_OK : PRANDTL_MONITOR_FAILURE;
}

}  // namespace

extern "C" {

const char* prandtl_version(void) { return "1.0.0"; }

const char* prandtl_last_error(void) { return last_error.c_str(); }

prandtl_status prandtl_config_parse(const char* text, prandtl_config** out) {
    if (!text || !out) return fail(PRANDTL_CONFIG_ERROR, "null argument");
    return guarded([&] {
        *out = new prandtl_config{prandtl::parse_config(text)};
        return PRANDTL_OK;
    });
}

prandtl_status prandtl_config_load(const char* path, prandtl_config** out) {
    if (!path || !out) return fail(PRANDTL_CONFIG_ERROR, "null argument");
    return guarded([&] {
        try {
            *out = new prandtl_config{prandtl::load_config(path)};
        } catch (const prandtl::IoError& e) {
            throw prandtl::ConfigError(e.what());
        }
        return PRANDTL_OK;
    });
}

prandtl_status prandtl_config_set_output_dir(prandtl_config* config, const char* dir) {
    if (!config || !dir || !*dir) return fail(PRANDTL_CONFIG_ERROR, "output dir must be a non-empty string");
    config->config.output.dir = dir;
    return PRANDTL_OK;
}

prandtl_status prandtl_config_set_seed(prandtl_config* config, uint64_t seed) {
    if (!config) return fail(PRANDTL_CONFIG_ERROR, "null argument");
    config->config.seed = seed;
    return PRANDTL_OK;
}

void prandtl_config_free(prandtl_config* config) { delete config; }

prandtl_status prandtl_run(const prandtl_config* config, const char* subcommand, prandtl_result** out) {
    if (!config || !subcommand || !out) return fail(PRANDTL_CONFIG_ERROR, "null argument");
    return guarded([&] {
        const auto cmd = prandtl::subcommand_from_string(subcommand);
        return finish(prandtl::run_scenario(config->config, cmd), out);
    });
}

prandtl_status prandtl_convergence(const prandtl_config* config, const char* axis, int levels,
                                   prandtl_result** out) {
    if (!config || !out) return fail(PRANDTL_CONFIG_ERROR, "null argument");
    return guarded([&] {
        const auto& c = config->config;
        const auto a = axis ? prandtl::convergence_axis_from_string(axis) : c.convergence.axis;
        return finish(prandtl::run_convergence(c, a, levels > 0 ? levels : c.convergence.levels), out);
    });
}

const char* prandtl_result_status(const prandtl_result* result) {
    return result ? prandtl::to_string(result->result.status) : "";
}

size_t prandtl_result_artifact_count(const prandtl_result* result) {
    return result ? result->result.artifacts.size() : 0;
}

const char* prandtl_result_artifact(const prandtl_result* result, size_t index) {
    if (!result || index >= result->result.artifacts.size()) return nullptr;
    return result->result.artifacts[index].c_str();
}

size_t prandtl_result_summary_count(const prandtl_result* result) {
    return result ? result->result.summary.size() : 0;
}

const char* prandtl_result_summary_key(const prandtl_result* result, size_t index) {
    if (!result || index >= result->result.summary.size()) return nullptr;
    return result->result.summary[index].first.c_str();
}

const char* prandtl_result_summary_value(const prandtl_result* result, size_t index) {
    if (!result || index >= result->result.summary.size()) return nullptr;
    return result->result.summary[index].second.c_str();
}

const char* prandtl_result_get(const prandtl_result* result, const char* key) {
    if (!result || !key) return nullptr;
    for (const auto& [k, v] : result->result.summary)
        if (k == key) return v.c_str();
    return nullptr;
}

void prandtl_result_free(prandtl_result* result) { delete result; }

}  // extern "C"
