#include "prandtl/errors.hpp"

namespace prandtl {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::config: return "configuration error";
        case ErrorKind::data: return "data error";
        case ErrorKind::domain: return "domain error";
        case ErrorKind::usage: return "usage error";
        case ErrorKind::degeneracy: return "degeneracy error";
        case ErrorKind::step: return "step error";
        case ErrorKind::blow_up: return "blow-up";
        case ErrorKind::life_span_exceeded: return "life-span exceeded";
        case ErrorKind::iteration_divergence: return "iteration divergence";
        case ErrorKind::numerical_overflow: return "numerical overflow";
        case ErrorKind::io: return "I/O error";
    }
    return "error";
}

}  // namespace prandtl
