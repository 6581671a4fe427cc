#include "trapstab/integrator.hpp"

#include <stdexcept>

namespace trapstab {

void validate(const IntegratorSettings& settings) {
    if (!(settings.rel_tol >= 1e-14 && settings.rel_tol <= 1e-2)) {
        throw std::domain_error("rel_tol must lie in [1e-14, 1e-2]");
    }
    if (!(settings.abs_tol_x >= 0.0) || !(settings.abs_tol_v >= 0.0)) {
        throw std::domain_error("absolute tolerances must be non-negative");
    }
    if (!(settings.max_step >= 0.0)) {
        throw std::domain_error("max_step must be non-negative");
    }
    if (!(settings.initial_step >= 0.0)) {
        throw std::domain_error("initial_step must be non-negative");
    }
}

} // namespace trapstab
