#include "trapstab/params.hpp"

#include <cmath>
#include <stdexcept>

namespace trapstab {

void validate(const TrapConfig& trap) {
    if (!(trap.omega > 0.0)) {
        throw std::domain_error("trap drive frequency must be positive");
    }
    if (!(trap.r0 > 0.0)) {
        throw std::domain_error("trap radius r0 must be positive");
    }
    if (!(trap.mass > 0.0)) {
        throw std::domain_error("trap ion mass must be positive");
    }
    if (trap.charge == 0.0 || !std::isfinite(trap.charge)) {
        throw std::domain_error("trap ion charge must be nonzero");
    }
}

AxisPair mathieu_from_trap(const TrapConfig& trap) {
    validate(trap);
    const double denom = trap.mass * trap.omega * trap.omega * trap.r0 * trap.r0;
    const double a_x = 8.0 * trap.charge * trap.dc_voltage / denom;
    const double q_x = -4.0 * trap.charge * trap.ac_amplitude / denom;

    AxisPair out;
    out.x = {a_x, q_x, trap.omega};
    out.y = {-a_x, -q_x, trap.omega};
    return out;
}

double dehmelt_index(const MathieuParams& p) {
    const double radicand = p.a + 0.5 * p.q * p.q;
    if (radicand < 0.0) {
        throw std::domain_error("outside Dehmelt stable region: a + q^2/2 < 0");
    }
    return std::sqrt(radicand);
}

double dehmelt_trajectory(double t, double amplitude, const MathieuParams& p) {
    const double mu = dehmelt_index(p);
    const double secular = std::cos(0.5 * mu * p.omega * t);
    const double micromotion = 1.0 + 0.5 * p.q * std::cos(p.omega * t);
    return amplitude * secular * micromotion;
}

} // namespace trapstab
