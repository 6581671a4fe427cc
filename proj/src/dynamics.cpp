#include "trapstab/dynamics.hpp"

#include <quadmath.h>

#include <cmath>
#include <stdexcept>

namespace trapstab {

namespace {

// Mathieu stiffness k(t) = (omega^2/4)(a + 2q cos(omega t)), in 1/s^2.
double stiffness(const MathieuParams& p, double t) {
    return 0.25 * p.omega * p.omega * (p.a + 2.0 * p.q * std::cos(p.omega * t));
}

} // namespace

void validate(const CslParams& csl) {
    if (!(csl.lambda >= 0.0)) {
        throw std::domain_error("collapse rate lambda must be non-negative");
    }
    if (!(csl.rc > 0.0)) {
        throw std::domain_error("correlation length rc must be positive");
    }
    if (!(csl.radius > 0.0)) {
        throw std::domain_error("sphere radius must be positive");
    }
}

namespace detail {

double shape_factor_series(double radius, double rc) {
    const double u = radius / rc;
    const double eps = u * u;
    // f = sum_m (-1)^m 6(m+1)/(m+3)! eps^m = 1 - eps/2 + 3 eps^2/20 - ...
    double term = 1.0;
    double sum = 1.0;
    for (int m = 0; m < 64; ++m) {
        term *= -eps * (m + 2) / ((m + 1.0) * (m + 4.0));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) {
            break;
        }
    }
    return sum;
}

double shape_factor_direct(double radius, double rc) {
    // The bracket cancels to O(u^4) for small u, so evaluate it in
    // 128-bit precision; double keeps only ~7 good digits at u = 1e-2.
    const __float128 u = static_cast<__float128>(radius) / static_cast<__float128>(rc);
    const __float128 u2 = u * u;
    const __float128 two_over_u2 = 2.0Q / u2;
    const __float128 bracket =
        1.0Q - two_over_u2 + (1.0Q + two_over_u2) * expq(-u2);
    return static_cast<double>(6.0Q / (u2 * u2) * bracket);
}

} // namespace detail

double shape_factor(double radius, double rc) {
    if (!(radius > 0.0)) {
        throw std::domain_error("sphere radius must be positive");
    }
    if (!(rc > 0.0)) {
        throw std::domain_error("correlation length rc must be positive");
    }
    const double u = radius / rc;
    return u < 1e-2 ? detail::shape_factor_series(radius, rc)
                    : detail::shape_factor_direct(radius, rc);
}

double CslMathieuSystem::shape() const {
    return csl.shape_mode == ShapeMode::UnitF ? 1.0 : shape_factor(csl.radius, csl.rc);
}

double CslMathieuSystem::force_coefficient() const {
    if (csl.lambda == 0.0) {
        return 0.0;
    }
    validate(csl);
    return constants.hbar * std::sqrt(csl.lambda * shape()) /
           (constants.m0 * csl.rc * std::sqrt(6.0));
}

double csl_rms_displacement(double t, const CslMathieuSystem& sys) {
    if (sys.csl.lambda == 0.0 || t == 0.0) {
        return 0.0;
    }
    return sys.force_coefficient() * t * std::sqrt(t);
}

double csl_acceleration(double t, const CslMathieuSystem& sys) {
    if (sys.csl.lambda == 0.0) {
        return 0.0;
    }
    if (!(t > 0.0)) {
        throw std::domain_error("CSL acceleration requires t > 0");
    }
    const double K = sys.force_coefficient();
    const double k = stiffness(sys.mathieu, t);
    const double rt = std::sqrt(t);
    return K * (0.75 / rt - k * t * rt);
}

Deriv rhs_homogeneous(const State& s, const MathieuParams& p) {
    return {s.v, -stiffness(p, s.t) * s.x};
}

Deriv rhs_csl(const State& s, const CslMathieuSystem& sys) {
    if (sys.csl.lambda == 0.0) {
        return rhs_homogeneous(s, sys.mathieu);
    }
    return {s.v, -stiffness(sys.mathieu, s.t) * s.x + csl_acceleration(s.t, sys)};
}

Deriv CachedRhs::operator()(const State& s) const {
    if (!forced_) {
        return rhs_homogeneous(s, params_);
    }
    const double k = stiffness(params_, s.t);
    const double rt = std::sqrt(s.t);
    return {s.v, -k * s.x + coeff_ * (0.75 / rt - k * s.t * rt)};
}

} // namespace trapstab
