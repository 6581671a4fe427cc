#pragma once

#include "trapstab/params.hpp"

namespace trapstab {

/// How the CSL mass-density shape factor enters the force scale.
enum class ShapeMode {
    UnitF,     // f = 1, pointlike limit
    ComputedF, // f = f(R/rc) for a homogeneous sphere of radius R
};

/// Collapse-model parameters.
struct CslParams {
    double lambda = 0.0; // collapse rate, 1/s
    double rc = 1e-7;    // correlation length, m
    double radius = 1e-7; // sphere radius R, m (used by ComputedF)
    ShapeMode shape_mode = ShapeMode::UnitF;
};

/// Phase-space sample of the one-dimensional motion.
struct State {
    double x = 0.0; // m
    double v = 0.0; // m/s
    double t = 0.0; // s
};

/// Time derivative of a State.
struct Deriv {
    double dx = 0.0; // m/s
    double dv = 0.0; // m/s^2
};

/// One transverse axis of the trap together with its CSL forcing.
struct CslMathieuSystem {
    MathieuParams mathieu;
    CslParams csl;
    PhysicalConstants constants;

    /// Effective shape factor per the configured mode.
    double shape() const;

    /// Force scale K = hbar sqrt(lambda f) / (m0 rc sqrt(6)), in m s^-3/2.
    /// The CSL acceleration is K [ (3/4) t^-1/2 - k(t) t^3/2 ] with k the
    /// Mathieu stiffness.
    double force_coefficient() const;
};

/// Throws std::domain_error unless lambda >= 0, rc > 0 and radius > 0.
void validate(const CslParams& csl);

/// Suppression factor f(R/rc) for a homogeneous sphere:
///   f(u) = (6/u^4) [1 - 2/u^2 + (1 + 2/u^2) exp(-u^2)],  u = R/rc.
/// Monotone from f(0)=1 down to 0; evaluated by a series for u < 1e-2
/// and in extended precision otherwise (the direct form loses ~9 digits
/// to cancellation near the switchover). Throws std::domain_error for
/// non-positive radius or rc.
double shape_factor(double radius, double rc);

namespace detail {
/// Small-u series branch of shape_factor, valid for u = R/rc << 1.
double shape_factor_series(double radius, double rc);
/// Closed-form branch of shape_factor.
double shape_factor_direct(double radius, double rc);
} // namespace detail

/// Free-particle RMS collapse displacement
///   dx(t) = (hbar / (m0 rc)) sqrt(lambda f / 6) t^3/2,  meters,
/// for t >= 0.
double csl_rms_displacement(double t, const CslMathieuSystem& sys);

/// Deterministic worst-case CSL acceleration at time t > 0:
///   K [ (3/4) t^-1/2 - (omega^2/4)(a + 2q cos(omega t)) t^3/2 ].
/// Throws std::domain_error for t <= 0 when lambda > 0.
double csl_acceleration(double t, const CslMathieuSystem& sys);

/// Homogeneous Mathieu right-hand side:
///   dx/dt = v,  dv/dt = -(omega^2/4)(a + 2q cos(omega t)) x.
Deriv rhs_homogeneous(const State& s, const MathieuParams& p);

/// Forced right-hand side; reduces exactly to rhs_homogeneous when
/// lambda == 0.
Deriv rhs_csl(const State& s, const CslMathieuSystem& sys);

/// Right-hand side callable with the force coefficient precomputed, for
/// tight integration loops. A system with lambda == 0 evaluates through
/// rhs_homogeneous, so unforced runs agree bit for bit regardless of
/// which construction requested them.
class CachedRhs {
public:
    explicit CachedRhs(const CslMathieuSystem& sys)
        : params_(sys.mathieu),
          coeff_(sys.force_coefficient()),
          forced_(sys.csl.lambda > 0.0) {}

    Deriv operator()(const State& s) const;

private:
    MathieuParams params_;
    double coeff_;
    bool forced_;
};

} // namespace trapstab
