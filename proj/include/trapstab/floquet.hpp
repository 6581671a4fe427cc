#pragma once

#include "trapstab/dynamics.hpp"
#include "trapstab/integrator.hpp"

#include <array>
#include <complex>
#include <limits>

namespace trapstab {

/// One-period transfer matrix of the linearized motion, mapping
/// (x, v) at t_start to (x, v) at t_start + T.
struct TransferMatrix {
    double m11 = 1.0, m12 = 0.0; // m12 in s
    double m21 = 0.0, m22 = 1.0; // m21 in 1/s

    double trace() const { return m11 + m22; }
    double det() const { return m11 * m22 - m12 * m21; }
    double half_trace() const { return 0.5 * (m11 + m22); }

    static TransferMatrix identity() { return {}; }

    TransferMatrix operator*(const TransferMatrix& rhs) const {
        TransferMatrix r;
        r.m11 = m11 * rhs.m11 + m12 * rhs.m21;
        r.m12 = m11 * rhs.m12 + m12 * rhs.m22;
        r.m21 = m21 * rhs.m11 + m22 * rhs.m21;
        r.m22 = m21 * rhs.m12 + m22 * rhs.m22;
        return r;
    }
};

enum class Classification { Stable, Unstable };

enum class VerdictMethod { TraceCriterion, Boundedness };

/// Outcome of a stability decision for one parameter point.
struct StabilityVerdict {
    double trace = std::numeric_limits<double>::quiet_NaN();
    double s_half_trace = std::numeric_limits<double>::quiet_NaN();
    std::array<double, 2> eig_moduli{std::numeric_limits<double>::quiet_NaN(),
                                     std::numeric_limits<double>::quiet_NaN()};
    Classification classification = Classification::Unstable;
    VerdictMethod method = VerdictMethod::TraceCriterion;
    // Max |x| reached over the run divided by the starting amplitude.
    // Populated by the boundedness probe only.
    double growth_ratio = std::numeric_limits<double>::quiet_NaN();
};

/// How the two fundamental solutions are launched.
enum class Construction {
    Homogeneous, // unforced equation, canonical unit initial conditions
    Forced, // keep the forcing term, physical-scale initial conditions
};

/// Start time and initial-condition scales defining the monodromy window
/// [t_start, t_start + T].
struct MonodromyPolicy {
    double t_start = 0.0;    // s
    double ic_scale_x = 1e-6; // m
    double ic_scale_v = 0.0;  // m/s
    Construction construction = Construction::Forced;

    /// One drive period in, displacement 1 um, velocity ic_scale_x*omega.
    static MonodromyPolicy defaults(double omega);
};

/// Throws std::domain_error on non-positive scales, negative t_start, or
/// a forced construction starting at t = 0 with lambda > 0 (the forcing
/// diverges there).
void validate(const MonodromyPolicy& policy, const CslMathieuSystem& sys);

/// Integrates the two fundamental solutions over one drive period and
/// assembles the transfer matrix, columns normalized by the launch
/// scales. With lambda == 0 (or the Homogeneous construction) the
/// unforced equation is integrated, so det stays within integration
/// tolerance of 1.
TransferMatrix transfer_matrix(const CslMathieuSystem& sys, const MonodromyPolicy& policy,
                               const IntegratorSettings& settings = {});

/// Characteristic multipliers: s +- sqrt(s^2 - det) for |s| >= the
/// parabolic point, complex-conjugate pair otherwise, with s the half
/// trace.
std::array<std::complex<double>, 2> eigenvalues(const TransferMatrix& m);

/// Trace criterion: stable iff |trace| <= 2, boundary inclusive.
StabilityVerdict classify(const TransferMatrix& m);

/// Transfer matrix over n consecutive periods. For the unforced problem
/// this equals the one-period matrix raised to the n-th power; the
/// forced problem chains per-period windows because its right-hand side
/// is not periodic.
TransferMatrix multi_period_transfer(const CslMathieuSystem& sys,
                                     const MonodromyPolicy& policy, int n,
                                     const IntegratorSettings& settings = {});

/// Direct probe: integrates the forced equation from (ic_scale_x, 0)
/// over n_periods drive periods and reports Unstable as soon as |x|
/// exceeds growth_limit * ic_scale_x. Samples within each period, so
/// micromotion peaks are seen.
StabilityVerdict empirical_boundedness(const CslMathieuSystem& sys,
                                       const MonodromyPolicy& policy, int n_periods,
                                       double growth_limit,
                                       const IntegratorSettings& settings = {});

/// All three decision routes for one parameter point, plus the det of
/// each matrix as an integration-quality diagnostic.
struct StabilityReport {
    StabilityVerdict forced;
    StabilityVerdict homogeneous;
    StabilityVerdict bounded;
    double det_forced = 0.0;
    double det_homogeneous = 0.0;
};

StabilityReport stability_report(const CslMathieuSystem& sys, const MonodromyPolicy& policy,
                                 int bounded_periods, double growth_limit,
                                 const IntegratorSettings& settings = {});

} // namespace trapstab
