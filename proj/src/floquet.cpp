#include "trapstab/floquet.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace trapstab {

MonodromyPolicy MonodromyPolicy::defaults(double omega) {
    if (!(omega > 0.0)) {
        throw std::domain_error("omega must be positive");
    }
    MonodromyPolicy p;
    p.t_start = 2.0 * std::numbers::pi / omega;
    p.ic_scale_x = 1e-6;
    p.ic_scale_v = 1e-6 * omega;
    p.construction = Construction::Forced;
    return p;
}

void validate(const MonodromyPolicy& policy, const CslMathieuSystem& sys) {
    if (!(sys.mathieu.omega > 0.0)) {
        throw std::domain_error("omega must be positive");
    }
    if (!(policy.ic_scale_x > 0.0) || !(policy.ic_scale_v > 0.0)) {
        throw std::domain_error("initial-condition scales must be positive");
    }
    if (!(policy.t_start >= 0.0)) {
        throw std::domain_error("t_start must be non-negative");
    }
    if (policy.construction == Construction::Forced && sys.csl.lambda > 0.0 &&
        !(policy.t_start > 0.0)) {
        throw std::domain_error(
            "forced construction needs t_start > 0: the forcing diverges at t = 0");
    }
}

namespace {

// Per-period step cap; keeps the drive resolved and gives the
// boundedness probe enough observation points for micromotion peaks.
IntegratorSettings capped(const IntegratorSettings& settings, double period) {
    IntegratorSettings eff = settings;
    const double cap = period / 20.0;
    eff.max_step = eff.max_step > 0.0 ? std::min(eff.max_step, cap) : cap;
    return eff;
}

} // namespace

TransferMatrix transfer_matrix(const CslMathieuSystem& sys, const MonodromyPolicy& policy,
                               const IntegratorSettings& settings) {
    validate(settings);
    validate(policy, sys);
    if (sys.csl.lambda != 0.0) {
        validate(sys.csl);
    }

    const double period = sys.mathieu.period();
    const IntegratorSettings eff = capped(settings, period);

    // The Homogeneous construction drops the forcing; so does lambda == 0.
    CslMathieuSystem eff_sys = sys;
    if (policy.construction == Construction::Homogeneous) {
        eff_sys.csl.lambda = 0.0;
    }
    const CachedRhs rhs(eff_sys);

    const double t0 = policy.t_start;
    const double t1 = t0 + period;
    const State end1 = integrate(rhs, State{policy.ic_scale_x, 0.0, t0}, t1, eff);
    const State end2 = integrate(rhs, State{0.0, policy.ic_scale_v, t0}, t1, eff);

    TransferMatrix m;
    m.m11 = end1.x / policy.ic_scale_x;
    m.m21 = end1.v / policy.ic_scale_x;
    m.m12 = end2.x / policy.ic_scale_v;
    m.m22 = end2.v / policy.ic_scale_v;
    return m;
}

std::array<std::complex<double>, 2> eigenvalues(const TransferMatrix& m) {
    const double s = m.half_trace();
    const double disc = s * s - m.det();
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        return {std::complex<double>(s + root, 0.0), std::complex<double>(s - root, 0.0)};
    }
    const double imag = std::sqrt(-disc);
    return {std::complex<double>(s, imag), std::complex<double>(s, -imag)};
}

StabilityVerdict classify(const TransferMatrix& m) {
    StabilityVerdict v;
    v.trace = m.trace();
    v.s_half_trace = m.half_trace();
    const auto eig = eigenvalues(m);
    v.eig_moduli = {std::abs(eig[0]), std::abs(eig[1])};
    v.classification =
        std::abs(v.trace) <= 2.0 ? Classification::Stable : Classification::Unstable;
    v.method = VerdictMethod::TraceCriterion;
    return v;
}

TransferMatrix multi_period_transfer(const CslMathieuSystem& sys,
                                     const MonodromyPolicy& policy, int n,
                                     const IntegratorSettings& settings) {
    if (n < 1) {
        throw std::invalid_argument("period count must be at least 1");
    }
    const bool forced =
        policy.construction == Construction::Forced && sys.csl.lambda > 0.0;
    if (!forced) {
        const TransferMatrix m = transfer_matrix(sys, policy, settings);
        TransferMatrix acc = m;
        for (int k = 1; k < n; ++k) {
            acc = m * acc;
        }
        return acc;
    }
    // The forcing is not periodic, so each period gets its own window.
    const double period = sys.mathieu.period();
    TransferMatrix acc = TransferMatrix::identity();
    for (int k = 0; k < n; ++k) {
        MonodromyPolicy window = policy;
        window.t_start = policy.t_start + k * period;
        acc = transfer_matrix(sys, window, settings) * acc;
    }
    return acc;
}

StabilityVerdict empirical_boundedness(const CslMathieuSystem& sys,
                                       const MonodromyPolicy& policy, int n_periods,
                                       double growth_limit,
                                       const IntegratorSettings& settings) {
    if (n_periods < 1) {
        throw std::invalid_argument("period count must be at least 1");
    }
    if (!(growth_limit > 1.0)) {
        throw std::invalid_argument("growth limit must exceed 1");
    }
    validate(settings);
    validate(policy, sys);
    if (sys.csl.lambda > 0.0 && !(policy.t_start > 0.0)) {
        throw std::domain_error(
            "boundedness probe needs t_start > 0: the forcing diverges at t = 0");
    }

    const double period = sys.mathieu.period();
    const IntegratorSettings eff = capped(settings, period);
    CachedRhs rhs(sys);
    detail::Dopri5<CachedRhs> engine(rhs, eff);

    State s{policy.ic_scale_x, 0.0, policy.t_start};
    double max_abs = std::abs(s.x);
    const double limit = growth_limit * policy.ic_scale_x;

    StabilityVerdict v;
    v.method = VerdictMethod::Boundedness;
    for (int p = 1; p <= n_periods; ++p) {
        const double target = policy.t_start + p * period;
        s = engine.run(s, target, [&max_abs](const State& st) {
            max_abs = std::max(max_abs, std::abs(st.x));
        });
        if (max_abs > limit) {
            break;
        }
    }
    v.growth_ratio = max_abs / policy.ic_scale_x;
    v.classification =
        max_abs > limit ? Classification::Unstable : Classification::Stable;
    return v;
}

StabilityReport stability_report(const CslMathieuSystem& sys, const MonodromyPolicy& policy,
                                 int bounded_periods, double growth_limit,
                                 const IntegratorSettings& settings) {
    MonodromyPolicy forced_policy = policy;
    forced_policy.construction = Construction::Forced;
    MonodromyPolicy hom_policy = policy;
    hom_policy.construction = Construction::Homogeneous;

    const TransferMatrix mf = transfer_matrix(sys, forced_policy, settings);
    const TransferMatrix mh = transfer_matrix(sys, hom_policy, settings);

    StabilityReport report;
    report.forced = classify(mf);
    report.homogeneous = classify(mh);
    report.bounded =
        empirical_boundedness(sys, forced_policy, bounded_periods, growth_limit, settings);
    report.det_forced = mf.det();
    report.det_homogeneous = mh.det();
    return report;
}

} // namespace trapstab
