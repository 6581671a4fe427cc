#include "trapstab/floquet.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace trapstab;

namespace {

constexpr double kOmega = 1e8;

CslMathieuSystem unforced(double a, double q) {
    CslMathieuSystem sys;
    sys.mathieu = {a, q, kOmega};
    return sys;
}

CslMathieuSystem reference_forced(double lambda) {
    CslMathieuSystem sys;
    sys.mathieu = {-0.000526947, 0.0326158, kOmega};
    sys.csl.lambda = lambda;
    sys.csl.rc = 1e-7;
    sys.csl.radius = 1e-7;
    return sys;
}

MonodromyPolicy hom_policy() {
    MonodromyPolicy p = MonodromyPolicy::defaults(kOmega);
    p.construction = Construction::Homogeneous;
    return p;
}

} // namespace

TEST_CASE("free particle transfer matrix is a shear") {
    const TransferMatrix m = transfer_matrix(unforced(0.0, 0.0), hom_policy());
    const double period = 2.0 * std::numbers::pi / kOmega;
    CHECK(std::abs(m.m11 - 1.0) <= 1e-9);
    CHECK(m.m12 == doctest::Approx(period).epsilon(1e-9));
    CHECK(std::abs(m.m21) * period <= 1e-9);
    CHECK(std::abs(m.m22 - 1.0) <= 1e-9);
    CHECK(m.trace() == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("dc-only traces match the harmonic closed form") {
    // With q = 0 the one-period trace is 2 cos(pi sqrt(a)).
    const auto trace_of = [](double a) {
        return transfer_matrix(unforced(a, 0.0), hom_policy()).trace();
    };
    CHECK(trace_of(0.2) ==
          doctest::Approx(2.0 * std::cos(std::numbers::pi * std::sqrt(0.2)))
              .epsilon(1e-8));
    CHECK(trace_of(0.04) ==
          doctest::Approx(2.0 * std::cos(std::numbers::pi * std::sqrt(0.04)))
              .epsilon(1e-8));
    CHECK(trace_of(0.64) ==
          doctest::Approx(2.0 * std::cos(std::numbers::pi * std::sqrt(0.64)))
              .epsilon(1e-8));
    // Frozen decimal for the middle case: 0.33014867152912160.
    CHECK(trace_of(0.2) == doctest::Approx(0.33014867152912160).epsilon(1e-8));
}

TEST_CASE("unforced determinant stays within integration tolerance of 1") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const TransferMatrix m =
            transfer_matrix(unforced(coord(rng), coord(rng)), hom_policy());
        CHECK(std::abs(m.det() - 1.0) <= 1e-8);
    }
}

TEST_CASE("eigenvalues of synthetic matrices") {
    const auto identity_eigs = eigenvalues(TransferMatrix::identity());
    CHECK(identity_eigs[0].real() == doctest::Approx(1.0));
    CHECK(identity_eigs[0].imag() == 0.0);

    // Pure rotation: trace 0, det 1 -> +-i.
    TransferMatrix rot;
    rot.m11 = 0.0;
    rot.m12 = 1.0;
    rot.m21 = -1.0;
    rot.m22 = 0.0;
    const auto rot_eigs = eigenvalues(rot);
    CHECK(rot_eigs[0].real() == doctest::Approx(0.0).scale(1.0));
    CHECK(rot_eigs[0].imag() == doctest::Approx(1.0));
    CHECK(rot_eigs[1].imag() == doctest::Approx(-1.0));
    CHECK(std::abs(rot_eigs[0]) == doctest::Approx(1.0).epsilon(1e-14));

    // Hyperbolic: diag(2, 1/2), trace 2.5, det 1 -> real pair {2, 1/2}.
    TransferMatrix hyp;
    hyp.m11 = 2.0;
    hyp.m22 = 0.5;
    const auto hyp_eigs = eigenvalues(hyp);
    CHECK(hyp_eigs[0].real() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(hyp_eigs[1].real() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(hyp_eigs[0].imag() == 0.0);
}

TEST_CASE("stable spectra sit on the unit circle") {
    const TransferMatrix m = transfer_matrix(unforced(0.2, 0.1), hom_policy());
    REQUIRE(std::abs(m.trace()) < 2.0);
    const auto eigs = eigenvalues(m);
    CHECK(std::abs(eigs[0]) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(eigs[1]) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(eigs[0].imag() == -eigs[1].imag());
}

TEST_CASE("classification follows the trace criterion with inclusive boundary") {
    TransferMatrix boundary;
    boundary.m11 = 1.0;
    boundary.m22 = 1.0;
    boundary.m12 = 0.5;
    boundary.m21 = 0.0;
    const StabilityVerdict at_boundary = classify(boundary);
    CHECK(at_boundary.trace == 2.0);
    CHECK(at_boundary.classification == Classification::Stable);
    CHECK(at_boundary.method == VerdictMethod::TraceCriterion);
    CHECK(at_boundary.s_half_trace == 1.0);

    TransferMatrix beyond = boundary;
    beyond.m11 = 1.0001;
    CHECK(classify(beyond).classification == Classification::Unstable);

    TransferMatrix negative;
    negative.m11 = -1.2;
    negative.m22 = -1.2;
    negative.m12 = 0.0;
    negative.m21 = 0.0;
    CHECK(classify(negative).classification == Classification::Unstable);
}

TEST_CASE("known stable and unstable operating points") {
    CHECK(classify(transfer_matrix(reference_forced(0.0), hom_policy())).classification ==
          Classification::Stable);
    CHECK(classify(transfer_matrix(unforced(0.0, 1.0), hom_policy())).classification ==
          Classification::Unstable);
    CHECK(classify(transfer_matrix(unforced(-0.05, 0.1), hom_policy())).classification ==
          Classification::Unstable);
}

TEST_CASE("classification is symmetric under q negation") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> a_coord(-0.1, 0.8);
    std::uniform_real_distribution<double> q_coord(0.05, 1.2);
    for (int trial = 0; trial < 25; ++trial) {
        const double a = a_coord(rng);
        const double q = q_coord(rng);
        const StabilityVerdict plus =
            classify(transfer_matrix(unforced(a, q), hom_policy()));
        const StabilityVerdict minus =
            classify(transfer_matrix(unforced(a, -q), hom_policy()));
        CHECK(plus.classification == minus.classification);
        CHECK(plus.trace == doctest::Approx(minus.trace).epsilon(1e-7));
    }
}

TEST_CASE("transfer matrix is invariant under initial-condition rescaling") {
    const CslMathieuSystem sys = unforced(0.13, 0.52);
    MonodromyPolicy base = hom_policy();
    MonodromyPolicy scaled = base;
    scaled.ic_scale_x *= 10.0;
    scaled.ic_scale_v *= 3.0;
    const TransferMatrix m1 = transfer_matrix(sys, base);
    const TransferMatrix m2 = transfer_matrix(sys, scaled);
    CHECK(m1.m11 == doctest::Approx(m2.m11).epsilon(1e-8));
    CHECK(m1.m12 == doctest::Approx(m2.m12).epsilon(1e-8));
    CHECK(m1.m21 == doctest::Approx(m2.m21).epsilon(1e-8));
    CHECK(m1.m22 == doctest::Approx(m2.m22).epsilon(1e-8));
}

TEST_CASE("unforced trace does not depend on the window start") {
    const CslMathieuSystem sys = unforced(0.2, 0.35);
    const double period = sys.mathieu.period();
    double reference = 0.0;
    bool first = true;
    for (const double start : {0.0, period / 3.0, 1.7 * period}) {
        MonodromyPolicy p = hom_policy();
        p.t_start = start;
        const double trace = transfer_matrix(sys, p).trace();
        if (first) {
            reference = trace;
            first = false;
        } else {
            CHECK(trace == doctest::Approx(reference).epsilon(1e-8));
        }
    }
}

TEST_CASE("forced construction with lambda = 0 equals the homogeneous one exactly") {
    const CslMathieuSystem sys = unforced(-0.000526947, 0.0326158);
    MonodromyPolicy forced = MonodromyPolicy::defaults(kOmega);
    MonodromyPolicy hom = forced;
    hom.construction = Construction::Homogeneous;
    const TransferMatrix mf = transfer_matrix(sys, forced);
    const TransferMatrix mh = transfer_matrix(sys, hom);
    CHECK(mf.m11 == mh.m11);
    CHECK(mf.m12 == mh.m12);
    CHECK(mf.m21 == mh.m21);
    CHECK(mf.m22 == mh.m22);
}

TEST_CASE("policy validation") {
    const CslMathieuSystem forced_sys = reference_forced(1e-8);
    MonodromyPolicy p = MonodromyPolicy::defaults(kOmega);
    p.t_start = 0.0;
    CHECK_THROWS_AS(transfer_matrix(forced_sys, p), std::domain_error);

    p = MonodromyPolicy::defaults(kOmega);
    p.ic_scale_x = 0.0;
    CHECK_THROWS_AS(transfer_matrix(forced_sys, p), std::domain_error);

    p = MonodromyPolicy::defaults(kOmega);
    p.t_start = -1e-9;
    CHECK_THROWS_AS(transfer_matrix(forced_sys, p), std::domain_error);

    CHECK_THROWS_AS(MonodromyPolicy::defaults(0.0), std::domain_error);

    // Unforced problems may start at t = 0.
    p = MonodromyPolicy::defaults(kOmega);
    p.t_start = 0.0;
    p.construction = Construction::Homogeneous;
    CHECK_NOTHROW(transfer_matrix(unforced(0.1, 0.2), p));
}

TEST_CASE("multi-period transfer of the unforced problem is a matrix power") {
    const CslMathieuSystem sys = unforced(0.2, 0.0);
    const TransferMatrix one = transfer_matrix(sys, hom_policy());
    const TransferMatrix single = multi_period_transfer(sys, hom_policy(), 1);
    CHECK(single.m11 == one.m11);
    CHECK(single.m12 == one.m12);
    CHECK(single.m21 == one.m21);
    CHECK(single.m22 == one.m22);

    const TransferMatrix triple = multi_period_transfer(sys, hom_policy(), 3);
    // 2 cos(3 pi sqrt(0.2)), frozen: -0.95446042171332332.
    CHECK(triple.trace() == doctest::Approx(-0.95446042171332332).epsilon(1e-7));
    CHECK(std::abs(triple.det() - 1.0) <= 3.0 * 1e-8);

    CHECK_THROWS_AS(multi_period_transfer(sys, hom_policy(), 0), std::invalid_argument);
}

TEST_CASE("forced multi-period windows chain consecutively") {
    const CslMathieuSystem sys = reference_forced(1e-8);
    const MonodromyPolicy policy = MonodromyPolicy::defaults(kOmega);
    const TransferMatrix two = multi_period_transfer(sys, policy, 2);

    MonodromyPolicy second = policy;
    second.t_start = policy.t_start + sys.mathieu.period();
    const TransferMatrix m1 = transfer_matrix(sys, policy);
    const TransferMatrix m2 = transfer_matrix(sys, second);
    const TransferMatrix expected = m2 * m1;
    CHECK(two.m11 == doctest::Approx(expected.m11).epsilon(1e-12));
    CHECK(two.m12 == doctest::Approx(expected.m12).epsilon(1e-12));
    CHECK(two.m21 == doctest::Approx(expected.m21).epsilon(1e-12));
    CHECK(two.m22 == doctest::Approx(expected.m22).epsilon(1e-12));
}

TEST_CASE("boundedness probe agrees with the trace criterion") {
    // Stable dc confinement stays bounded.
    const StabilityVerdict stable = empirical_boundedness(
        unforced(0.2, 0.0), hom_policy(), 50, 1e3);
    CHECK(stable.classification == Classification::Stable);
    CHECK(stable.method == VerdictMethod::Boundedness);
    CHECK(stable.growth_ratio >= 1.0);
    CHECK(stable.growth_ratio <= 2.0);

    // Inverted potential escapes within ~70 periods.
    const StabilityVerdict unstable = empirical_boundedness(
        unforced(-0.001, 0.0), hom_policy(), 200, 1e3);
    CHECK(unstable.classification == Classification::Unstable);
    CHECK(unstable.growth_ratio > 1e3);
}

TEST_CASE("reference operating point stays bounded for a thousand periods") {
    const StabilityVerdict v = empirical_boundedness(
        reference_forced(0.0), hom_policy(), 1000, 1e3);
    CHECK(v.classification == Classification::Stable);
    // Secular + micromotion envelope is a small multiple of the launch
    // amplitude, nowhere near the growth limit.
    CHECK(v.growth_ratio < 3.0);
}

TEST_CASE("boundedness probe argument validation") {
    CHECK_THROWS_AS(empirical_boundedness(unforced(0.2, 0.0), hom_policy(), 0, 1e3),
                    std::invalid_argument);
    CHECK_THROWS_AS(empirical_boundedness(unforced(0.2, 0.0), hom_policy(), 10, 1.0),
                    std::invalid_argument);
    MonodromyPolicy p = MonodromyPolicy::defaults(kOmega);
    p.t_start = 0.0;
    p.construction = Construction::Homogeneous;
    CHECK_THROWS_AS(empirical_boundedness(reference_forced(1e-8), p, 10, 1e3),
                    std::domain_error);
}

TEST_CASE("floquet exponent from the trace matches the secular index") {
    const CslMathieuSystem sys = reference_forced(0.0);
    const TransferMatrix m = transfer_matrix(sys, hom_policy());
    const double beta = std::acos(m.half_trace()) / std::numbers::pi;
    const double mu = 0.0022244560728411788; // sqrt(a + q^2/2), frozen
    CHECK(std::abs(beta - mu) / mu <= 0.02);
}

TEST_CASE("full report carries all three verdicts") {
    const CslMathieuSystem sys = reference_forced(1e-8);
    const MonodromyPolicy policy = MonodromyPolicy::defaults(kOmega);
    const StabilityReport report = stability_report(sys, policy, 50, 1e3);
    CHECK(report.forced.method == VerdictMethod::TraceCriterion);
    CHECK(report.homogeneous.method == VerdictMethod::TraceCriterion);
    CHECK(report.bounded.method == VerdictMethod::Boundedness);
    CHECK(report.forced.classification == Classification::Stable);
    CHECK(report.homogeneous.classification == Classification::Stable);
    CHECK(report.bounded.classification == Classification::Stable);
    CHECK(std::abs(report.det_homogeneous - 1.0) <= 1e-8);
    CHECK(std::isfinite(report.det_forced));
}
