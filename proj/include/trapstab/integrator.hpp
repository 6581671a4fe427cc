#pragma once

#include "trapstab/dynamics.hpp"
#include "trapstab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace trapstab {

/// Tolerances and step limits for the adaptive integrator. Positions and
/// velocities carry separate absolute floors because their scales differ
/// by the drive frequency (~1e8 1/s).
struct IntegratorSettings {
    double rel_tol = 1e-10;
    double abs_tol_x = 1e-18; // m
    double abs_tol_v = 1e-12; // m/s
    double max_step = 0.0;     // s; 0 disables the cap
    double initial_step = 0.0; // s; 0 selects the step automatically
};

/// Throws std::domain_error unless rel_tol is in [1e-14, 1e-2] and the
/// absolute floors and step limits are non-negative.
void validate(const IntegratorSettings& settings);

/// Solution samples at caller-chosen times, endpoints included.
struct Trajectory {
    std::vector<State> samples;
};

namespace detail {

// Dormand-Prince 5(4) coefficients.
inline constexpr double kC2 = 1.0 / 5.0;
inline constexpr double kC3 = 3.0 / 10.0;
inline constexpr double kC4 = 4.0 / 5.0;
inline constexpr double kC5 = 8.0 / 9.0;

inline constexpr double kA21 = 1.0 / 5.0;
inline constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
inline constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
inline constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                        kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
inline constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0,
                        kA63 = 46732.0 / 5247.0, kA64 = 49.0 / 176.0,
                        kA65 = -5103.0 / 18656.0;
inline constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                        kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
// Difference between the 5th and embedded 4th order weights.
inline constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                        kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;

// Step-control constants (PI controller).
inline constexpr double kSafety = 0.9;
inline constexpr double kExpo1 = 0.2 - 0.04 * 0.75; // 0.17
inline constexpr double kBeta = 0.04;
inline constexpr double kFacMin = 0.2;
inline constexpr double kFacMax = 5.0;
inline constexpr std::int64_t kMaxSteps = 100'000'000;

struct StepPair {
    double x;
    double v;
};

template <class Rhs>
class Dopri5 {
public:
    Dopri5(Rhs& rhs, const IntegratorSettings& settings) : rhs_(rhs), s_(settings) {}

    // Advances (x, v, t) to exactly t1. Calls observe(state) after every
    // accepted step when Observe is non-null.
    template <class Observe>
    State run(State y, double t1, Observe&& observe) {
        const double span = t1 - y.t;
        if (!(span > 0.0)) {
            throw std::domain_error("integration span must be forward in time");
        }
        const double hmax = s_.max_step > 0.0 ? std::min(s_.max_step, span) : span;

        Deriv f1 = eval(y);
        double h = s_.initial_step > 0.0 ? std::min(s_.initial_step, hmax)
                                         : initial_step(y, f1, hmax);
        double facold = 1e-4;
        bool last_rejected = false;

        for (std::int64_t step = 0; step < kMaxSteps; ++step) {
            const double hmin = 16.0 * std::numeric_limits<double>::epsilon() *
                                std::max(std::abs(y.t), std::abs(t1));
            if (!(h > hmin)) {
                if (!std::isfinite(h)) {
                    throw IntegrationError(IntegrationError::Kind::NonFiniteState,
                                           "step size became non-finite");
                }
                throw IntegrationError(IntegrationError::Kind::StepUnderflow,
                                       "step size underflow at t = " + std::to_string(y.t));
            }
            bool final_step = false;
            if (y.t + h >= t1) {
                h = t1 - y.t;
                final_step = true;
            }

            const double t0 = y.t;
            const double x0 = y.x, v0 = y.v;

            StepPair k2 = stage(x0, v0, h, kA21 * f1.dx, kA21 * f1.dv);
            Deriv f2 = eval_at(t0 + kC2 * h, k2);
            StepPair k3 = stage(x0, v0, h, kA31 * f1.dx + kA32 * f2.dx,
                                kA31 * f1.dv + kA32 * f2.dv);
            Deriv f3 = eval_at(t0 + kC3 * h, k3);
            StepPair k4 = stage(x0, v0, h, kA41 * f1.dx + kA42 * f2.dx + kA43 * f3.dx,
                                kA41 * f1.dv + kA42 * f2.dv + kA43 * f3.dv);
            Deriv f4 = eval_at(t0 + kC4 * h, k4);
            StepPair k5 = stage(x0, v0, h,
                                kA51 * f1.dx + kA52 * f2.dx + kA53 * f3.dx + kA54 * f4.dx,
                                kA51 * f1.dv + kA52 * f2.dv + kA53 * f3.dv + kA54 * f4.dv);
            Deriv f5 = eval_at(t0 + kC5 * h, k5);
            StepPair k6 = stage(x0, v0, h,
                                kA61 * f1.dx + kA62 * f2.dx + kA63 * f3.dx + kA64 * f4.dx +
                                    kA65 * f5.dx,
                                kA61 * f1.dv + kA62 * f2.dv + kA63 * f3.dv + kA64 * f4.dv +
                                    kA65 * f5.dv);
            Deriv f6 = eval_at(t0 + h, k6);
            StepPair y1 = stage(x0, v0, h,
                                kB1 * f1.dx + kB3 * f3.dx + kB4 * f4.dx + kB5 * f5.dx +
                                    kB6 * f6.dx,
                                kB1 * f1.dv + kB3 * f3.dv + kB4 * f4.dv + kB5 * f5.dv +
                                    kB6 * f6.dv);
            Deriv f7 = eval_at(t0 + h, y1);

            const double err_x = h * (kE1 * f1.dx + kE3 * f3.dx + kE4 * f4.dx +
                                      kE5 * f5.dx + kE6 * f6.dx + kE7 * f7.dx);
            const double err_v = h * (kE1 * f1.dv + kE3 * f3.dv + kE4 * f4.dv +
                                      kE5 * f5.dv + kE6 * f6.dv + kE7 * f7.dv);
            const double sc_x =
                s_.abs_tol_x + s_.rel_tol * std::max(std::abs(x0), std::abs(y1.x));
            const double sc_v =
                s_.abs_tol_v + s_.rel_tol * std::max(std::abs(v0), std::abs(y1.v));
            const double ex = err_x / sc_x;
            const double ev = err_v / sc_v;
            double err = std::sqrt(0.5 * (ex * ex + ev * ev));

            if (!std::isfinite(err)) {
                if (!std::isfinite(y1.x) || !std::isfinite(y1.v)) {
                    // Blowing up mid-step; retry smaller before giving up.
                    h *= 0.25;
                    last_rejected = true;
                    if (h <= hmin) {
                        throw IntegrationError(IntegrationError::Kind::NonFiniteState,
                                               "state became non-finite at t = " +
                                                   std::to_string(t0));
                    }
                    continue;
                }
                throw IntegrationError(IntegrationError::Kind::NonFiniteState,
                                       "error estimate became non-finite at t = " +
                                           std::to_string(t0));
            }

            const double fac11 = std::pow(err, kExpo1);
            if (err <= 1.0) {
                // Divisor clamped to [1/facmax, 1/facmin]: the next step
                // grows at most kFacMax-fold and shrinks at most 5-fold.
                double fac = fac11 / std::pow(facold, kBeta);
                fac = std::max(1.0 / kFacMax, std::min(1.0 / kFacMin, fac / kSafety));
                double hnew = h / fac;
                if (last_rejected) {
                    hnew = std::min(hnew, h);
                }
                facold = std::max(err, 1e-4);
                y.t = final_step ? t1 : t0 + h;
                y.x = y1.x;
                y.v = y1.v;
                f1 = f7; // FSAL
                observe(y);
                if (final_step) {
                    return y;
                }
                h = std::min(hnew, hmax);
                last_rejected = false;
            } else {
                h = h / std::min(1.0 / kFacMin, fac11 / kSafety);
                last_rejected = true;
            }
        }
        throw IntegrationError(IntegrationError::Kind::MaxStepsExceeded,
                               "step budget exhausted before reaching t1");
    }

private:
    Deriv eval(const State& s) { return rhs_(s); }

    Deriv eval_at(double t, const StepPair& p) {
        State s;
        s.x = p.x;
        s.v = p.v;
        s.t = t;
        return rhs_(s);
    }

    static StepPair stage(double x0, double v0, double h, double sum_dx, double sum_dv) {
        return {x0 + h * sum_dx, v0 + h * sum_dv};
    }

    // Classic two-trial-derivative starting-step heuristic.
    double initial_step(const State& y, const Deriv& f0, double hmax) {
        const double sc_x = s_.abs_tol_x + s_.rel_tol * std::abs(y.x);
        const double sc_v = s_.abs_tol_v + s_.rel_tol * std::abs(y.v);
        const double d0 = std::sqrt(0.5 * ((y.x / sc_x) * (y.x / sc_x) +
                                           (y.v / sc_v) * (y.v / sc_v)));
        const double d1 = std::sqrt(0.5 * ((f0.dx / sc_x) * (f0.dx / sc_x) +
                                           (f0.dv / sc_v) * (f0.dv / sc_v)));
        double h0 = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 * hmax : 0.01 * (d0 / d1);
        h0 = std::min(h0, hmax);

        State trial;
        trial.x = y.x + h0 * f0.dx;
        trial.v = y.v + h0 * f0.dv;
        trial.t = y.t + h0;
        Deriv f1 = eval(trial);
        const double d2 = std::sqrt(0.5 * (((f1.dx - f0.dx) / sc_x) * ((f1.dx - f0.dx) / sc_x) +
                                           ((f1.dv - f0.dv) / sc_v) * ((f1.dv - f0.dv) / sc_v))) /
                          h0;
        const double d = std::max(d1, d2);
        const double h1 = d > 1e-15 ? std::pow(0.01 / d, 0.2) : std::max(1e-6 * hmax, h0 * 1e-3);
        return std::min({100.0 * h0, h1, hmax});
    }

    Rhs& rhs_;
    const IntegratorSettings& s_;
};

} // namespace detail

/// Integrates dstate/dt = rhs(state) from s0.t forward to t1 > s0.t and
/// returns the state at exactly t1. Rhs is any callable mapping
/// const State& to Deriv. Throws std::domain_error for a non-forward
/// span and IntegrationError when step control fails.
template <class Rhs>
State integrate(Rhs&& rhs, State s0, double t1, const IntegratorSettings& settings = {}) {
    validate(settings);
    detail::Dopri5<std::remove_reference_t<Rhs>> engine(rhs, settings);
    return engine.run(s0, t1, [](const State&) {});
}

/// Integrates as above but records n_samples + 1 states at uniformly
/// spaced times covering [s0.t, t1], endpoints exact.
template <class Rhs>
Trajectory integrate_sampled(Rhs&& rhs, State s0, double t1, int n_samples,
                             const IntegratorSettings& settings = {}) {
    validate(settings);
    if (n_samples < 1) {
        throw std::invalid_argument("n_samples must be at least 1");
    }
    Trajectory out;
    out.samples.reserve(static_cast<std::size_t>(n_samples) + 1);
    out.samples.push_back(s0);

    const double t0 = s0.t;
    const double span = t1 - t0;
    State cur = s0;
    for (int k = 1; k <= n_samples; ++k) {
        const double tk = k == n_samples ? t1 : t0 + span * (static_cast<double>(k) / n_samples);
        detail::Dopri5<std::remove_reference_t<Rhs>> engine(rhs, settings);
        cur = engine.run(cur, tk, [](const State&) {});
        out.samples.push_back(cur);
    }
    return out;
}

} // namespace trapstab
