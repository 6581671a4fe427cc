#pragma once

#include <cmath>
#include <numbers>

namespace trapstab {

/// Constants entering the CSL force scale.
struct PhysicalConstants {
    double hbar = 1.054571817e-34; // J s
    double m0 = 1.67262192e-27;    // kg, nucleon reference mass
};

/// Electrode drive and geometry of a linear quadrupole trap.
struct TrapConfig {
    double dc_voltage = 0.0;   // U, V
    double ac_amplitude = 0.0; // V, zero-to-peak
    double omega = 0.0;        // drive angular frequency, rad/s
    double r0 = 0.0;           // electrode half-distance, m
    double charge = 0.0;       // Q, C
    double mass = 0.0;         // kg
};

/// Dimensionless Mathieu parameters for one transverse axis, plus the
/// drive frequency that sets the time scale.
struct MathieuParams {
    double a = 0.0;
    double q = 0.0;
    double omega = 0.0; // rad/s

    /// Drive period 2*pi/omega in seconds.
    double period() const { return 2.0 * std::numbers::pi / omega; }

    /// Dimensionless Mathieu time xi = omega*t/2.
    double xi(double t) const { return 0.5 * omega * t; }

    /// True when |a| << |q| << 1 holds well enough for the secular
    /// approximation (|a| below a tenth of |q|, |q| below 0.3).
    bool in_dehmelt_regime() const {
        return std::abs(a) < 0.1 * std::abs(q) && std::abs(q) < 0.3;
    }
};

/// Mathieu parameters for both transverse axes of the same trap.
struct AxisPair {
    MathieuParams x;
    MathieuParams y;
};

/// Throws std::domain_error unless omega, r0 and mass are positive and
/// the charge is nonzero.
void validate(const TrapConfig& trap);

/// Maps electrode voltages to Mathieu (a, q) for both transverse axes:
///   a_x = 8 Q U / (m omega^2 r0^2),  q_x = -4 Q V / (m omega^2 r0^2),
/// with the y axis carrying the opposite signs.
AxisPair mathieu_from_trap(const TrapConfig& trap);

/// Secular stability index mu = sqrt(a + q^2/2) of the lowest-order
/// smoothed motion. Throws std::domain_error when a + q^2/2 < 0
/// (outside the approximation's stable region).
double dehmelt_index(const MathieuParams& p);

/// Secular-plus-micromotion trajectory
///   x(t) = A cos(mu omega t / 2) [1 + (q/2) cos(omega t)]
/// for amplitude A in meters. Same domain restriction as dehmelt_index.
double dehmelt_trajectory(double t, double amplitude, const MathieuParams& p);

} // namespace trapstab
