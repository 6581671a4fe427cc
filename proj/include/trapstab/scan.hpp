#pragma once

#include "trapstab/floquet.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace trapstab {

enum class AxisScale { Linear, Log10 };

/// Rectangular parameter grid sampled at cell centers, row-major with x
/// fastest. Axis names bind grid coordinates to physics parameters.
struct GridSpec {
    double x_min = 0.0, x_max = 0.0;
    double y_min = 0.0, y_max = 0.0;
    int nx = 0, ny = 0;
    AxisScale x_scale = AxisScale::Linear;
    AxisScale y_scale = AxisScale::Linear;
    std::string x_name;
    std::string y_name;

    double x_center(int i) const {
        return x_min + (x_max - x_min) * ((i + 0.5) / nx);
    }
    double y_center(int j) const {
        return y_min + (y_max - y_min) * ((j + 0.5) / ny);
    }
    std::size_t cells() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    }

    /// Stability-diagram default: q in [0, 1.2] by a in [-0.1, 0.8],
    /// 600 x 600.
    static GridSpec stability_default();
    /// Exclusion-map default: log10(rc/m) in [-9, -3] by
    /// log10(lambda s) in [-20, 2], 300 x 300.
    static GridSpec exclusion_default();
};

/// Throws std::invalid_argument unless nx, ny >= 1 and each axis has
/// min < max.
void validate(const GridSpec& spec);

enum class ScanMethod { TraceHomogeneous, TraceForced, Boundedness };

struct ScanOptions {
    ScanMethod method = ScanMethod::TraceForced;
    int threads = 0;             // 0 = library default
    bool serial_reference = false; // bypass the parallel kernel
    int bounded_periods = 100;
    double growth_limit = 1e3;
};

inline constexpr std::uint8_t kCellFlagNone = 0;
inline constexpr std::uint8_t kCellFlagIntegratorError = 1;

/// Grid of verdicts plus per-cell diagnostics. Arrays are row-major,
/// cell (i, j) at index j*nx + i. Provenance is an ordered list of
/// run-identifying key/value pairs (never timestamps or worker counts,
/// so equal runs serialize identically).
struct ScanResult {
    GridSpec grid;
    std::vector<Classification> verdicts;
    std::vector<double> traces;
    std::vector<std::uint8_t> flags;
    ScanMethod method = ScanMethod::TraceForced;
    std::vector<std::pair<std::string, std::string>> provenance;

    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.nx) +
               static_cast<std::size_t>(i);
    }
};

/// Classifies every (a, q) cell of the grid under fixed CSL parameters.
/// Axis names must be "a" and "q" in either order. A cell whose
/// integration fails is recorded Unstable with its flag set; the scan
/// never aborts on cell errors. Identical results for any thread count.
ScanResult scan_aq(const GridSpec& grid, const CslParams& csl, double omega,
                   const MonodromyPolicy& policy, const IntegratorSettings& settings,
                   const ScanOptions& options = {});

/// Classifies every (rc, lambda) cell at a fixed trap operating point.
/// Axis names must be "log10_rc_m" (x) and "log10_lambda_per_s" (y).
/// base_csl supplies the shape mode and sphere radius. Throws
/// PhysicsPreconditionError when the reference point is not stable
/// without CSL, since an exclusion map is meaningless there.
ScanResult scan_exclusion(double a, double q, double omega, const GridSpec& grid,
                          const CslParams& base_csl, const MonodromyPolicy& policy,
                          const IntegratorSettings& settings,
                          const ScanOptions& options = {});

/// Bisects |trace| - 2 of the unforced problem in q at fixed a. The
/// bracket endpoints must straddle the boundary. Returns q* with
/// ||trace(q*)| - 2| <= tol.
double find_boundary_q(double a, double q_lo, double q_hi, double omega,
                       const IntegratorSettings& settings = {}, double tol = 1e-9);

} // namespace trapstab
