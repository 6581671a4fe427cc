#include "trapstab/scan.hpp"

#include "trapstab/errors.hpp"
#include "trapstab/io_csv.hpp"

#include <omp.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace trapstab {

GridSpec GridSpec::stability_default() {
    GridSpec g;
    g.x_min = 0.0;
    g.x_max = 1.2;
    g.nx = 600;
    g.x_name = "q";
    g.y_min = -0.1;
    g.y_max = 0.8;
    g.ny = 600;
    g.y_name = "a";
    return g;
}

GridSpec GridSpec::exclusion_default() {
    GridSpec g;
    g.x_min = -9.0;
    g.x_max = -3.0;
    g.nx = 300;
    g.x_name = "log10_rc_m";
    g.x_scale = AxisScale::Log10;
    g.y_min = -20.0;
    g.y_max = 2.0;
    g.ny = 300;
    g.y_name = "log10_lambda_per_s";
    g.y_scale = AxisScale::Log10;
    return g;
}

void validate(const GridSpec& spec) {
    if (spec.nx < 1 || spec.ny < 1) {
        throw std::invalid_argument("grid must have at least one cell per axis");
    }
    if (!(spec.x_min < spec.x_max) || !(spec.y_min < spec.y_max)) {
        throw std::invalid_argument("grid axis bounds must satisfy min < max");
    }
    if (spec.x_name.empty() || spec.y_name.empty()) {
        throw std::invalid_argument("grid axes must be named");
    }
}

namespace {

int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("TRAPSTAB_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end && *end == '\0' && n > 0 && n <= 4096) {
            return static_cast<int>(n);
        }
    }
    return omp_get_max_threads();
}

// Both kernels write each cell exactly once through the same per-cell
// function, so the result is identical for any worker count.
template <class CellFn>
void run_cells(std::size_t n, const ScanOptions& options, const CellFn& fn) {
    if (options.serial_reference) {
        for (std::size_t idx = 0; idx < n; ++idx) {
            fn(idx);
        }
        return;
    }
    const int threads = resolve_threads(options.threads);
    const std::int64_t count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::int64_t idx = 0; idx < count; ++idx) {
        fn(static_cast<std::size_t>(idx));
    }
}

const char* method_name(ScanMethod m) {
    switch (m) {
        case ScanMethod::TraceHomogeneous: return "trace";
        case ScanMethod::TraceForced: return "trace-forced";
        case ScanMethod::Boundedness: return "bounded";
    }
    return "?";
}

const char* construction_name(Construction c) {
    return c == Construction::Homogeneous ? "homogeneous" : "forced";
}

const char* shape_mode_name(ShapeMode m) {
    return m == ShapeMode::UnitF ? "unit" : "computed";
}

MonodromyPolicy policy_for_method(const MonodromyPolicy& policy, ScanMethod method) {
    MonodromyPolicy p = policy;
    switch (method) {
        case ScanMethod::TraceHomogeneous:
            p.construction = Construction::Homogeneous;
            break;
        case ScanMethod::TraceForced:
            p.construction = Construction::Forced;
            break;
        case ScanMethod::Boundedness:
            break;
    }
    return p;
}

void check_scan_options(const ScanOptions& options) {
    if (options.method == ScanMethod::Boundedness) {
        if (options.bounded_periods < 1) {
            throw std::invalid_argument("bounded_periods must be at least 1");
        }
        if (!(options.growth_limit > 1.0)) {
            throw std::invalid_argument("growth_limit must exceed 1");
        }
    }
}

StabilityVerdict classify_cell(const CslMathieuSystem& sys, const MonodromyPolicy& policy,
                               const IntegratorSettings& settings,
                               const ScanOptions& options) {
    if (options.method == ScanMethod::Boundedness) {
        return empirical_boundedness(sys, policy, options.bounded_periods,
                                     options.growth_limit, settings);
    }
    return classify(transfer_matrix(sys, policy, settings));
}

void append_policy_provenance(ScanResult& result, const MonodromyPolicy& policy,
                              const IntegratorSettings& settings,
                              const ScanOptions& options) {
    auto& p = result.provenance;
    p.emplace_back("construction", construction_name(policy.construction));
    p.emplace_back("t_start_s", fmt17(policy.t_start));
    p.emplace_back("ic_scale_x_m", fmt17(policy.ic_scale_x));
    p.emplace_back("ic_scale_v_m_per_s", fmt17(policy.ic_scale_v));
    if (options.method == ScanMethod::Boundedness) {
        p.emplace_back("bounded_periods", std::to_string(options.bounded_periods));
        p.emplace_back("growth_limit", fmt17(options.growth_limit));
    }
    p.emplace_back("rel_tol", fmt17(settings.rel_tol));
    p.emplace_back("abs_tol_x_m", fmt17(settings.abs_tol_x));
    p.emplace_back("abs_tol_v_m_per_s", fmt17(settings.abs_tol_v));
    p.emplace_back("max_step_s", fmt17(settings.max_step));
}

} // namespace

ScanResult scan_aq(const GridSpec& grid, const CslParams& csl, double omega,
                   const MonodromyPolicy& policy, const IntegratorSettings& settings,
                   const ScanOptions& options) {
    validate(grid);
    validate(settings);
    check_scan_options(options);
    if (!(omega > 0.0)) {
        throw std::domain_error("omega must be positive");
    }
    if (csl.lambda != 0.0) {
        validate(csl);
    }

    const bool x_is_q = grid.x_name == "q" && grid.y_name == "a";
    const bool x_is_a = grid.x_name == "a" && grid.y_name == "q";
    if (!x_is_q && !x_is_a) {
        throw std::invalid_argument("stability grid axes must be named 'a' and 'q'");
    }

    const MonodromyPolicy cell_policy = policy_for_method(policy, options.method);
    {
        // Policy problems are run-level mistakes; surface them before
        // the grid loop rather than as 360000 flagged cells.
        CslMathieuSystem probe;
        probe.mathieu = {grid.y_center(0), grid.x_center(0), omega};
        probe.csl = csl;
        validate(cell_policy, probe);
        if (options.method == ScanMethod::Boundedness && csl.lambda > 0.0 &&
            !(cell_policy.t_start > 0.0)) {
            throw std::domain_error("boundedness probe needs t_start > 0");
        }
    }

    ScanResult result;
    result.grid = grid;
    result.method = options.method;
    const std::size_t n = grid.cells();
    result.verdicts.assign(n, Classification::Unstable);
    result.traces.assign(n, std::numeric_limits<double>::quiet_NaN());
    result.flags.assign(n, kCellFlagNone);

    const int nx = grid.nx;
    run_cells(n, options, [&](std::size_t idx) {
        const int i = static_cast<int>(idx % static_cast<std::size_t>(nx));
        const int j = static_cast<int>(idx / static_cast<std::size_t>(nx));
        const double xv = grid.x_center(i);
        const double yv = grid.y_center(j);

        CslMathieuSystem sys;
        sys.mathieu.a = x_is_q ? yv : xv;
        sys.mathieu.q = x_is_q ? xv : yv;
        sys.mathieu.omega = omega;
        sys.csl = csl;
        try {
            const StabilityVerdict v = classify_cell(sys, cell_policy, settings, options);
            result.verdicts[idx] = v.classification;
            result.traces[idx] = v.trace;
        } catch (const IntegrationError&) {
            result.verdicts[idx] = Classification::Unstable;
            result.flags[idx] = kCellFlagIntegratorError;
        }
    });

    result.provenance.emplace_back("method", method_name(options.method));
    result.provenance.emplace_back("omega_rad_per_s", fmt17(omega));
    result.provenance.emplace_back("lambda_per_s", fmt17(csl.lambda));
    result.provenance.emplace_back("rc_m", fmt17(csl.rc));
    result.provenance.emplace_back("radius_m", fmt17(csl.radius));
    result.provenance.emplace_back("shape_mode", shape_mode_name(csl.shape_mode));
    {
        CslMathieuSystem sys;
        sys.csl = csl;
        result.provenance.emplace_back("shape_f", fmt17(sys.shape()));
    }
    append_policy_provenance(result, cell_policy, settings, options);
    return result;
}

ScanResult scan_exclusion(double a, double q, double omega, const GridSpec& grid,
                          const CslParams& base_csl, const MonodromyPolicy& policy,
                          const IntegratorSettings& settings, const ScanOptions& options) {
    validate(grid);
    validate(settings);
    check_scan_options(options);
    if (!(omega > 0.0)) {
        throw std::domain_error("omega must be positive");
    }
    if (grid.x_name != "log10_rc_m" || grid.y_name != "log10_lambda_per_s") {
        throw std::invalid_argument(
            "exclusion grid axes must be 'log10_rc_m' and 'log10_lambda_per_s'");
    }

    const MonodromyPolicy cell_policy = policy_for_method(policy, options.method);

    // An exclusion map presumes the trap holds the ion when no collapse
    // forcing acts; otherwise every cell would be vacuously excluded.
    CslMathieuSystem reference;
    reference.mathieu = {a, q, omega};
    reference.csl = base_csl;
    reference.csl.lambda = 0.0;
    validate(cell_policy, reference);
    const StabilityVerdict ref_verdict =
        classify_cell(reference, cell_policy, settings, options);
    if (ref_verdict.classification != Classification::Stable) {
        throw PhysicsPreconditionError(
            "reference point (a, q) is not stable without CSL forcing");
    }
    if (options.method != ScanMethod::TraceHomogeneous && !(cell_policy.t_start > 0.0)) {
        throw std::domain_error("exclusion scan needs t_start > 0: cells are forced");
    }

    ScanResult result;
    result.grid = grid;
    result.method = options.method;
    const std::size_t n = grid.cells();
    result.verdicts.assign(n, Classification::Unstable);
    result.traces.assign(n, std::numeric_limits<double>::quiet_NaN());
    result.flags.assign(n, kCellFlagNone);

    const int nx = grid.nx;
    run_cells(n, options, [&](std::size_t idx) {
        const int i = static_cast<int>(idx % static_cast<std::size_t>(nx));
        const int j = static_cast<int>(idx / static_cast<std::size_t>(nx));

        CslMathieuSystem sys;
        sys.mathieu = {a, q, omega};
        sys.csl = base_csl;
        sys.csl.rc = std::pow(10.0, grid.x_center(i));
        sys.csl.lambda = std::pow(10.0, grid.y_center(j));
        try {
            const StabilityVerdict v = classify_cell(sys, cell_policy, settings, options);
            result.verdicts[idx] = v.classification;
            result.traces[idx] = v.trace;
        } catch (const IntegrationError&) {
            result.verdicts[idx] = Classification::Unstable;
            result.flags[idx] = kCellFlagIntegratorError;
        }
    });

    result.provenance.emplace_back("method", method_name(options.method));
    result.provenance.emplace_back("omega_rad_per_s", fmt17(omega));
    result.provenance.emplace_back("ref_a", fmt17(a));
    result.provenance.emplace_back("ref_q", fmt17(q));
    result.provenance.emplace_back("radius_m", fmt17(base_csl.radius));
    result.provenance.emplace_back("shape_mode", shape_mode_name(base_csl.shape_mode));
    append_policy_provenance(result, cell_policy, settings, options);
    return result;
}

double find_boundary_q(double a, double q_lo, double q_hi, double omega,
                       const IntegratorSettings& settings, double tol) {
    if (!(omega > 0.0)) {
        throw std::domain_error("omega must be positive");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("tolerance must be positive");
    }
    if (q_lo == q_hi) {
        throw std::invalid_argument("bracket is degenerate: q_lo == q_hi");
    }

    MonodromyPolicy policy = MonodromyPolicy::defaults(omega);
    policy.construction = Construction::Homogeneous;
    const auto excess = [&](double q) {
        CslMathieuSystem sys;
        sys.mathieu = {a, q, omega};
        return std::abs(transfer_matrix(sys, policy, settings).trace()) - 2.0;
    };

    double lo = q_lo, hi = q_hi;
    double f_lo = excess(lo);
    if (std::abs(f_lo) <= tol) {
        return lo;
    }
    double f_hi = excess(hi);
    if (std::abs(f_hi) <= tol) {
        return hi;
    }
    if ((f_lo > 0.0) == (f_hi > 0.0)) {
        throw std::invalid_argument("bracket does not straddle the stability boundary");
    }

    double mid = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        const double f_mid = excess(mid);
        if (std::abs(f_mid) <= tol) {
            return mid;
        }
        if ((f_mid > 0.0) == (f_hi > 0.0)) {
            hi = mid;
            f_hi = f_mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
        if (std::abs(hi - lo) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                      std::max(1.0, std::abs(mid))) {
            break;
        }
    }
    return mid;
}

} // namespace trapstab
