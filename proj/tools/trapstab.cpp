#include "trapstab/config.hpp"
#include "trapstab/errors.hpp"
#include "trapstab/floquet.hpp"
#include "trapstab/integrator.hpp"
#include "trapstab/io_csv.hpp"
#include "trapstab/io_svg.hpp"
#include "trapstab/params.hpp"
#include "trapstab/scan.hpp"
#include "trapstab/version.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace trapstab;

struct CommonArgs {
    std::string config_path;
    std::optional<double> a;
    std::optional<double> q;
    std::optional<double> omega;
    bool omega_in_hz = false;
    bool omega_angular = false;
    std::optional<double> lambda;
    std::optional<double> rc;
    std::optional<double> radius;
    std::optional<std::string> shape;
    std::optional<std::string> method;
    std::optional<double> t_start;
    std::optional<double> ic_scale_x;
    std::optional<int> threads;
    std::string out_path;
    std::string svg_path;
};

void add_common_options(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Configuration file (key = value lines)");
    cmd->add_option("--a", args.a, "Mathieu a parameter (direct mode)");
    cmd->add_option("--q", args.q, "Mathieu q parameter (direct mode)");
    cmd->add_option("--omega", args.omega, "Drive frequency, rad/s unless --hz");
    cmd->add_flag("--hz", args.omega_in_hz, "Interpret --omega as a frequency in Hz");
    cmd->add_flag("--angular", args.omega_angular, "Interpret --omega in rad/s (default)");
    cmd->add_option("--lambda", args.lambda, "Collapse rate, 1/s");
    cmd->add_option("--rc", args.rc, "Collapse correlation length, m");
    cmd->add_option("--radius", args.radius, "Sphere radius for the shape factor, m");
    cmd->add_option("--shape-factor", args.shape, "Shape factor mode: unit or computed")
        ->check(CLI::IsMember({"unit", "computed"}));
    cmd->add_option("--method", args.method,
                    "Stability decision: trace, trace-forced, or bounded")
        ->check(CLI::IsMember({"trace", "trace-forced", "bounded"}));
    cmd->add_option("--t-start", args.t_start, "Monodromy window start time, s");
    cmd->add_option("--ic-scale-x", args.ic_scale_x, "Initial displacement scale, m");
    cmd->add_option("--threads", args.threads, "Worker threads for scans");
    cmd->add_option("--out", args.out_path, "Output path (default: stdout)");
}

KeyValueConfig load_config(const CommonArgs& args) {
    if (args.config_path.empty()) {
        return {};
    }
    return KeyValueConfig::load(args.config_path);
}

double resolve_omega_flag(const CommonArgs& args) {
    if (args.omega_in_hz && args.omega_angular) {
        throw ConfigError("--hz and --angular are mutually exclusive");
    }
    if (!args.omega) {
        throw ConfigError("internal: omega flag not set");
    }
    return args.omega_in_hz ? 2.0 * std::numbers::pi * *args.omega : *args.omega;
}

bool has_trap_source(const KeyValueConfig& cfg) {
    for (const auto& key :
         {"trap.dc_voltage_V", "trap.ac_amplitude_V", "trap.omega_rad_per_s", "trap.r0_m",
          "trap.charge_C", "trap.mass_kg"}) {
        if (cfg.has(key)) {
            return true;
        }
    }
    return false;
}

bool has_direct_source(const KeyValueConfig& cfg, const CommonArgs& args) {
    return args.a.has_value() || args.q.has_value() || cfg.has("mathieu.a") ||
           cfg.has("mathieu.q");
}

TrapConfig resolve_trap(const KeyValueConfig& cfg, const CommonArgs& args) {
    std::vector<std::string> missing;
    const auto need = [&](const char* key) {
        if (!cfg.has(key)) {
            missing.emplace_back(key);
            return 0.0;
        }
        return *cfg.get_double(key);
    };
    TrapConfig trap;
    trap.dc_voltage = need("trap.dc_voltage_V");
    trap.ac_amplitude = need("trap.ac_amplitude_V");
    trap.omega = need("trap.omega_rad_per_s");
    trap.r0 = need("trap.r0_m");
    trap.charge = need("trap.charge_C");
    trap.mass = need("trap.mass_kg");
    if (!missing.empty()) {
        std::string what = "incomplete trap configuration, missing:";
        for (const auto& key : missing) {
            what += ' ' + key;
        }
        throw ConfigError(what);
    }
    if (args.omega) {
        trap.omega = resolve_omega_flag(args);
    }
    return trap;
}

/// Mathieu parameters plus, when derived from electrode settings, both
/// axes for reporting.
struct ResolvedMathieu {
    MathieuParams params; // x axis when derived from a trap
    std::optional<AxisPair> axes;
};

ResolvedMathieu resolve_mathieu(const KeyValueConfig& cfg, const CommonArgs& args) {
    const bool trap_source = has_trap_source(cfg);
    const bool direct_source = has_direct_source(cfg, args);
    if (trap_source && direct_source) {
        throw ConfigError(
            "both electrode settings (trap.*) and direct Mathieu parameters given; "
            "provide exactly one source");
    }
    if (trap_source) {
        const AxisPair axes = mathieu_from_trap(resolve_trap(cfg, args));
        return {axes.x, axes};
    }
    if (!direct_source) {
        throw ConfigError(
            "no operating point: provide trap.* settings or --a/--q (mathieu.*)");
    }

    ResolvedMathieu out;
    std::optional<double> a = args.a;
    if (!a) {
        a = cfg.get_double("mathieu.a");
    }
    std::optional<double> q = args.q;
    if (!q) {
        q = cfg.get_double("mathieu.q");
    }
    if (!a || !q) {
        throw ConfigError("direct mode needs both a and q");
    }
    std::optional<double> omega;
    if (args.omega) {
        omega = resolve_omega_flag(args);
    } else {
        omega = cfg.get_double("mathieu.omega_rad_per_s");
    }
    if (!omega) {
        throw ConfigError("direct mode needs a drive frequency (--omega or "
                          "mathieu.omega_rad_per_s)");
    }
    out.params = {*a, *q, *omega};
    return out;
}

CslParams resolve_csl(const KeyValueConfig& cfg, const CommonArgs& args) {
    CslParams csl;
    if (args.lambda) {
        csl.lambda = *args.lambda;
    } else if (const auto v = cfg.get_double("csl.lambda_per_s")) {
        csl.lambda = *v;
    }
    if (args.rc) {
        csl.rc = *args.rc;
    } else if (const auto v = cfg.get_double("csl.rc_m")) {
        csl.rc = *v;
    }
    if (args.radius) {
        csl.radius = *args.radius;
    } else if (const auto v = cfg.get_double("csl.radius_m")) {
        csl.radius = *v;
    } else {
        csl.radius = csl.rc; // sphere comparable to the correlation length
    }
    std::optional<std::string> shape = args.shape;
    if (!shape) {
        shape = cfg.get_string("csl.shape_factor");
    }
    if (shape) {
        if (*shape == "unit") {
            csl.shape_mode = ShapeMode::UnitF;
        } else if (*shape == "computed") {
            csl.shape_mode = ShapeMode::ComputedF;
        } else {
            throw ConfigError("csl.shape_factor must be 'unit' or 'computed', got '" +
                              *shape + "'");
        }
    }
    if (csl.lambda < 0.0) {
        throw ConfigError("collapse rate lambda must be non-negative");
    }
    if (csl.lambda > 0.0) {
        validate(csl);
    }
    return csl;
}

ScanMethod resolve_method(const KeyValueConfig& cfg, const CommonArgs& args) {
    std::optional<std::string> name = args.method;
    if (!name) {
        name = cfg.get_string("scan.method");
    }
    if (!name || *name == "trace-forced") {
        return ScanMethod::TraceForced;
    }
    if (*name == "trace") {
        return ScanMethod::TraceHomogeneous;
    }
    if (*name == "bounded") {
        return ScanMethod::Boundedness;
    }
    throw ConfigError("unknown method '" + *name +
                      "' (expected trace, trace-forced, or bounded)");
}

MonodromyPolicy resolve_policy(const KeyValueConfig& cfg, const CommonArgs& args,
                               double omega) {
    MonodromyPolicy policy = MonodromyPolicy::defaults(omega);
    if (args.t_start) {
        policy.t_start = *args.t_start;
    } else if (const auto v = cfg.get_double("policy.t_start_s")) {
        policy.t_start = *v;
    }
    if (args.ic_scale_x) {
        policy.ic_scale_x = *args.ic_scale_x;
        policy.ic_scale_v = policy.ic_scale_x * omega;
    } else if (const auto v = cfg.get_double("policy.ic_scale_x_m")) {
        policy.ic_scale_x = *v;
        policy.ic_scale_v = policy.ic_scale_x * omega;
    }
    if (const auto v = cfg.get_double("policy.ic_scale_v_m_per_s")) {
        policy.ic_scale_v = *v;
    }
    return policy;
}

IntegratorSettings resolve_settings(const KeyValueConfig& cfg) {
    IntegratorSettings s;
    if (const auto v = cfg.get_double("integrator.rel_tol")) {
        s.rel_tol = *v;
    }
    if (const auto v = cfg.get_double("integrator.abs_tol_x_m")) {
        s.abs_tol_x = *v;
    }
    if (const auto v = cfg.get_double("integrator.abs_tol_v_m_per_s")) {
        s.abs_tol_v = *v;
    }
    if (const auto v = cfg.get_double("integrator.max_step_s")) {
        s.max_step = *v;
    }
    if (const auto v = cfg.get_double("integrator.initial_step_s")) {
        s.initial_step = *v;
    }
    validate(s);
    return s;
}

ScanOptions resolve_scan_options(const KeyValueConfig& cfg, const CommonArgs& args) {
    ScanOptions options;
    options.method = resolve_method(cfg, args);
    if (args.threads) {
        options.threads = *args.threads;
    } else if (const auto v = cfg.get_int("scan.threads")) {
        options.threads = *v;
    }
    if (const auto v = cfg.get_int("scan.bounded_periods")) {
        options.bounded_periods = *v;
    }
    if (const auto v = cfg.get_double("scan.growth_limit")) {
        options.growth_limit = *v;
    }
    return options;
}

GridSpec resolve_stability_grid(const KeyValueConfig& cfg) {
    GridSpec g = GridSpec::stability_default();
    if (const auto v = cfg.get_double("scan.q_min")) {
        g.x_min = *v;
    }
    if (const auto v = cfg.get_double("scan.q_max")) {
        g.x_max = *v;
    }
    if (const auto v = cfg.get_int("scan.nq")) {
        g.nx = *v;
    }
    if (const auto v = cfg.get_double("scan.a_min")) {
        g.y_min = *v;
    }
    if (const auto v = cfg.get_double("scan.a_max")) {
        g.y_max = *v;
    }
    if (const auto v = cfg.get_int("scan.na")) {
        g.ny = *v;
    }
    return g;
}

GridSpec resolve_exclusion_grid(const KeyValueConfig& cfg) {
    GridSpec g = GridSpec::exclusion_default();
    if (const auto v = cfg.get_double("scan.log10_rc_min")) {
        g.x_min = *v;
    }
    if (const auto v = cfg.get_double("scan.log10_rc_max")) {
        g.x_max = *v;
    }
    if (const auto v = cfg.get_int("scan.n_rc")) {
        g.nx = *v;
    }
    if (const auto v = cfg.get_double("scan.log10_lambda_min")) {
        g.y_min = *v;
    }
    if (const auto v = cfg.get_double("scan.log10_lambda_max")) {
        g.y_max = *v;
    }
    if (const auto v = cfg.get_int("scan.n_lambda")) {
        g.ny = *v;
    }
    return g;
}

SvgStyle resolve_style(const KeyValueConfig& cfg) {
    SvgStyle style;
    if (const auto v = cfg.get_int("render.width_px")) {
        style.width = *v;
    }
    if (const auto v = cfg.get_int("render.height_px")) {
        style.height = *v;
    }
    if (const auto v = cfg.get_string("render.stable_color")) {
        style.stable_color = *v;
    }
    if (const auto v = cfg.get_string("render.unstable_color")) {
        style.unstable_color = *v;
    }
    return style;
}

std::vector<SvgMarker> default_exclusion_markers() {
    // Conventional collapse-rate reference points at rc = 1e-7 m.
    return {{"GRW", -7.0, -17.0}, {"Adler", -7.0, -8.0}};
}

/// Writes text to the path, or to stdout when the path is empty.
void write_text_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot open '" + path + "' for writing");
    }
    out << text;
    out.flush();
    if (!out) {
        throw ConfigError("failed while writing '" + path + "'");
    }
}

// ---------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------

int cmd_trap_params(const CommonArgs& args) {
    const KeyValueConfig cfg = load_config(args);
    if (!has_trap_source(cfg)) {
        throw ConfigError("trap-params needs electrode settings (trap.* keys)");
    }
    if (has_direct_source(cfg, args)) {
        throw ConfigError("trap-params maps electrode settings; --a/--q do not apply");
    }
    const AxisPair axes = mathieu_from_trap(resolve_trap(cfg, args));

    std::ostringstream out;
    out << "a_x = " << fmt17(axes.x.a) << '\n';
    out << "q_x = " << fmt17(axes.x.q) << '\n';
    out << "a_y = " << fmt17(axes.y.a) << '\n';
    out << "q_y = " << fmt17(axes.y.q) << '\n';
    const auto print_mu = [&out](const char* name, const MathieuParams& p) {
        std::string value;
        try {
            value = fmt17(dehmelt_index(p));
        } catch (const std::domain_error&) {
            value = "n/a (outside secular stable region)";
        }
        out << name << " = " << value << '\n';
    };
    print_mu("mu_x", axes.x);
    print_mu("mu_y", axes.y);
    out << "omega_rad_per_s = " << fmt17(axes.x.omega) << '\n';
    write_text_output(args.out_path, out.str());
    return 0;
}

int cmd_trajectory(const CommonArgs& args, std::optional<double> periods_arg,
                   std::optional<int> samples_arg, std::optional<double> x0_arg,
                   std::optional<double> v0_arg) {
    const KeyValueConfig cfg = load_config(args);
    const ResolvedMathieu rm = resolve_mathieu(cfg, args);
    const CslParams csl = resolve_csl(cfg, args);
    const MonodromyPolicy policy = resolve_policy(cfg, args, rm.params.omega);
    const IntegratorSettings settings = resolve_settings(cfg);

    CslMathieuSystem sys;
    sys.mathieu = rm.params;
    sys.csl = csl;

    double periods = 10.0;
    if (periods_arg) {
        periods = *periods_arg;
    } else if (const auto v = cfg.get_double("trajectory.periods")) {
        periods = *v;
    }
    if (!(periods > 0.0)) {
        throw ConfigError("trajectory.periods must be positive");
    }
    int n_samples = 1000;
    if (samples_arg) {
        n_samples = *samples_arg;
    } else if (const auto v = cfg.get_int("trajectory.n_samples")) {
        n_samples = *v;
    }
    if (n_samples < 1) {
        throw ConfigError("trajectory.n_samples must be at least 1");
    }

    State s;
    s.x = x0_arg ? *x0_arg
                 : cfg.get_double("trajectory.x0_m").value_or(policy.ic_scale_x);
    s.v = v0_arg ? *v0_arg : cfg.get_double("trajectory.v0_m_per_s").value_or(0.0);
    s.t = policy.t_start;
    if (sys.csl.lambda > 0.0 && !(s.t > 0.0)) {
        throw ConfigError("forced trajectory needs t_start > 0 (forcing diverges at 0)");
    }

    const double period = sys.mathieu.period();
    const double t1 = s.t + periods * period;
    const IntegratorSettings eff = [&] {
        IntegratorSettings e = settings;
        const double cap = period / 20.0;
        e.max_step = e.max_step > 0.0 ? std::min(e.max_step, cap) : cap;
        return e;
    }();

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!args.out_path.empty()) {
        file.open(args.out_path);
        if (!file) {
            throw ConfigError("cannot open '" + args.out_path + "' for writing");
        }
        out = &file;
    }

    const CachedRhs rhs(sys);
    const auto emit = [&](const State& st) {
        *out << "{\"t\":" << fmt17(st.t) << ",\"x\":" << fmt17(st.x)
             << ",\"v\":" << fmt17(st.v) << "}\n";
    };

    double max_abs_x = std::abs(s.x);
    long written = 0;
    emit(s);
    ++written;
    const double t0 = s.t;
    const double span = t1 - t0;
    try {
        for (int k = 1; k <= n_samples; ++k) {
            const double tk =
                k == n_samples ? t1 : t0 + span * (static_cast<double>(k) / n_samples);
            s = integrate(rhs, s, tk, eff);
            max_abs_x = std::max(max_abs_x, std::abs(s.x));
            emit(s);
            ++written;
        }
    } catch (const IntegrationError& e) {
        *out << "{\"max_abs_x\":" << fmt17(max_abs_x) << ",\"n_samples\":" << written
             << "}\n";
        out->flush();
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    *out << "{\"max_abs_x\":" << fmt17(max_abs_x) << ",\"n_samples\":" << written
         << "}\n";
    out->flush();
    if (!*out) {
        throw ConfigError("failed while writing trajectory output");
    }
    return 0;
}

int cmd_stability_scan(const CommonArgs& args) {
    const KeyValueConfig cfg = load_config(args);
    const ResolvedMathieu rm = [&]() -> ResolvedMathieu {
        // The grid supplies (a, q); only the drive frequency is needed.
        // A full operating point is accepted and its omega reused.
        if (has_trap_source(cfg) || has_direct_source(cfg, args)) {
            return resolve_mathieu(cfg, args);
        }
        if (args.omega) {
            return {{0.0, 0.0, resolve_omega_flag(args)}, std::nullopt};
        }
        if (const auto v = cfg.get_double("mathieu.omega_rad_per_s")) {
            return {{0.0, 0.0, *v}, std::nullopt};
        }
        return {{0.0, 0.0, 1e8}, std::nullopt}; // default drive normalization
    }();

    const CslParams csl = resolve_csl(cfg, args);
    const MonodromyPolicy policy = resolve_policy(cfg, args, rm.params.omega);
    const IntegratorSettings settings = resolve_settings(cfg);
    const ScanOptions options = resolve_scan_options(cfg, args);
    const GridSpec grid = resolve_stability_grid(cfg);

    const ScanResult result = scan_aq(grid, csl, rm.params.omega, policy, settings, options);

    std::ostringstream csv;
    write_scan_csv(csv, result, ScanKind::Stability);
    write_text_output(args.out_path, csv.str());
    if (!args.svg_path.empty()) {
        write_svg(args.svg_path, render_svg(result, ScanKind::Stability, resolve_style(cfg)));
    }
    return 0;
}

int cmd_exclusion_scan(const CommonArgs& args) {
    const KeyValueConfig cfg = load_config(args);
    const ResolvedMathieu rm = resolve_mathieu(cfg, args);
    const CslParams base_csl = resolve_csl(cfg, args);
    const MonodromyPolicy policy = resolve_policy(cfg, args, rm.params.omega);
    const IntegratorSettings settings = resolve_settings(cfg);
    const ScanOptions options = resolve_scan_options(cfg, args);
    const GridSpec grid = resolve_exclusion_grid(cfg);

    const ScanResult result = scan_exclusion(rm.params.a, rm.params.q, rm.params.omega,
                                             grid, base_csl, policy, settings, options);

    std::ostringstream csv;
    write_scan_csv(csv, result, ScanKind::Exclusion);
    write_text_output(args.out_path, csv.str());
    if (!args.svg_path.empty()) {
        SvgStyle style = resolve_style(cfg);
        style.markers = default_exclusion_markers();
        write_svg(args.svg_path, render_svg(result, ScanKind::Exclusion, style));
    }
    return 0;
}

int cmd_render(const CommonArgs& args, const std::string& input_path,
               const std::vector<std::string>& marker_specs) {
    const KeyValueConfig cfg = load_config(args);
    const ParsedScan scan = read_scan_csv(input_path);
    SvgStyle style = resolve_style(cfg);
    if (scan.kind == ScanKind::Exclusion) {
        style.markers = default_exclusion_markers();
    }
    for (const auto& spec : marker_specs) {
        // label:x:y
        const std::size_t p1 = spec.find(':');
        const std::size_t p2 = p1 == std::string::npos ? p1 : spec.find(':', p1 + 1);
        if (p1 == std::string::npos || p2 == std::string::npos) {
            throw ConfigError("marker must be label:x:y, got '" + spec + "'");
        }
        SvgMarker m;
        m.label = spec.substr(0, p1);
        try {
            m.x = std::stod(spec.substr(p1 + 1, p2 - p1 - 1));
            m.y = std::stod(spec.substr(p2 + 1));
        } catch (const std::exception&) {
            throw ConfigError("marker coordinates must be numeric in '" + spec + "'");
        }
        style.markers.push_back(m);
    }
    write_text_output(args.out_path, render_svg(scan, style));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Paul trap stability diagrams and CSL exclusion maps"};
    app.set_version_flag("--version", std::string("trapstab ") + kVersion);
    app.require_subcommand(1);

    CommonArgs args;

    CLI::App* trap_params =
        app.add_subcommand("trap-params", "Map electrode settings to Mathieu (a, q)");
    add_common_options(trap_params, args);

    CLI::App* trajectory =
        app.add_subcommand("trajectory", "Integrate one axis and stream NDJSON samples");
    add_common_options(trajectory, args);
    std::optional<double> traj_periods;
    std::optional<int> traj_samples;
    std::optional<double> traj_x0, traj_v0;
    trajectory->add_option("--periods", traj_periods, "Drive periods to integrate");
    trajectory->add_option("--samples", traj_samples, "Number of output samples");
    trajectory->add_option("--x0", traj_x0, "Initial displacement, m");
    trajectory->add_option("--v0", traj_v0, "Initial velocity, m/s");

    CLI::App* stability =
        app.add_subcommand("stability-scan", "Classify an (a, q) grid and emit CSV");
    add_common_options(stability, args);
    stability->add_option("--svg", args.svg_path, "Also render the scan to this SVG path");

    CLI::App* exclusion = app.add_subcommand(
        "exclusion-scan", "Classify a (rc, lambda) grid at a fixed operating point");
    add_common_options(exclusion, args);
    exclusion->add_option("--svg", args.svg_path, "Also render the scan to this SVG path");

    CLI::App* render =
        app.add_subcommand("render", "Render a scan CSV produced by this tool to SVG");
    add_common_options(render, args);
    std::string render_input;
    std::vector<std::string> render_markers;
    render->add_option("input", render_input, "Scan CSV path")->required();
    render->add_option("--marker", render_markers,
                       "Extra marker as label:x:y (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(trap_params)) {
            return cmd_trap_params(args);
        }
        if (app.got_subcommand(trajectory)) {
            return cmd_trajectory(args, traj_periods, traj_samples, traj_x0, traj_v0);
        }
        if (app.got_subcommand(stability)) {
            return cmd_stability_scan(args);
        }
        if (app.got_subcommand(exclusion)) {
            return cmd_exclusion_scan(args);
        }
        if (app.got_subcommand(render)) {
            return cmd_render(args, render_input, render_markers);
        }
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const PhysicsPreconditionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const IntegrationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
