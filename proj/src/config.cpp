#include "trapstab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace trapstab {

namespace {

std::string trim(const std::string& s) {
    const std::size_t first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const std::size_t last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "trap.dc_voltage_V",
        "trap.ac_amplitude_V",
        "trap.omega_rad_per_s",
        "trap.r0_m",
        "trap.charge_C",
        "trap.mass_kg",
        "mathieu.a",
        "mathieu.q",
        "mathieu.omega_rad_per_s",
        "csl.lambda_per_s",
        "csl.rc_m",
        "csl.radius_m",
        "csl.shape_factor",
        "policy.t_start_s",
        "policy.ic_scale_x_m",
        "policy.ic_scale_v_m_per_s",
        "integrator.rel_tol",
        "integrator.abs_tol_x_m",
        "integrator.abs_tol_v_m_per_s",
        "integrator.max_step_s",
        "integrator.initial_step_s",
        "scan.method",
        "scan.threads",
        "scan.bounded_periods",
        "scan.growth_limit",
        "scan.a_min",
        "scan.a_max",
        "scan.na",
        "scan.q_min",
        "scan.q_max",
        "scan.nq",
        "scan.log10_rc_min",
        "scan.log10_rc_max",
        "scan.n_rc",
        "scan.log10_lambda_min",
        "scan.log10_lambda_max",
        "scan.n_lambda",
        "trajectory.periods",
        "trajectory.n_samples",
        "trajectory.x0_m",
        "trajectory.v0_m_per_s",
        "render.width_px",
        "render.height_px",
        "render.stable_color",
        "render.unstable_color",
    };
    return keys;
}

} // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') {
            continue;
        }
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        if (known_keys().count(key) == 0) {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": unrecognized key '" + key + "'");
        }
        if (cfg.entries_.count(key) != 0) {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": duplicate key '" + key + "'");
        }
        if (value.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": empty value for '" + key + "'");
        }
        cfg.entries_[key] = value;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

bool KeyValueConfig::has(const std::string& key) const {
    return entries_.count(key) != 0;
}

std::optional<std::string> KeyValueConfig::get_string(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    const char* begin = it->second.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ConfigError("config key '" + key + "' has non-numeric value '" +
                          it->second + "'");
    }
    return v;
}

std::optional<int> KeyValueConfig::get_int(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    const char* begin = it->second.c_str();
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0') {
        throw ConfigError("config key '" + key + "' has non-integer value '" +
                          it->second + "'");
    }
    return static_cast<int>(v);
}

} // namespace trapstab
