#include "trapstab/io_csv.hpp"

#include "trapstab/errors.hpp"
#include "trapstab/version.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace trapstab {

std::string fmt17(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

const char* kStabilityHeader = "# trapstab stability-scan v1";
const char* kExclusionHeader = "# trapstab exclusion-scan v1";
const char* kStabilityColumns = "a,q,trace,verdict,flags";
const char* kExclusionColumns = "log10_rc_m,log10_lambda_per_s,trace,verdict,flags";

const char* scale_name(AxisScale s) {
    return s == AxisScale::Linear ? "linear" : "log10";
}

AxisScale scale_from_name(const std::string& s) {
    if (s == "linear") {
        return AxisScale::Linear;
    }
    if (s == "log10") {
        return AxisScale::Log10;
    }
    throw ConfigError("unknown axis scale '" + s + "'");
}

void write_grid_block(std::ostream& out, const GridSpec& g) {
    out << "# x_name = " << g.x_name << '\n';
    out << "# x_min = " << fmt17(g.x_min) << '\n';
    out << "# x_max = " << fmt17(g.x_max) << '\n';
    out << "# x_scale = " << scale_name(g.x_scale) << '\n';
    out << "# nx = " << g.nx << '\n';
    out << "# y_name = " << g.y_name << '\n';
    out << "# y_min = " << fmt17(g.y_min) << '\n';
    out << "# y_max = " << fmt17(g.y_max) << '\n';
    out << "# y_scale = " << scale_name(g.y_scale) << '\n';
    out << "# ny = " << g.ny << '\n';
}

double parse_double_field(const std::string& field, const std::string& context) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ConfigError("bad numeric field '" + field + "' in " + context);
    }
    return v;
}

long parse_int_field(const std::string& field, const std::string& context) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0') {
        throw ConfigError("bad integer field '" + field + "' in " + context);
    }
    return v;
}

std::string require_key(const std::map<std::string, std::string>& kv,
                        const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
        throw ConfigError("scan CSV is missing metadata key '" + key + "'");
    }
    return it->second;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

} // namespace

void write_scan_csv(std::ostream& out, const ScanResult& result, ScanKind kind) {
    const GridSpec& g = result.grid;
    out << (kind == ScanKind::Stability ? kStabilityHeader : kExclusionHeader) << '\n';
    out << "# version = " << kVersion << '\n';
    for (const auto& [key, value] : result.provenance) {
        out << "# " << key << " = " << value << '\n';
    }
    write_grid_block(out, g);

    const bool x_is_q = g.x_name == "q";
    out << (kind == ScanKind::Stability ? kStabilityColumns : kExclusionColumns) << '\n';
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t idx = result.index(i, j);
            const double xv = g.x_center(i);
            const double yv = g.y_center(j);
            double col1 = xv, col2 = yv;
            if (kind == ScanKind::Stability) {
                col1 = x_is_q ? yv : xv; // a
                col2 = x_is_q ? xv : yv; // q
            }
            const bool positive = result.verdicts[idx] == Classification::Stable;
            const char* verdict = kind == ScanKind::Stability
                                      ? (positive ? "stable" : "unstable")
                                      : (positive ? "allowed" : "excluded");
            const char* flag =
                result.flags[idx] == kCellFlagIntegratorError ? "integrator_error" : "";
            out << fmt17(col1) << ',' << fmt17(col2) << ',' << fmt17(result.traces[idx])
                << ',' << verdict << ',' << flag << '\n';
        }
    }
}

void write_scan_csv(const std::string& path, const ScanResult& result, ScanKind kind) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot open '" + path + "' for writing");
    }
    write_scan_csv(out, result, kind);
    out.flush();
    if (!out) {
        throw ConfigError("failed while writing '" + path + "'");
    }
}

ParsedScan read_scan_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("scan CSV is empty");
    }
    ParsedScan scan;
    if (line == kStabilityHeader) {
        scan.kind = ScanKind::Stability;
    } else if (line == kExclusionHeader) {
        scan.kind = ScanKind::Exclusion;
    } else {
        throw ConfigError("not a trapstab scan CSV (unexpected first line)");
    }

    // Provenance and grid metadata.
    std::string columns;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line[0] != '#') {
            columns = line;
            break;
        }
        const std::size_t eq = line.find(" = ");
        if (eq == std::string::npos || eq <= 2) {
            continue; // non key-value comment
        }
        const std::string key = line.substr(2, eq - 2);
        const std::string value = line.substr(eq + 3);
        scan.provenance[key] = value;
    }

    const char* expected_columns =
        scan.kind == ScanKind::Stability ? kStabilityColumns : kExclusionColumns;
    if (columns != expected_columns) {
        throw ConfigError("scan CSV has unexpected column header '" + columns + "'");
    }

    GridSpec g;
    g.x_name = require_key(scan.provenance, "x_name");
    g.x_min = parse_double_field(require_key(scan.provenance, "x_min"), "x_min");
    g.x_max = parse_double_field(require_key(scan.provenance, "x_max"), "x_max");
    g.x_scale = scale_from_name(require_key(scan.provenance, "x_scale"));
    g.nx = static_cast<int>(parse_int_field(require_key(scan.provenance, "nx"), "nx"));
    g.y_name = require_key(scan.provenance, "y_name");
    g.y_min = parse_double_field(require_key(scan.provenance, "y_min"), "y_min");
    g.y_max = parse_double_field(require_key(scan.provenance, "y_max"), "y_max");
    g.y_scale = scale_from_name(require_key(scan.provenance, "y_scale"));
    g.ny = static_cast<int>(parse_int_field(require_key(scan.provenance, "ny"), "ny"));
    try {
        validate(g);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("scan CSV grid metadata invalid: ") + e.what());
    }
    scan.grid = g;

    const bool x_is_q = scan.kind == ScanKind::Stability && g.x_name == "q";
    const std::size_t expected_rows = g.cells();
    scan.rows.reserve(expected_rows);
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 5) {
            throw ConfigError("scan CSV row with " + std::to_string(fields.size()) +
                              " fields, expected 5");
        }
        ScanRow row;
        const double col1 = parse_double_field(fields[0], "row coordinate");
        const double col2 = parse_double_field(fields[1], "row coordinate");
        row.x = x_is_q ? col2 : col1;
        row.y = x_is_q ? col1 : col2;
        row.trace = parse_double_field(fields[2], "trace");
        const std::string& verdict = fields[3];
        if (scan.kind == ScanKind::Stability
                ? (verdict != "stable" && verdict != "unstable")
                : (verdict != "allowed" && verdict != "excluded")) {
            throw ConfigError("unknown verdict '" + verdict + "' in scan CSV");
        }
        row.positive = verdict == "stable" || verdict == "allowed";
        if (!fields[4].empty() && fields[4] != "integrator_error") {
            throw ConfigError("unknown flag '" + fields[4] + "' in scan CSV");
        }
        row.error_flag = !fields[4].empty();
        scan.rows.push_back(row);
        if (scan.rows.size() > expected_rows) {
            throw ConfigError("scan CSV has more rows than nx*ny");
        }
    }
    if (scan.rows.size() != expected_rows) {
        throw ConfigError("scan CSV has " + std::to_string(scan.rows.size()) +
                          " rows, expected " + std::to_string(expected_rows));
    }
    return scan;
}

ParsedScan read_scan_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path + "' for reading");
    }
    return read_scan_csv(in);
}

} // namespace trapstab
