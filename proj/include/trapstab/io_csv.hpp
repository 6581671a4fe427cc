#pragma once

#include "trapstab/scan.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace trapstab {

/// Formats a double with 17 significant digits (round-trip exact).
std::string fmt17(double value);

enum class ScanKind { Stability, Exclusion };

/// Writes a scan as CSV: a versioned header line, '#'-prefixed
/// provenance and grid metadata, a column header, then one row per cell
/// (x fastest). Stability scans carry columns a,q,trace,verdict,flags;
/// exclusion scans log10_rc_m,log10_lambda_per_s,trace,verdict,flags.
void write_scan_csv(std::ostream& out, const ScanResult& result, ScanKind kind);
void write_scan_csv(const std::string& path, const ScanResult& result, ScanKind kind);

/// One parsed data row of a scan CSV.
struct ScanRow {
    double x = 0.0; // column matching the grid's x axis
    double y = 0.0;
    double trace = 0.0;
    bool positive = false; // stable or allowed
    bool error_flag = false;
};

/// Scan CSV read back into memory; enough to re-render.
struct ParsedScan {
    ScanKind kind = ScanKind::Stability;
    GridSpec grid;
    std::map<std::string, std::string> provenance;
    std::vector<ScanRow> rows; // x fastest, nx*ny entries
};

/// Parses a CSV produced by write_scan_csv. Throws ConfigError on any
/// schema violation (bad header, missing grid metadata, wrong column
/// count, unknown verdict, wrong row count).
ParsedScan read_scan_csv(std::istream& in);
ParsedScan read_scan_csv(const std::string& path);

} // namespace trapstab
