#pragma once

#include "trapstab/io_csv.hpp"

#include <string>
#include <vector>

namespace trapstab {

/// Labeled point overlaid on a rendered scan, in data coordinates.
struct SvgMarker {
    std::string label;
    double x = 0.0;
    double y = 0.0;
};

/// Appearance of a rendered scan.
struct SvgStyle {
    int width = 900;   // px
    int height = 640;  // px
    std::string stable_color = "#2c6fb3";   // also "allowed"
    std::string unstable_color = "#f2f2f2"; // also "excluded"
    std::vector<SvgMarker> markers;
};

/// Throws std::invalid_argument on non-positive dimensions or empty
/// colors.
void validate(const SvgStyle& style);

/// Renders a parsed scan as a standalone SVG document: one rect per
/// cell, axes with ticks and labels, optional markers. Output depends
/// only on the inputs, byte for byte.
std::string render_svg(const ParsedScan& scan, const SvgStyle& style);

/// Renders an in-memory result by converting it to the parsed form, so
/// direct rendering and CSV round-trip rendering agree.
std::string render_svg(const ScanResult& result, ScanKind kind, const SvgStyle& style);

void write_svg(const std::string& path, const std::string& svg);

} // namespace trapstab
