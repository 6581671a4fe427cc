#include "trapstab/io_svg.hpp"

#include "trapstab/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace trapstab {

namespace {

constexpr double kMarginLeft = 72.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 20.0;
constexpr double kMarginBottom = 56.0;
constexpr int kTicksPerAxis = 5;
const char* kErrorColor = "#c0392b";
const char* kMarkerColor = "#e0a426";

std::string fmt2(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape_text(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c; break;
        }
    }
    return out;
}

// Rounds like the emitted coordinate text so adjacent cells tile without
// hairline gaps.
double snap2(double v) {
    return std::stod(fmt2(v));
}

} // namespace

void validate(const SvgStyle& style) {
    if (style.width <= 0 || style.height <= 0) {
        throw std::invalid_argument("svg dimensions must be positive");
    }
    if (style.width < 160 || style.height < 120) {
        throw std::invalid_argument("svg canvas too small for axes and margins");
    }
    if (style.stable_color.empty() || style.unstable_color.empty()) {
        throw std::invalid_argument("svg cell colors must be non-empty");
    }
}

std::string render_svg(const ParsedScan& scan, const SvgStyle& style) {
    validate(style);
    const GridSpec& g = scan.grid;
    if (scan.rows.size() != g.cells()) {
        throw std::invalid_argument("scan row count does not match its grid");
    }

    const double plot_w = style.width - kMarginLeft - kMarginRight;
    const double plot_h = style.height - kMarginTop - kMarginBottom;

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width
      << "\" height=\"" << style.height << "\" viewBox=\"0 0 " << style.width << ' '
      << style.height << "\">\n";
    s << "<rect width=\"" << style.width << "\" height=\"" << style.height
      << "\" fill=\"#ffffff\"/>\n";

    // Cell rects, x fastest, row j = 0 at the bottom.
    s << "<g shape-rendering=\"crispEdges\">\n";
    for (int j = 0; j < g.ny; ++j) {
        const double y_hi = snap2(kMarginTop + plot_h * (g.ny - 1 - j) / g.ny);
        const double y_lo = snap2(kMarginTop + plot_h * (g.ny - j) / g.ny);
        for (int i = 0; i < g.nx; ++i) {
            const double x_lo = snap2(kMarginLeft + plot_w * i / g.nx);
            const double x_hi = snap2(kMarginLeft + plot_w * (i + 1) / g.nx);
            const ScanRow& row = scan.rows[static_cast<std::size_t>(j) * g.nx + i];
            const char* fill = row.error_flag
                                   ? kErrorColor
                                   : (row.positive ? style.stable_color.c_str()
                                                   : style.unstable_color.c_str());
            s << "<rect class=\"cell\" x=\"" << fmt2(x_lo) << "\" y=\"" << fmt2(y_hi)
              << "\" width=\"" << fmt2(x_hi - x_lo) << "\" height=\""
              << fmt2(y_lo - y_hi) << "\" fill=\"" << fill << "\"/>\n";
        }
    }
    s << "</g>\n";

    // Frame and ticks.
    s << "<rect x=\"" << fmt2(kMarginLeft) << "\" y=\"" << fmt2(kMarginTop)
      << "\" width=\"" << fmt2(plot_w) << "\" height=\"" << fmt2(plot_h)
      << "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
    s << "<g font-family=\"monospace\" font-size=\"11\" fill=\"#222222\">\n";
    for (int k = 0; k < kTicksPerAxis; ++k) {
        const double frac = static_cast<double>(k) / (kTicksPerAxis - 1);
        const double xv = g.x_min + (g.x_max - g.x_min) * frac;
        const double px = kMarginLeft + plot_w * frac;
        const double py = kMarginTop + plot_h;
        s << "<line x1=\"" << fmt2(px) << "\" y1=\"" << fmt2(py) << "\" x2=\""
          << fmt2(px) << "\" y2=\"" << fmt2(py + 5) << "\" stroke=\"#222222\"/>\n";
        s << "<text x=\"" << fmt2(px) << "\" y=\"" << fmt2(py + 18)
          << "\" text-anchor=\"middle\">" << fmt_tick(xv) << "</text>\n";

        const double yv = g.y_min + (g.y_max - g.y_min) * frac;
        const double qy = kMarginTop + plot_h * (1.0 - frac);
        s << "<line x1=\"" << fmt2(kMarginLeft - 5) << "\" y1=\"" << fmt2(qy)
          << "\" x2=\"" << fmt2(kMarginLeft) << "\" y2=\"" << fmt2(qy)
          << "\" stroke=\"#222222\"/>\n";
        s << "<text x=\"" << fmt2(kMarginLeft - 8) << "\" y=\"" << fmt2(qy + 4)
          << "\" text-anchor=\"end\">" << fmt_tick(yv) << "</text>\n";
    }
    s << "<text x=\"" << fmt2(kMarginLeft + plot_w / 2) << "\" y=\""
      << fmt2(kMarginTop + plot_h + 40) << "\" text-anchor=\"middle\" font-size=\"13\">"
      << escape_text(g.x_name) << "</text>\n";
    s << "<text x=\"14\" y=\"" << fmt2(kMarginTop + plot_h / 2)
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 14 "
      << fmt2(kMarginTop + plot_h / 2) << ")\">" << escape_text(g.y_name)
      << "</text>\n";
    s << "</g>\n";

    // Markers, clipped to the plot area.
    for (const SvgMarker& m : style.markers) {
        if (m.x < g.x_min || m.x > g.x_max || m.y < g.y_min || m.y > g.y_max) {
            continue;
        }
        const double px = kMarginLeft + plot_w * (m.x - g.x_min) / (g.x_max - g.x_min);
        const double py = kMarginTop + plot_h * (1.0 - (m.y - g.y_min) / (g.y_max - g.y_min));
        s << "<circle cx=\"" << fmt2(px) << "\" cy=\"" << fmt2(py)
          << "\" r=\"4\" fill=\"" << kMarkerColor
          << "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
        s << "<text x=\"" << fmt2(px + 7) << "\" y=\"" << fmt2(py - 6)
          << "\" font-family=\"monospace\" font-size=\"12\" fill=\"#222222\">"
          << escape_text(m.label) << "</text>\n";
    }

    s << "</svg>\n";
    return s.str();
}

std::string render_svg(const ScanResult& result, ScanKind kind, const SvgStyle& style) {
    ParsedScan scan;
    scan.kind = kind;
    scan.grid = result.grid;
    const std::size_t n = result.grid.cells();
    scan.rows.resize(n);
    for (int j = 0; j < result.grid.ny; ++j) {
        for (int i = 0; i < result.grid.nx; ++i) {
            const std::size_t idx = result.index(i, j);
            ScanRow& row = scan.rows[idx];
            row.x = result.grid.x_center(i);
            row.y = result.grid.y_center(j);
            row.trace = result.traces[idx];
            row.positive = result.verdicts[idx] == Classification::Stable;
            row.error_flag = result.flags[idx] == kCellFlagIntegratorError;
        }
    }
    return render_svg(scan, style);
}

void write_svg(const std::string& path, const std::string& svg) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot open '" + path + "' for writing");
    }
    out << svg;
    out.flush();
    if (!out) {
        throw ConfigError("failed while writing '" + path + "'");
    }
}

} // namespace trapstab
