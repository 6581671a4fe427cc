#include "trapstab/io_csv.hpp"
#include "trapstab/io_svg.hpp"

#include "trapstab/config.hpp"
#include "trapstab/errors.hpp"
#include "trapstab/scan.hpp"

#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

using namespace trapstab;

namespace {

constexpr double kOmega = 1e8;

ScanResult small_stability_scan() {
    GridSpec g;
    g.x_min = 0.0;
    g.x_max = 1.2;
    g.nx = 2;
    g.x_name = "q";
    g.y_min = -0.1;
    g.y_max = 0.3;
    g.ny = 2;
    g.y_name = "a";
    ScanOptions options;
    options.method = ScanMethod::TraceHomogeneous;
    return scan_aq(g, {}, kOmega, MonodromyPolicy::defaults(kOmega), {}, options);
}

ScanResult small_exclusion_scan() {
    GridSpec g = GridSpec::exclusion_default();
    g.nx = 2;
    g.ny = 2;
    CslParams base;
    base.rc = 1e-7;
    base.radius = 1e-7;
    return scan_exclusion(-0.000526947, 0.0326158, kOmega, g, base,
                          MonodromyPolicy::defaults(kOmega), {});
}

std::string to_csv(const ScanResult& r, ScanKind kind) {
    std::ostringstream out;
    write_scan_csv(out, r, kind);
    return out.str();
}

ParsedScan parse_csv(const std::string& text) {
    std::istringstream in(text);
    return read_scan_csv(in);
}

std::string replace_first(std::string s, const std::string& from, const std::string& to) {
    const std::size_t pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    s.replace(pos, from.size(), to);
    return s;
}

std::string drop_line_containing(std::string s, const std::string& needle) {
    const std::size_t pos = s.find(needle);
    REQUIRE(pos != std::string::npos);
    const std::size_t start = s.rfind('\n', pos);
    const std::size_t line_start = start == std::string::npos ? 0 : start + 1;
    const std::size_t end = s.find('\n', pos);
    s.erase(line_start, end - line_start + 1);
    return s;
}

std::string drop_last_row(std::string s) {
    REQUIRE(!s.empty());
    REQUIRE(s.back() == '\n');
    const std::size_t prev = s.rfind('\n', s.size() - 2);
    REQUIRE(prev != std::string::npos);
    s.erase(prev + 1);
    return s;
}

std::size_t count_occurrences(const std::string& s, const std::string& needle) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = s.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

} // namespace

TEST_CASE("17-digit formatting round-trips exactly") {
    const double values[] = {0.0,
                             1.0 / 3.0,
                             -0.000526947,
                             0.0326158,
                             1e-300,
                             -1.2345678901234567e17,
                             5.6e-4,
                             std::numeric_limits<double>::denorm_min()};
    for (const double v : values) {
        const std::string s = fmt17(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(std::isnan(std::strtod(fmt17(std::numeric_limits<double>::quiet_NaN()).c_str(),
                                 nullptr)));
}

TEST_CASE("stability CSV round-trips losslessly") {
    const ScanResult r = small_stability_scan();
    const ParsedScan p = parse_csv(to_csv(r, ScanKind::Stability));

    CHECK(p.kind == ScanKind::Stability);
    CHECK(p.grid.x_name == "q");
    CHECK(p.grid.y_name == "a");
    CHECK(p.grid.x_min == r.grid.x_min);
    CHECK(p.grid.x_max == r.grid.x_max);
    CHECK(p.grid.y_min == r.grid.y_min);
    CHECK(p.grid.y_max == r.grid.y_max);
    CHECK(p.grid.nx == r.grid.nx);
    CHECK(p.grid.ny == r.grid.ny);
    CHECK(p.grid.x_scale == AxisScale::Linear);
    REQUIRE(p.rows.size() == r.grid.cells());

    for (int j = 0; j < r.grid.ny; ++j) {
        for (int i = 0; i < r.grid.nx; ++i) {
            const std::size_t idx = r.index(i, j);
            const ScanRow& row = p.rows[idx];
            CHECK(row.x == r.grid.x_center(i));
            CHECK(row.y == r.grid.y_center(j));
            CHECK(row.trace == r.traces[idx]);
            CHECK(row.positive == (r.verdicts[idx] == Classification::Stable));
            CHECK(row.error_flag == false);
        }
    }
    CHECK(p.provenance.at("method") == "trace");
    CHECK(p.provenance.count("version") == 1);
}

TEST_CASE("stability CSV always lists a before q regardless of axis order") {
    const ScanResult r = small_stability_scan();
    const std::string csv = to_csv(r, ScanKind::Stability);
    const std::size_t header_pos = csv.find("a,q,trace,verdict,flags\n");
    REQUIRE(header_pos != std::string::npos);
    const std::size_t row_start = header_pos + std::string("a,q,trace,verdict,flags\n").size();
    const std::size_t row_end = csv.find('\n', row_start);
    const std::string first_row = csv.substr(row_start, row_end - row_start);
    // Grid x axis is q, so the first written field must be the a value.
    const std::string expected_a = fmt17(r.grid.y_center(0));
    const std::string expected_q = fmt17(r.grid.x_center(0));
    CHECK(first_row.substr(0, expected_a.size()) == expected_a);
    CHECK(first_row.find("," + expected_q + ",") != std::string::npos);
}

TEST_CASE("exclusion CSV round-trips") {
    const ScanResult r = small_exclusion_scan();
    const std::string csv = to_csv(r, ScanKind::Exclusion);
    CHECK(csv.rfind("# trapstab exclusion-scan v1\n", 0) == 0);
    const ParsedScan p = parse_csv(csv);
    CHECK(p.kind == ScanKind::Exclusion);
    CHECK(p.grid.x_scale == AxisScale::Log10);
    CHECK(p.grid.y_scale == AxisScale::Log10);
    REQUIRE(p.rows.size() == 4);
    for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) {
            const std::size_t idx = r.index(i, j);
            CHECK(p.rows[idx].x == r.grid.x_center(i));
            CHECK(p.rows[idx].y == r.grid.y_center(j));
            CHECK(p.rows[idx].positive ==
                  (r.verdicts[idx] == Classification::Stable));
        }
    }
    CHECK(p.provenance.at("ref_q") == fmt17(0.0326158));
}

TEST_CASE("failed cells round-trip through the CSV flag column") {
    ScanResult r;
    r.grid.x_min = 0.0;
    r.grid.x_max = 1.0;
    r.grid.nx = 1;
    r.grid.x_name = "q";
    r.grid.y_min = 0.0;
    r.grid.y_max = 1.0;
    r.grid.ny = 1;
    r.grid.y_name = "a";
    r.verdicts = {Classification::Unstable};
    r.traces = {std::numeric_limits<double>::quiet_NaN()};
    r.flags = {kCellFlagIntegratorError};

    const ParsedScan p = parse_csv(to_csv(r, ScanKind::Stability));
    REQUIRE(p.rows.size() == 1);
    CHECK(p.rows[0].error_flag);
    CHECK_FALSE(p.rows[0].positive);
    CHECK(std::isnan(p.rows[0].trace));
}

TEST_CASE("malformed scan CSVs are rejected") {
    const std::string good = to_csv(small_stability_scan(), ScanKind::Stability);
    CHECK_NOTHROW(parse_csv(good));

    CHECK_THROWS_AS(parse_csv(""), ConfigError);
    CHECK_THROWS_AS(parse_csv("a,q\n0,0\n"), ConfigError);
    CHECK_THROWS_AS(
        parse_csv(replace_first(good, "stability-scan v1", "stability-scan v9")),
        ConfigError);
    CHECK_THROWS_AS(parse_csv(drop_line_containing(good, "# nx = ")), ConfigError);
    CHECK_THROWS_AS(parse_csv(drop_last_row(good)), ConfigError);
    CHECK_THROWS_AS(parse_csv(good + "0,0,0,stable,\n"), ConfigError);
    CHECK_THROWS_AS(parse_csv(replace_first(good, ",stable,", ",maybe,")), ConfigError);
    CHECK_THROWS_AS(parse_csv(replace_first(good, ",unstable,", ",unstable,oops")),
                    ConfigError);
    CHECK_THROWS_AS(parse_csv(replace_first(good, ",stable,", ",stable,,")), ConfigError);
    CHECK_THROWS_AS(parse_csv(replace_first(good, "# x_min = 0", "# x_min = zero")),
                    ConfigError);
    CHECK_THROWS_AS(parse_csv(replace_first(good, "# x_scale = linear",
                                            "# x_scale = sqrt")),
                    ConfigError);
    // Exclusion verdict words in a stability file are invalid.
    CHECK_THROWS_AS(parse_csv(replace_first(good, ",stable,", ",allowed,")), ConfigError);
}

TEST_CASE("CSV file writer reports unwritable paths") {
    const ScanResult r = small_stability_scan();
    CHECK_THROWS_AS(write_scan_csv("/nonexistent-dir-7f3a/out.csv", r,
                                   ScanKind::Stability),
                    ConfigError);
    CHECK_THROWS_AS(read_scan_csv("/nonexistent-dir-7f3a/in.csv"), ConfigError);

    const std::string path = "io_roundtrip_tmp.csv";
    write_scan_csv(path, r, ScanKind::Stability);
    const ParsedScan p = read_scan_csv(path);
    CHECK(p.rows.size() == r.grid.cells());
    std::remove(path.c_str());
}

TEST_CASE("svg render draws one rect per cell plus chrome") {
    const ScanResult r = small_stability_scan();
    SvgStyle style;
    const std::string svg = render_svg(r, ScanKind::Stability, style);

    CHECK(svg.rfind("<svg ", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count_occurrences(svg, "class=\"cell\"") == 4);
    CHECK(svg.find(style.stable_color) != std::string::npos);
    CHECK(svg.find(style.unstable_color) != std::string::npos);
    // Axis labels come from the grid names.
    CHECK(svg.find(">q</text>") != std::string::npos);
    CHECK(svg.find(">a</text>") != std::string::npos);
}

TEST_CASE("svg markers are drawn inside the data range and clipped outside") {
    const ScanResult r = small_stability_scan();
    SvgStyle style;
    style.markers.push_back({"P1", 0.6, 0.1});
    style.markers.push_back({"far", 2.5, 0.1});
    const std::string svg = render_svg(r, ScanKind::Stability, style);
    CHECK(count_occurrences(svg, "<circle") == 1);
    CHECK(svg.find(">P1</text>") != std::string::npos);
    CHECK(svg.find(">far</text>") == std::string::npos);
}

TEST_CASE("svg marker labels are xml-escaped") {
    const ScanResult r = small_stability_scan();
    SvgStyle style;
    style.markers.push_back({"a<b&c", 0.6, 0.1});
    const std::string svg = render_svg(r, ScanKind::Stability, style);
    CHECK(svg.find("a&lt;b&amp;c") != std::string::npos);
    CHECK(svg.find("a<b&c") == std::string::npos);
}

TEST_CASE("svg output is deterministic and round-trip consistent") {
    const ScanResult r = small_stability_scan();
    SvgStyle style;
    const std::string direct1 = render_svg(r, ScanKind::Stability, style);
    const std::string direct2 = render_svg(r, ScanKind::Stability, style);
    CHECK(direct1 == direct2);

    const ParsedScan p = parse_csv(to_csv(r, ScanKind::Stability));
    const std::string via_csv = render_svg(p, style);
    CHECK(direct1 == via_csv);
}

TEST_CASE("svg paints failed cells in the error color") {
    ParsedScan p;
    p.kind = ScanKind::Stability;
    p.grid.x_min = 0.0;
    p.grid.x_max = 1.0;
    p.grid.nx = 1;
    p.grid.x_name = "q";
    p.grid.y_min = 0.0;
    p.grid.y_max = 1.0;
    p.grid.ny = 1;
    p.grid.y_name = "a";
    ScanRow row;
    row.error_flag = true;
    p.rows.push_back(row);
    const std::string svg = render_svg(p, SvgStyle{});
    CHECK(svg.find("#c0392b") != std::string::npos);
}

TEST_CASE("svg style validation") {
    SvgStyle style;
    style.width = 0;
    CHECK_THROWS_AS(validate(style), std::invalid_argument);
    style = {};
    style.width = 100;
    style.height = 100;
    CHECK_THROWS_AS(validate(style), std::invalid_argument);
    style = {};
    style.stable_color.clear();
    CHECK_THROWS_AS(validate(style), std::invalid_argument);

    const ScanResult r = small_stability_scan();
    style = {};
    style.height = -3;
    CHECK_THROWS_AS(render_svg(r, ScanKind::Stability, style), std::invalid_argument);
}

TEST_CASE("svg render rejects a row count that disagrees with the grid") {
    ParsedScan p;
    p.grid.x_min = 0.0;
    p.grid.x_max = 1.0;
    p.grid.nx = 2;
    p.grid.x_name = "q";
    p.grid.y_min = 0.0;
    p.grid.y_max = 1.0;
    p.grid.ny = 2;
    p.grid.y_name = "a";
    p.rows.resize(3);
    CHECK_THROWS_AS(render_svg(p, SvgStyle{}), std::invalid_argument);
}

TEST_CASE("svg file writer reports unwritable paths") {
    CHECK_THROWS_AS(write_svg("/nonexistent-dir-7f3a/plot.svg", "<svg/>"), ConfigError);
    const std::string path = "io_svg_tmp.svg";
    write_svg(path, "<svg/>");
    std::ifstream in(path);
    std::string content;
    std::getline(in, content);
    CHECK(content == "<svg/>");
    in.close();
    std::remove(path.c_str());
}

TEST_CASE("key-value config accepts comments, spacing, and known keys") {
    const KeyValueConfig cfg = KeyValueConfig::parse(
        "# trap electrode settings\n"
        "\n"
        "trap.dc_voltage_V = 70\n"
        "trap.ac_amplitude_V=8000\n"
        "  mathieu.omega_rad_per_s =   1e8  \n"
        "scan.method = trace\n"
        "scan.na = 12\n",
        "inline");
    CHECK(cfg.has("trap.dc_voltage_V"));
    CHECK(cfg.get_double("trap.dc_voltage_V") == 70.0);
    CHECK(cfg.get_double("trap.ac_amplitude_V") == 8000.0);
    CHECK(cfg.get_double("mathieu.omega_rad_per_s") == 1e8);
    CHECK(cfg.get_string("scan.method") == std::string("trace"));
    CHECK(cfg.get_int("scan.na") == 12);
    CHECK_FALSE(cfg.has("mathieu.a"));
    CHECK_FALSE(cfg.get_double("mathieu.a").has_value());
}

TEST_CASE("key-value config rejects malformed input with line numbers") {
    CHECK_THROWS_WITH_AS(
        (void)KeyValueConfig::parse("mathieu.a = 0.1\nbogus line\n", "cfg"),
        doctest::Contains("cfg:2"), ConfigError);
    CHECK_THROWS_WITH_AS(
        (void)KeyValueConfig::parse("typo.key = 1\n", "cfg"),
        doctest::Contains("unrecognized key"), ConfigError);
    CHECK_THROWS_WITH_AS(
        (void)KeyValueConfig::parse("mathieu.a = 1\nmathieu.a = 2\n", "cfg"),
        doctest::Contains("duplicate key"), ConfigError);
    CHECK_THROWS_WITH_AS(
        (void)KeyValueConfig::parse("mathieu.a =\n", "cfg"),
        doctest::Contains("empty value"), ConfigError);
    CHECK_THROWS_WITH_AS(
        (void)KeyValueConfig::parse("= 3\n", "cfg"),
        doctest::Contains("empty key"), ConfigError);

    const KeyValueConfig cfg =
        KeyValueConfig::parse("scan.method = trace\nscan.na = 2.5\n", "cfg");
    CHECK_THROWS_AS((void)cfg.get_double("scan.method"), ConfigError);
    CHECK_THROWS_AS((void)cfg.get_int("scan.na"), ConfigError);
}

TEST_CASE("key-value config load reports missing files") {
    CHECK_THROWS_AS(KeyValueConfig::load("/nonexistent-dir-7f3a/cfg"), ConfigError);
}
