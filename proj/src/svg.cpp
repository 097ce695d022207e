#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mca/errors.hpp"
#include "mca/svg.hpp"

namespace mca::svg {

namespace {

constexpr double kW = 640.0;
constexpr double kH = 420.0;
constexpr double kMargin = 56.0;

const char *kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b"};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string xml_escape(const std::string &text)
{
    std::string out;
    out.reserve(text.size());
    for (const char c : text) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

std::ofstream open(const std::filesystem::path &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    return out;
}

// Diverging blue-white-red ramp; t in [-1, 1], 0 maps to #f7f7f7.
std::string diverging_color(double t)
{
    t = std::clamp(t, -1.0, 1.0);
    const int neutral[3] = {0xf7, 0xf7, 0xf7};
    int rgb[3];
    if (t >= 0.0) {
        const int hot[3] = {0xb2, 0x18, 0x2b};
        for (int c = 0; c < 3; c++) {
            rgb[c] = static_cast<int>(std::lround(
                neutral[c] + t * (hot[c] - neutral[c])));
        }
    } else {
        const int cold[3] = {0x21, 0x66, 0xac};
        for (int c = 0; c < 3; c++) {
            rgb[c] = static_cast<int>(std::lround(
                neutral[c] + (-t) * (cold[c] - neutral[c])));
        }
    }
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

} // namespace

void render_ccm_curves(const std::vector<double> &fractions,
                       const std::vector<CurveSeries> &curves,
                       const std::filesystem::path &out_path)
{
    if (fractions.empty() || curves.empty()) {
        throw DataError("render_ccm_curves: nothing to draw");
    }
    for (const auto &c : curves) {
        if (c.points.size() != fractions.size()) {
            throw DataError("render_ccm_curves: series '" + c.label +
                            "' has " + std::to_string(c.points.size()) +
                            " points for " + std::to_string(fractions.size()) +
                            " fractions");
        }
    }

    double lo = 1e300;
    double hi = -1e300;
    for (const auto &c : curves) {
        for (const auto &p : c.points) {
            lo = std::min(lo, p.p25);
            hi = std::max(hi, p.p75);
        }
    }
    if (hi <= lo) {
        hi = lo + 1.0;
    }
    const double pad = 0.08 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double f_lo = fractions.front();
    const double f_hi = fractions.back();
    const auto sx = [&](double f) {
        const double span = f_hi > f_lo ? f_hi - f_lo : 1.0;
        return kMargin + (f - f_lo) / span * (kW - 2.0 * kMargin);
    };
    const auto sy = [&](double v) {
        return kH - kMargin - (v - lo) / (hi - lo) * (kH - 2.0 * kMargin);
    };

    std::ofstream out = open(out_path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
        << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH
        << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // Axes.
    out << "<line class=\"axis\" x1=\"" << fmt(kMargin) << "\" y1=\""
        << fmt(kH - kMargin) << "\" x2=\"" << fmt(kW - kMargin) << "\" y2=\""
        << fmt(kH - kMargin) << "\" stroke=\"black\"/>\n";
    out << "<line class=\"axis\" x1=\"" << fmt(kMargin) << "\" y1=\""
        << fmt(kMargin) << "\" x2=\"" << fmt(kMargin) << "\" y2=\""
        << fmt(kH - kMargin) << "\" stroke=\"black\"/>\n";
    for (std::size_t i = 0; i < fractions.size(); i++) {
        out << "<text class=\"tick\" x=\"" << fmt(sx(fractions[i]))
            << "\" y=\"" << fmt(kH - kMargin + 18.0)
            << "\" font-size=\"11\" text-anchor=\"middle\">"
            << fmt(fractions[i]) << "</text>\n";
    }

    for (std::size_t ci = 0; ci < curves.size(); ci++) {
        const auto &c = curves[ci];
        const char *color = kSeriesColors[ci % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.6\" points=\"";
        for (std::size_t i = 0; i < fractions.size(); i++) {
            out << fmt(sx(fractions[i])) << ',' << fmt(sy(c.points[i].median))
                << ' ';
        }
        out << "\"/>\n";
        for (std::size_t i = 0; i < fractions.size(); i++) {
            const double x = sx(fractions[i]);
            const auto &p = c.points[i];
            out << "<line class=\"whisker\" x1=\"" << fmt(x) << "\" y1=\""
                << fmt(sy(p.median)) << "\" x2=\"" << fmt(x) << "\" y2=\""
                << fmt(sy(p.p25)) << "\" stroke=\"" << color << "\"/>\n";
            out << "<line class=\"whisker\" x1=\"" << fmt(x) << "\" y1=\""
                << fmt(sy(p.median)) << "\" x2=\"" << fmt(x) << "\" y2=\""
                << fmt(sy(p.p75)) << "\" stroke=\"" << color << "\"/>\n";
            out << "<circle cx=\"" << fmt(x) << "\" cy=\""
                << fmt(sy(p.median)) << "\" r=\"2.5\" fill=\"" << color
                << "\"/>\n";
        }
        out << "<text class=\"legend\" x=\"" << fmt(kW - kMargin)
            << "\" y=\"" << fmt(kMargin + 16.0 * static_cast<double>(ci))
            << "\" font-size=\"12\" text-anchor=\"end\" fill=\"" << color
            << "\">" << xml_escape(c.label) << "</text>\n";
    }

    // One asterisk per fraction whose direction test is significant
    // (identical for both directions, so curve 0 decides).
    for (std::size_t i = 0; i < fractions.size(); i++) {
        if (curves[0].points[i].significant) {
            out << "<text class=\"sig\" x=\"" << fmt(sx(fractions[i]))
                << "\" y=\"" << fmt(kMargin - 6.0)
                << "\" font-size=\"16\" text-anchor=\"middle\">*</text>\n";
        }
    }
    out << "</svg>\n";
}

void render_heatmap(const std::vector<double> &values, std::size_t rows,
                    std::size_t cols, const std::filesystem::path &out_path,
                    const std::string &title)
{
    if (rows == 0 || cols == 0 || values.size() != rows * cols) {
        throw DataError("render_heatmap: shape mismatch");
    }
    double amax = 0.0;
    for (const double v : values) {
        amax = std::max(amax, std::abs(v));
    }

    const double header = title.empty() ? 0.0 : 24.0;
    const double cell =
        std::clamp(560.0 / static_cast<double>(std::max(rows, cols)), 2.0,
                   28.0);
    const double w = cell * static_cast<double>(cols) + 16.0;
    const double h = cell * static_cast<double>(rows) + 16.0 + header;

    std::ofstream out = open(out_path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w)
        << "\" height=\"" << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << ' '
        << fmt(h) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty()) {
        out << "<text x=\"8\" y=\"16\" font-size=\"13\">" << xml_escape(title)
            << "</text>\n";
    }
    // Zero-centered scale: value 0 renders as the midpoint color #f7f7f7.
    for (std::size_t i = 0; i < rows; i++) {
        for (std::size_t j = 0; j < cols; j++) {
            const double v = values[i * cols + j];
            const double t = amax > 0.0 ? v / amax : 0.0;
            out << "<rect class=\"cell\" x=\""
                << fmt(8.0 + cell * static_cast<double>(j)) << "\" y=\""
                << fmt(8.0 + header + cell * static_cast<double>(i))
                << "\" width=\"" << fmt(cell) << "\" height=\"" << fmt(cell)
                << "\" fill=\"" << diverging_color(t) << "\"/>\n";
        }
    }
    out << "</svg>\n";
}

} // namespace mca::svg
