#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "qas/harness.h"

namespace qas {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 30.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    double x0, x1, y0, y1;

    double px(double x) const {
        return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight);
    }
    double py(double y) const {
        return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
    }
};

std::string fmt(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v;
    return s.str();
}

std::string tick_label(double v) {
    std::ostringstream s;
    s << std::setprecision(3) << v;
    return s.str();
}

}  // namespace

std::vector<double> moving_average(const std::vector<double>& values,
                                   int window) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    std::vector<double> out(values.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum += values[i];
        if (i >= std::size_t(window)) sum -= values[i - window];
        out[i] = sum / double(std::min<std::size_t>(i + 1, window));
    }
    return out;
}

std::string render_plot_svg(const std::vector<SummaryRow>& summary,
                            const std::string& title) {
    if (summary.size() < 2) {
        throw std::invalid_argument("plot needs at least two episodes");
    }
    Frame f{double(summary.front().episode), double(summary.back().episode), 0, 0};
    if (f.x1 <= f.x0) f.x1 = f.x0 + 1.0;
    double lo = summary.front().mean_return - summary.front().std_return;
    double hi = summary.front().mean_return + summary.front().std_return;
    for (const auto& r : summary) {
        lo = std::min(lo, r.mean_return - r.std_return);
        hi = std::max(hi, r.mean_return + r.std_return);
    }
    if (hi - lo < 1e-9) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    f.y0 = lo - pad;
    f.y1 = hi + pad;

    std::vector<double> means;
    means.reserve(summary.size());
    for (const auto& r : summary) means.push_back(r.mean_return);
    const auto smooth = moving_average(means, kMovingAverageWindow);

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
        << kHeight << "\">\n"
        << "  <rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" fill=\"white\"/>\n";
    if (!title.empty()) {
        svg << "  <text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"16\">" << xml_escape(title)
            << "</text>\n";
    }

    // Axes and ticks.
    const double ax_x0 = kLeft;
    const double ax_x1 = kWidth - kRight;
    const double ax_y0 = kHeight - kBottom;
    const double ax_y1 = kTop;
    svg << "  <g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n"
        << "    <line x1=\"" << ax_x0 << "\" y1=\"" << ax_y0 << "\" x2=\"" << ax_x1
        << "\" y2=\"" << ax_y0 << "\"/>\n"
        << "    <line x1=\"" << ax_x0 << "\" y1=\"" << ax_y0 << "\" x2=\"" << ax_x0
        << "\" y2=\"" << ax_y1 << "\"/>\n"
        << "  </g>\n";
    svg << "  <g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
        const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
        svg << "    <text x=\"" << fmt(f.px(xv)) << "\" y=\"" << ax_y0 + 18
            << "\" text-anchor=\"middle\">" << tick_label(std::round(xv))
            << "</text>\n"
            << "    <text x=\"" << ax_x0 - 8 << "\" y=\"" << fmt(f.py(yv) + 4)
            << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
    }
    svg << "  </g>\n";
    svg << "  <text x=\"" << (ax_x0 + ax_x1) / 2 << "\" y=\"" << kHeight - 25
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\">Episode</text>\n"
        << "  <text x=\"20\" y=\"" << (ax_y0 + ax_y1) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 20 "
        << (ax_y0 + ax_y1) / 2 << ")\">Return (mean over seeds)</text>\n";

    // +-1 std band: upper edge forward, lower edge back.
    svg << "  <path class=\"std-band\" fill=\"#1f77b4\" fill-opacity=\"0.25\" "
           "stroke=\"none\" d=\"";
    for (std::size_t i = 0; i < summary.size(); ++i) {
        const auto& r = summary[i];
        svg << (i == 0 ? 'M' : 'L') << fmt(f.px(r.episode)) << ','
            << fmt(f.py(r.mean_return + r.std_return)) << ' ';
    }
    for (std::size_t i = summary.size(); i-- > 0;) {
        const auto& r = summary[i];
        svg << 'L' << fmt(f.px(r.episode)) << ','
            << fmt(f.py(r.mean_return - r.std_return)) << ' ';
    }
    svg << "Z\"/>\n";

    svg << "  <polyline class=\"mean\" fill=\"none\" stroke=\"#1f77b4\" "
           "stroke-width=\"0.8\" points=\"";
    for (const auto& r : summary) {
        svg << fmt(f.px(r.episode)) << ',' << fmt(f.py(r.mean_return)) << ' ';
    }
    svg << "\"/>\n";

    svg << "  <polyline class=\"moving-average\" fill=\"none\" stroke=\"#d62728\" "
           "stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < summary.size(); ++i) {
        svg << fmt(f.px(summary[i].episode)) << ',' << fmt(f.py(smooth[i])) << ' ';
    }
    svg << "\"/>\n";

    svg << "  <g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n"
        << "    <text x=\"" << ax_x1 - 4 << "\" y=\"" << kTop + 12
        << "\" text-anchor=\"end\" fill=\"#1f77b4\">mean return, band = "
           "+-1 std across seeds</text>\n"
        << "    <text x=\"" << ax_x1 - 4 << "\" y=\"" << kTop + 26
        << "\" text-anchor=\"end\" fill=\"#d62728\">moving average ("
        << kMovingAverageWindow << " episodes)</text>\n"
        << "  </g>\n";
    svg << "</svg>\n";
    return svg.str();
}

void emit_plot(const std::vector<SummaryRow>& summary,
               const std::filesystem::path& svg_path, const std::string& title) {
    if (summary.empty()) throw std::invalid_argument("empty summary");
    const std::string svg = render_plot_svg(summary, title);
    std::ofstream out(svg_path);
    if (!out) throw std::runtime_error("cannot write " + svg_path.string());
    out << svg;
}

}  // namespace qas
