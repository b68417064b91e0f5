#include "quantsig/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace quantsig::svg {

std::string escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

namespace {

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

std::string num(double v) {
    const auto s = fmt::format("{:.2f}", v);
    return s == "-0.00" ? "0.00" : s;
}

// Round-number tick step giving roughly `target` intervals.
double nice_step(double span, int target) {
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (raw <= m * mag) return m * mag;
    }
    return 10.0 * mag;
}

std::string tick_text(double v, double step) {
    if (step >= 1.0) return fmt::format("{:.0f}", v);
    const int digits = std::clamp(static_cast<int>(std::ceil(-std::log10(step))), 1, 6);
    return fmt::format("{:.{}f}", v, digits);
}

}  // namespace

std::string line_chart(const ChartSpec& spec, const std::vector<LineSeries>& series) {
    const double left = 80, right = 200, top = 50, bottom = 60;
    const double pw = spec.width - left - right;
    const double ph = spec.height - top - bottom;

    Range xr, yr;
    for (const auto& s : series) {
        for (double v : s.x) xr.add(v);
        for (double v : s.y) yr.add(v);
    }
    if (spec.show_diagonal) {
        xr.add(0.0);
        xr.add(1.0);
        yr.add(0.0);
        yr.add(1.0);
    }
    xr.finish();
    yr.finish();
    auto px = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double v) { return top + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::string out;
    out += fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n",
        spec.width, spec.height, spec.width, spec.height);
    out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", spec.width,
                       spec.height);
    out += fmt::format("<text x=\"{}\" y=\"25\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
                       num(left + pw / 2), escape(spec.title));

    // Axes and ticks.
    out += fmt::format("<g stroke=\"black\" stroke-width=\"1\">\n"
                       "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\"/>\n"
                       "<line x1=\"{0}\" y1=\"{3}\" x2=\"{0}\" y2=\"{1}\"/>\n</g>\n",
                       num(left), num(top + ph), num(left + pw), num(top));
    const double ystep = nice_step(yr.hi - yr.lo, 6);
    for (double v = std::ceil(yr.lo / ystep) * ystep; v <= yr.hi + 1e-9 * ystep; v += ystep) {
        out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#dddddd\"/>\n", num(left),
                           num(py(v)), num(left + pw));
        out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", num(left - 6),
                           num(py(v) + 4), tick_text(v, ystep));
    }
    if (!spec.x_tick_labels.empty()) {
        const std::size_t n = spec.x_tick_labels.size();
        const std::size_t every = std::max<std::size_t>(1, (n + 5) / 6);
        for (std::size_t i = 0; i < n; i += every) {
            const double x = px(static_cast<double>(i));
            out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(x),
                               num(top + ph + 18), escape(spec.x_tick_labels[i]));
        }
    } else {
        const double xstep = nice_step(xr.hi - xr.lo, 6);
        for (double v = std::ceil(xr.lo / xstep) * xstep; v <= xr.hi + 1e-9 * xstep; v += xstep) {
            out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(px(v)),
                               num(top + ph + 18), tick_text(v, xstep));
        }
    }
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(left + pw / 2),
                       num(spec.height - 15.0), escape(spec.x_label));
    out += fmt::format("<text x=\"20\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0})\">{1}</text>\n",
                       num(top + ph / 2), escape(spec.y_label));

    if (spec.show_diagonal) {
        out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999999\" "
                           "stroke-dasharray=\"2,4\"/>\n",
                           num(px(0)), num(py(0)), num(px(1)), num(py(1)));
    }

    for (const auto& s : series) {
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{} points=\"",
                           escape(s.color), s.dashed ? " stroke-dasharray=\"6,4\"" : "");
        const std::size_t n = std::min(s.x.size(), s.y.size());
        bool first = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (!first) out += ' ';
            out += num(px(s.x[i])) + "," + num(py(s.y[i]));
            first = false;
        }
        out += "\"/>\n";
    }

    // Legend.
    double ly = top + 10;
    for (const auto& s : series) {
        const double lx = left + pw + 20;
        out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"{}/>\n",
                           num(lx), num(ly), num(lx + 30), num(ly), escape(s.color),
                           s.dashed ? " stroke-dasharray=\"6,4\"" : "");
        out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(lx + 36), num(ly + 4), escape(s.name));
        ly += 20;
    }
    out += "</svg>\n";
    return out;
}

}  // namespace quantsig::svg
