#include "mcpc/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace mcpc {

namespace {

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
constexpr int kMarginLeft = 58;
constexpr int kMarginRight = 16;
constexpr int kMarginTop = 28;
constexpr int kMarginBottom = 40;

std::string fmt(Real v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(Real v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
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
            case '"':
                out += "&quot;";
                break;
            default:
                out += c;
        }
    }
    return out;
}

struct Range {
    Real lo = std::numeric_limits<Real>::infinity();
    Real hi = -std::numeric_limits<Real>::infinity();

    void add(Real v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void settle() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
            const Real pad = std::max(1e-12, 0.5 * std::abs(hi));
            lo -= pad;
            hi += pad;
        }
    }
};

Real nice_step(Real span, int target_ticks) {
    const Real raw = span / target_ticks;
    const Real mag = std::pow(10.0, std::floor(std::log10(raw)));
    const Real norm = raw / mag;
    const Real nice = norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0;
    return nice * mag;
}

// Panel geometry in page coordinates.
struct Panel {
    Real x0, y0, w, h;
    Range xr, yr;

    [[nodiscard]] Real px(Real x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * w; }
    [[nodiscard]] Real py(Real y) const { return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h; }
};

void draw_axes(std::ostringstream& out, const Panel& p, const std::string& title,
               const std::string& xlabel, const std::string& ylabel) {
    out << "<rect x=\"" << fmt(p.x0) << "\" y=\"" << fmt(p.y0) << "\" width=\"" << fmt(p.w)
        << "\" height=\"" << fmt(p.h) << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    const Real xs = nice_step(p.xr.hi - p.xr.lo, 5);
    for (Real t = std::ceil(p.xr.lo / xs) * xs; t <= p.xr.hi + 1e-9 * xs; t += xs) {
        const Real x = p.px(t);
        out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(p.y0 + p.h) << "\" x2=\"" << fmt(x)
            << "\" y2=\"" << fmt(p.y0 + p.h + 4) << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(p.y0 + p.h + 15)
            << "\" font-size=\"10\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
    }
    const Real ys = nice_step(p.yr.hi - p.yr.lo, 5);
    for (Real t = std::ceil(p.yr.lo / ys) * ys; t <= p.yr.hi + 1e-9 * ys; t += ys) {
        const Real y = p.py(t);
        out << "<line x1=\"" << fmt(p.x0 - 4) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(p.x0)
            << "\" y2=\"" << fmt(y) << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << fmt(p.x0 - 6) << "\" y=\"" << fmt(y + 3)
            << "\" font-size=\"10\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
    }
    out << "<text x=\"" << fmt(p.x0 + p.w / 2) << "\" y=\"" << fmt(p.y0 - 10)
        << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(title) << "</text>\n";
    out << "<text x=\"" << fmt(p.x0 + p.w / 2) << "\" y=\"" << fmt(p.y0 + p.h + 32)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
    out << "<text x=\"" << fmt(p.x0 - 44) << "\" y=\"" << fmt(p.y0 + p.h / 2)
        << "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 " << fmt(p.x0 - 44)
        << " " << fmt(p.y0 + p.h / 2) << ")\">" << escape(ylabel) << "</text>\n";
}

void draw_legend(std::ostringstream& out, const Panel& p,
                 const std::vector<std::pair<std::string, std::string>>& entries) {
    Real y = p.y0 + 12;
    for (const auto& [label, colour] : entries) {
        const Real x = p.x0 + p.w - 70;
        out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(y - 3) << "\" x2=\"" << fmt(x + 14)
            << "\" y2=\"" << fmt(y - 3) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fmt(x + 18) << "\" y=\"" << fmt(y) << "\" font-size=\"10\">"
            << escape(label) << "</text>\n";
        y += 13;
    }
}

std::string series_title(const std::string& s) {
    if (s == "p") return "power (uW)";
    if (s == "x") return "allotted target";
    if (s == "sinr") return "SINR";
    if (s == "w") return "effective interference (uW)";
    throw InputError("plot: unknown series '" + s + "'");
}

std::string open_svg(Real width, Real height) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
        << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height)
        << "\" font-family=\"sans-serif\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return out.str();
}

}  // namespace

std::string render_trace_svg(const TraceData& trace, const PlotStyle& style) {
    if (trace.rows.empty()) {
        throw InputError("plot: trace has no data rows");
    }
    if (style.series.empty()) {
        throw InputError("plot: no series requested");
    }
    const std::size_t m = trace.pair_count;
    const std::size_t n = trace.channel_count;
    const Real cell_w = style.panel_width;
    const Real cell_h = style.panel_height;
    const Real width = static_cast<Real>(n) * cell_w;
    const Real height = static_cast<Real>(style.series.size()) * cell_h;
    const std::size_t t_col = trace.column("time");
    const std::size_t stride =
        std::max<std::size_t>(1, (trace.rows.size() + style.max_points_per_line - 1) /
                                     std::max<std::size_t>(1, style.max_points_per_line));

    std::ostringstream out;
    out << open_svg(width, height);
    for (std::size_t row = 0; row < style.series.size(); ++row) {
        const std::string& s = style.series[row];
        const std::string title = series_title(s);
        for (std::size_t k = 0; k < n; ++k) {
            Panel p{static_cast<Real>(k) * cell_w + kMarginLeft,
                    static_cast<Real>(row) * cell_h + kMarginTop,
                    cell_w - kMarginLeft - kMarginRight,
                    cell_h - kMarginTop - kMarginBottom,
                    {},
                    {}};
            std::vector<std::size_t> cols;
            for (std::size_t i = 0; i < m; ++i) {
                cols.push_back(
                    trace.column(s + "_" + std::to_string(i + 1) + "_" + std::to_string(k + 1)));
            }
            for (const auto& r : trace.rows) {
                p.xr.add(r[t_col]);
                for (std::size_t c : cols) {
                    p.yr.add(r[c]);
                }
            }
            p.xr.settle();
            p.yr.settle();
            draw_axes(out, p, title + ", channel " + std::to_string(k + 1), "time (s)", title);
            std::vector<std::pair<std::string, std::string>> legend;
            for (std::size_t i = 0; i < m; ++i) {
                const char* colour = kPalette[i % kPalette.size()];
                out << "<polyline fill=\"none\" stroke=\"" << colour
                    << "\" stroke-width=\"1.5\" points=\"";
                for (std::size_t a = 0; a < trace.rows.size(); a += stride) {
                    const auto& r = trace.rows[a];
                    out << fmt(p.px(r[t_col])) << "," << fmt(p.py(r[cols[i]])) << " ";
                }
                const auto& last = trace.rows.back();
                out << fmt(p.px(last[t_col])) << "," << fmt(p.py(last[cols[i]])) << "\"/>\n";
                legend.emplace_back("pair " + std::to_string(i + 1), colour);
            }
            draw_legend(out, p, legend);
        }
    }
    out << "</svg>\n";
    return out.str();
}

std::string render_region_svg(const RegionResult& region, const std::vector<Vector>& targets,
                              const std::vector<RegionClass>& classes, const PlotStyle& style) {
    if (region.samples.empty() || region.pair_count() != 2) {
        throw InputError("plot: region plots need a non-empty two-pair region");
    }
    const Real side = std::max(style.panel_width, style.panel_height) + 120.0;
    Panel p{kMarginLeft, kMarginTop, side - kMarginLeft - kMarginRight,
            side - kMarginTop - kMarginBottom, {}, {}};
    for (const RegionSample& s : region.samples) {
        p.xr.add(s.point(0));
        p.yr.add(s.point(1));
    }
    for (const Vector& t : targets) {
        p.xr.add(t(0));
        p.yr.add(t(1));
    }
    p.xr.lo = std::min(p.xr.lo, 0.0);
    p.yr.lo = std::min(p.yr.lo, 0.0);
    p.xr.settle();
    p.yr.settle();

    const std::string unit = region.metric == Metric::sinr ? "SINR" : "rate (bits/s/Hz)";
    std::ostringstream out;
    out << open_svg(side, side);
    draw_axes(out, p, "achievable " + unit + ", channel " + std::to_string(region.channel + 1),
              "pair 1 " + unit, "pair 2 " + unit);

    const std::size_t stride =
        std::max<std::size_t>(1, region.samples.size() / std::max<std::size_t>(1, style.max_cloud_points));
    out << "<g fill=\"#9ecae1\" fill-opacity=\"0.6\">\n";
    for (std::size_t a = 0; a < region.samples.size(); a += stride) {
        const Vector& pt = region.samples[a].point;
        out << "<circle cx=\"" << fmt(p.px(pt(0))) << "\" cy=\"" << fmt(p.py(pt(1)))
            << "\" r=\"1.2\"/>\n";
    }
    out << "</g>\n";
    if (!region.hull.empty()) {
        out << "<polygon fill=\"none\" stroke=\"#08306b\" stroke-width=\"1.5\" points=\"";
        for (const Point2& h : region.hull) {
            out << fmt(p.px(h.x)) << "," << fmt(p.py(h.y)) << " ";
        }
        out << "\"/>\n";
    }
    for (std::size_t a = 0; a < targets.size(); ++a) {
        const RegionClass cls = a < classes.size() ? classes[a] : RegionClass::M_out;
        const char* colour = cls == RegionClass::K   ? "#2ca02c"
                             : cls == RegionClass::L ? "#ff7f0e"
                                                     : "#d62728";
        const Real x = p.px(targets[a](0));
        const Real y = p.py(targets[a](1));
        out << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"4\" fill=\"" << colour
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(x + 6) << "\" y=\"" << fmt(y - 6) << "\" font-size=\"10\">"
            << to_string(cls) << "</text>\n";
    }
    draw_legend(out, p,
                {{"samples", "#9ecae1"},
                 {"hull", "#08306b"},
                 {"K target", "#2ca02c"},
                 {"L target", "#ff7f0e"},
                 {"M target", "#d62728"}});
    out << "</svg>\n";
    return out.str();
}

}  // namespace mcpc
