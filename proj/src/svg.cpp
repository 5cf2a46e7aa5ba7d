#include "tabgbm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace tabgbm {

namespace {

std::string fmt(double v, const char* spec = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string svg_open(double width, double height) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(width)
       << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << ' '
       << fmt(height) << "\">\n";
    return os.str();
}

std::string text(double x, double y, const std::string& s, const char* anchor = "start",
                 int size = 12) {
    std::ostringstream os;
    os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-family=\"sans-serif\""
       << " font-size=\"" << size << "\" text-anchor=\"" << anchor << "\">" << escape(s)
       << "</text>\n";
    return os.str();
}

std::string rect(double x, double y, double w, double h, const char* fill) {
    std::ostringstream os;
    os << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
       << "\" height=\"" << fmt(h) << "\" fill=\"" << fill << "\"/>\n";
    return os.str();
}

std::string line(double x1, double y1, double x2, double y2, const char* stroke = "#333") {
    std::ostringstream os;
    os << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
       << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\"1\"/>\n";
    return os.str();
}

}  // namespace

std::string render_importance_svg(const ImportanceReport& report) {
    const double label_w = 220, bar_area = 380, row_h = 24;
    const double margin = 16, header = 28;
    const double width = label_w + bar_area + 120;
    const double height = header + row_h * static_cast<double>(report.ranking.size()) + margin;

    double max_val = 0;
    for (double v : report.mean_abs) max_val = std::max(max_val, v);

    std::string svg = svg_open(width, height);
    svg += text(margin, 18, "Feature importance (mean |phi|)", "start", 14);
    double y = header;
    for (std::size_t j : report.ranking) {
        const double frac = max_val > 0 ? report.mean_abs[j] / max_val : 0.0;
        svg += text(label_w - 8, y + row_h * 0.65, report.feature_names[j], "end");
        svg += rect(label_w, y + 4, bar_area * frac, row_h - 8, "#4878a8");
        svg += text(label_w + bar_area * frac + 6, y + row_h * 0.65, fmt(report.mean_abs[j], "%.4g"));
        y += row_h;
    }
    svg += "</svg>\n";
    return svg;
}

namespace {

struct PlotFrame {
    double x0, y0, x1, y1;  // drawable area, y grows downward
    double xmin, xmax, ymin, ymax;

    double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * (x1 - x0); }
    double py(double y) const { return y1 - (y - ymin) / (ymax - ymin) * (y1 - y0); }
};

std::string axes(const PlotFrame& f, const std::string& x_label, const std::string& y_label) {
    std::string out;
    out += line(f.x0, f.y1, f.x1, f.y1);
    out += line(f.x0, f.y0, f.x0, f.y1);
    out += text(f.x0, f.y1 + 16, fmt(f.xmin, "%.4g"));
    out += text(f.x1, f.y1 + 16, fmt(f.xmax, "%.4g"), "end");
    out += text(f.x0 - 6, f.y1, fmt(f.ymin, "%.4g"), "end");
    out += text(f.x0 - 6, f.y0 + 10, fmt(f.ymax, "%.4g"), "end");
    out += text((f.x0 + f.x1) / 2, f.y1 + 34, x_label, "middle");
    // y-axis label drawn horizontally above the axis
    out += text(f.x0 - 6, f.y0 - 8, y_label, "start");
    return out;
}

}  // namespace

std::string render_ale_svg(const AleCurve& curve, const std::string& response_name) {
    const double width = 640, height = 420;
    PlotFrame f{70, 40, width - 24, height - 60, 0, 0, 0, 0};
    f.xmin = curve.edges.front();
    f.xmax = curve.edges.back();
    const auto [lo, hi] = std::minmax_element(curve.centered.begin(), curve.centered.end());
    f.ymin = *lo;
    f.ymax = *hi;
    if (f.ymin == f.ymax) {  // flat curve still gets a visible band
        f.ymin -= 1.0;
        f.ymax += 1.0;
    }

    std::string svg = svg_open(width, height);
    svg += axes(f, curve.feature_name, "ALE of " + response_name);
    if (f.ymin < 0 && f.ymax > 0)
        svg += line(f.x0, f.py(0.0), f.x1, f.py(0.0), "#bbb");

    std::ostringstream pts;
    for (std::size_t e = 0; e < curve.edges.size(); ++e) {
        if (e) pts << ' ';
        pts << fmt(f.px(curve.edges[e])) << ',' << fmt(f.py(curve.centered[e]));
    }
    svg += "<polyline points=\"" + pts.str() +
           "\" fill=\"none\" stroke=\"#4878a8\" stroke-width=\"2\"/>\n";
    svg += "</svg>\n";
    return svg;
}

std::string render_ale_svg(const BinaryAleEffect& effect, const std::string& response_name) {
    const double width = 360, height = 420;
    PlotFrame f{70, 40, width - 24, height - 60, 0, 0, 0, 0};
    f.xmin = 0;
    f.xmax = 1;
    f.ymin = std::min({0.0, effect.value_at_0, effect.value_at_1});
    f.ymax = std::max({0.0, effect.value_at_0, effect.value_at_1});
    if (f.ymin == f.ymax) f.ymax = f.ymin + 1.0;

    std::string svg = svg_open(width, height);
    svg += axes(f, effect.feature_name, "ALE of " + response_name);

    const double bar_w = (f.x1 - f.x0) * 0.28;
    auto bar = [&](double center_x, double value) {
        const double top = f.py(std::max(0.0, value));
        const double bottom = f.py(std::min(0.0, value));
        return rect(center_x - bar_w / 2, top, bar_w, std::max(1.0, bottom - top), "#4878a8");
    };
    svg += bar(f.px(0.25), effect.value_at_0);
    svg += bar(f.px(0.75), effect.value_at_1);
    svg += text(f.px(0.25), f.y1 + 16, "0", "middle");
    svg += text(f.px(0.75), f.y1 + 16, "1", "middle");
    svg += "</svg>\n";
    return svg;
}

}  // namespace tabgbm
