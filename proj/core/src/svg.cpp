#include "eadkit/svg.hpp"

#include "eadkit/format.hpp"

#include <algorithm>
#include <limits>

namespace eadkit {

namespace {

constexpr double kMillimetresPerMetre = 1000.0;
constexpr double kMarginMm = 1.0;
constexpr int kDecimals = 4;

std::string mm(double metres) { return format_fixed(metres * kMillimetresPerMetre, kDecimals); }

std::string path_data(const Polyline& line) {
    std::string d;
    for (std::size_t i = 0; i < line.size(); ++i) {
        d += i == 0 ? "M " : " L ";
        d += mm(line[i].x) + " " + mm(-line[i].y);
    }
    d += " Z";
    return d;
}

void emit_group(std::string& out, const char* id, const char* stroke, const std::vector<Polyline>& lines) {
    out += std::string("  <g id=\"") + id + "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"0.02\">\n";
    for (const Polyline& line : lines) {
        if (line.empty()) {
            continue;
        }
        out += "    <path d=\"" + path_data(line) + "\"/>\n";
    }
    out += "  </g>\n";
}

}  // namespace

std::string outline_to_svg(const ElectrodeOutline& outline) {
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = min_x;
    double max_x = -min_x;
    double max_y = -min_x;
    auto extend = [&](const std::vector<Polyline>& lines) {
        for (const Polyline& line : lines) {
            for (const Point2& p : line) {
                min_x = std::min(min_x, p.x);
                max_x = std::max(max_x, p.x);
                // SVG y grows downward.
                min_y = std::min(min_y, -p.y);
                max_y = std::max(max_y, -p.y);
            }
        }
    };
    extend(outline.emitter);
    extend(outline.collector);
    if (!(min_x <= max_x)) {
        min_x = min_y = max_x = max_y = 0.0;
    }
    const double margin = kMarginMm / kMillimetresPerMetre;
    const double x0 = min_x - margin;
    const double y0 = min_y - margin;
    const double w = max_x - min_x + 2.0 * margin;
    const double h = max_y - min_y + 2.0 * margin;

    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + mm(w) + "mm\" height=\"" + mm(h) +
           "mm\" viewBox=\"" + mm(x0) + " " + mm(y0) + " " + mm(w) + " " + mm(h) + "\">\n";
    emit_group(out, "emitter", "#c03000", outline.emitter);
    emit_group(out, "collector", "#0040a0", outline.collector);
    out += "</svg>\n";
    return out;
}

}  // namespace eadkit
