#include "bbm/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace bbm {

namespace {

std::string color_for(double u) {
    // dark blue -> magenta -> orange ramp on u in [0,1]
    u = std::clamp(u, 0.0, 1.0);
    const auto lerp = [](double a, double b, double s) { return a + (b - a) * s; };
    double r, g, b;
    if (u < 0.5) {
        const double s = u / 0.5;
        r = lerp(30, 170, s);
        g = lerp(40, 40, s);
        b = lerp(140, 160, s);
    } else {
        const double s = (u - 0.5) / 0.5;
        r = lerp(170, 245, s);
        g = lerp(40, 150, s);
        b = lerp(160, 40, s);
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "rgb(%d,%d,%d)", static_cast<int>(r), static_cast<int>(g),
                  static_cast<int>(b));
    return buf;
}

std::string fmt(double v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

std::string render_tree_svg(const ParticleTree& tree, int width, int height) {
    if (tree.d != 2) throw std::invalid_argument("render_tree_svg: requires a 2-d tree");
    if (tree.particles.empty()) throw std::invalid_argument("render_tree_svg: empty tree");

    double min_x = 0, max_x = 0, min_y = 0, max_y = 0, max_r = 1e-12;
    for (const auto& p : tree.particles) {
        for (std::size_t i = 0; i < p.seg_times.size(); ++i) {
            const double x = p.seg_values[2 * i], y = p.seg_values[2 * i + 1];
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
            max_r = std::max(max_r, std::hypot(x, y));
        }
    }
    const double pad = 10.0;
    const double panel_w = (width - 3.0 * pad) / 2.0;
    const double panel_h = height - 2.0 * pad;
    const double span_x = std::max(max_x - min_x, 1e-12);
    const double span_y = std::max(max_y - min_y, 1e-12);
    const double scale = std::min(panel_w / span_x, panel_h / span_y);
    auto sx = [&](double x) { return pad + (x - min_x) * scale; };
    auto sy = [&](double y) { return pad + (max_y - y) * scale; };
    const double t_span = std::max(tree.horizon, 1e-12);
    auto tx = [&](double t) { return 2.0 * pad + panel_w + (t / t_span) * panel_w; };
    auto ry = [&](double r) { return pad + (1.0 - r / max_r) * panel_h; };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
           " " + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // left panel: one polyline per particle
    for (const auto& p : tree.particles) {
        const double term_r = std::hypot(p.seg_values[2 * (p.seg_times.size() - 1)],
                                         p.seg_values[2 * (p.seg_times.size() - 1) + 1]);
        svg += "<polyline fill=\"none\" stroke=\"" + color_for(term_r / max_r) +
               "\" stroke-width=\"0.5\" points=\"";
        for (std::size_t i = 0; i < p.seg_times.size(); ++i) {
            if (i) svg += ' ';
            svg += fmt(sx(p.seg_values[2 * i])) + "," + fmt(sy(p.seg_values[2 * i + 1]));
        }
        svg += "\"/>\n";
    }

    // right panel: modulus vs time, drawn with path elements
    for (const auto& p : tree.particles) {
        svg += "<path fill=\"none\" stroke-width=\"0.5\" stroke=\"";
        const double term_r = std::hypot(p.seg_values[2 * (p.seg_times.size() - 1)],
                                         p.seg_values[2 * (p.seg_times.size() - 1) + 1]);
        svg += color_for(term_r / max_r) + "\" d=\"";
        for (std::size_t i = 0; i < p.seg_times.size(); ++i) {
            const double r = std::hypot(p.seg_values[2 * i], p.seg_values[2 * i + 1]);
            svg += (i ? "L" : "M") + fmt(tx(p.seg_times[i])) + " " + fmt(ry(r));
        }
        svg += "\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace bbm
