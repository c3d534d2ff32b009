#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "olga/error.hpp"
#include "olga/train.hpp"

namespace olga {

// Minimal hand-rolled SVG output: scatter plots of 2-D embeddings with the
// decision circle, and simple line charts. Deterministic text output so
// artifacts can be byte-compared.
namespace svg {

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

struct Mapper {
    double x_min, x_max, y_min, y_max;
    double width, height, margin;

    double x(double v) const {
        return margin + (v - x_min) / (x_max - x_min) * (width - 2 * margin);
    }
    // SVG y axis points down
    double y(double v) const {
        return height - margin - (v - y_min) / (y_max - y_min) * (height - 2 * margin);
    }
    double scale_x(double len) const { return len / (x_max - x_min) * (width - 2 * margin); }
};

}  // namespace svg

// One training-stage scatter: interest nodes blue, non-interest green, and
// the hypersphere boundary drawn in data coordinates. Embeddings come from a
// tanh layer, so the viewport is fixed to [-1.1, 1.1]^2.
inline void write_embedding_svg(const std::vector<SnapshotRow>& rows,
                                const HypersphereConfig& sphere, std::size_t epoch,
                                const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write SVG: " + path);

    const svg::Mapper m{-1.1, 1.1, -1.1, 1.1, 480.0, 480.0, 20.0};
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" "
           "viewBox=\"0 0 480 480\">\n";
    out << "  <rect width=\"480\" height=\"480\" fill=\"white\"/>\n";
    out << "  <text x=\"24\" y=\"16\" font-family=\"sans-serif\" font-size=\"12\">epoch "
        << epoch << "</text>\n";

    const double cx = sphere.center.size() > 0 ? sphere.center[0] : 0.0;
    const double cy = sphere.center.size() > 1 ? sphere.center[1] : 0.0;
    out << "  <circle cx=\"" << svg::num(m.x(cx)) << "\" cy=\"" << svg::num(m.y(cy))
        << "\" r=\"" << svg::num(m.scale_x(sphere.radius))
        << "\" fill=\"none\" stroke=\"#444444\" stroke-dasharray=\"4 3\"/>\n";

    for (const SnapshotRow& row : rows) {
        if (row.epoch != epoch || row.coords.size() < 2) continue;
        const char* color = row.label == Label::Interest ? "#1f77b4" : "#2ca02c";
        out << "  <circle cx=\"" << svg::num(m.x(row.coords[0])) << "\" cy=\""
            << svg::num(m.y(row.coords[1])) << "\" r=\"2.5\" fill=\"" << color
            << "\" fill-opacity=\"0.8\"/>\n";
    }
    out << "</svg>\n";
}

// Volume-vs-dimension curves, one polyline per radius.
inline void write_volume_svg(const std::vector<double>& radii, std::size_t n_max,
                             const std::vector<std::vector<double>>& volumes,
                             const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write SVG: " + path);

    double v_max = 0.0;
    for (const auto& curve : volumes)
        for (double v : curve) v_max = std::max(v_max, v);
    if (v_max <= 0.0) v_max = 1.0;

    const svg::Mapper m{1.0, static_cast<double>(n_max), 0.0, v_max, 640.0, 400.0, 40.0};
    static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                              "#d62728", "#9467bd", "#8c564b"};

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
           "viewBox=\"0 0 640 400\">\n";
    out << "  <rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
    out << "  <line x1=\"40\" y1=\"360\" x2=\"600\" y2=\"360\" stroke=\"#000\"/>\n";
    out << "  <line x1=\"40\" y1=\"40\" x2=\"40\" y2=\"360\" stroke=\"#000\"/>\n";
    for (std::size_t r = 0; r < radii.size(); ++r) {
        out << "  <polyline fill=\"none\" stroke=\"" << palette[r % 6] << "\" points=\"";
        for (std::size_t n = 1; n <= n_max; ++n) {
            out << svg::num(m.x(static_cast<double>(n))) << ','
                << svg::num(m.y(volumes[r][n - 1]));
            if (n != n_max) out << ' ';
        }
        out << "\"/>\n";
        out << "  <text x=\"550\" y=\"" << svg::num(60.0 + 16.0 * static_cast<double>(r))
            << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << palette[r % 6]
            << "\">r=" << svg::num(radii[r]) << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace olga
