#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsi/geometry.hpp"

namespace tsi {

// Binary per-pixel map, row-major.
struct MaskGrid {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> cells; // 0 or 1

    MaskGrid() = default;
    MaskGrid(int h, int w) : height(h), width(w), cells(static_cast<std::size_t>(h) * w, 0) {}
    std::uint8_t& at(int x, int y) { return cells[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
    std::size_t count() const;
    bool operator==(const MaskGrid&) const = default;
};

// Real-valued map in [0,1], row-major; stands in for a predicted score map.
struct ProbGrid {
    int height = 0;
    int width = 0;
    std::vector<double> cells;

    ProbGrid() = default;
    ProbGrid(int h, int w, double fill = 0.0)
        : height(h), width(w), cells(static_cast<std::size_t>(h) * w, fill) {}
    double& at(int x, int y) { return cells[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
};

// Cell is set iff its center lies inside the polygon (even-odd rule, boundary
// ties count as inside). The polygon is clipped to the grid implicitly.
MaskGrid rasterize(const Polygon& poly, int height, int width);

// Cell set iff value >= threshold; threshold must lie in (0,1).
MaskGrid binarize(const ProbGrid& grid, double threshold);

// 2|A∩B| / (|A|+|B|); 1.0 when both masks are empty. Dimension mismatch throws.
double dice_coefficient(const MaskGrid& a, const MaskGrid& b);

// 8-connected components traced to their outer contour polygons (pixel-corner
// coordinates). Components with fewer than min_area cells are discarded.
// Holes are not traced; re-rasterizing a traced contour fills them.
std::vector<Polygon> extract_components(const MaskGrid& mask, int min_area = 4);

// P5 PGM with maxval 1, for visual inspection.
void write_pgm(const MaskGrid& mask, const std::string& path);

// Polygon list as a JSON array of [x,y] arrays.
std::string polygons_to_json(const std::vector<Polygon>& polys);

} // namespace tsi
