#pragma once

#include <array>
#include <string>
#include <vector>

namespace tsi {

struct Point2D {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2D&) const = default;
};

// Vertex list of a closed polygon. Image coordinates (y grows downward);
// "positive" orientation means positive shoelace area, which is the visually
// clockwise winding in that frame.
using Polygon = std::vector<Point2D>;

// Four-corner sign location, clockwise on screen starting at the top-left-ish
// corner. Must be simple with positive area.
struct QuadBox {
    std::array<Point2D, 4> corners{};
    bool operator==(const QuadBox&) const = default;

    Polygon polygon() const { return {corners[0], corners[1], corners[2], corners[3]}; }
    static QuadBox rect(double x0, double y0, double x1, double y1) {
        return QuadBox{{Point2D{x0, y0}, Point2D{x1, y0}, Point2D{x1, y1}, Point2D{x0, y1}}};
    }
};

// Densely sampled closed boundary of a sign box or mask contour.
struct DenseContour {
    std::vector<Point2D> points;
};

double signed_area(const Polygon& poly);
double polygon_area(const Polygon& poly);
Point2D polygon_centroid(const Polygon& poly);
Point2D box_center(const QuadBox& box);
bool is_convex(const Polygon& poly);
// Simple = no two non-adjacent edges intersect.
bool is_simple_quad(const QuadBox& box);
// Even-odd rule; points on the boundary count as inside.
bool point_in_polygon(const Polygon& poly, Point2D p);
double point_segment_distance(Point2D p, Point2D a, Point2D b);
// Minimum distance from p to the polygon boundary (exact, per-segment).
double boundary_distance(const Polygon& poly, Point2D p);
// Makes the winding positive (reverses if needed).
Polygon oriented_positive(const Polygon& poly);
// Sutherland-Hodgman; `clip` must be convex.
Polygon clip_polygon(const Polygon& subject, const Polygon& clip);

// n >= 16 points uniformly spaced by arc length along the box perimeter,
// starting at corner 0. The single-argument form picks
// n = max(64, perimeter / 2), keeping consecutive points at most 2 px apart;
// the sampled minimum then sits within ~1e-3 * perimeter / n of the true one.
DenseContour sample_dense_contour(const QuadBox& box, int n);
DenseContour sample_dense_contour(const QuadBox& box);

// Area centroid of the region enclosed by the contour / box.
Point2D centroid(const DenseContour& contour);

// Shrink offset d_s = 1/2 * min distance from the centroid to the boundary.
// The contour form takes the minimum over the sampled points; the box form
// evaluates the dense-sampling limit exactly (per-segment distance).
double shrink_offset(const DenseContour& contour);
double shrink_offset(const QuadBox& box);

// Expand offset d_e = min distance from the centroid to the shrink-mask
// boundary (no 1/2 factor). Same point/limit duality as shrink_offset.
double expand_offset(const DenseContour& contour);
double expand_offset(const Polygon& shrunk);

// Uniform inward edge offset: every edge is translated inward by d along its
// normal and consecutive edge lines are re-intersected. Exact on convex input;
// preserves rectangles. Throws GeometryError("over-shrunk") when d annihilates
// the polygon.
Polygon shrink_contour(const QuadBox& box, double d);
Polygon shrink_contour(const Polygon& poly, double d);

// Uniform outward edge offset (the inverse of shrink_contour on rectangles).
Polygon expand_contour(const Polygon& poly, double d);

// Intersection-over-union via convex polygon clipping. Degenerate input yields
// 0.0 (a warning is appended to *warning when provided).
double iou(const QuadBox& a, const QuadBox& b, std::string* warning = nullptr);
double iou(const Polygon& a, const Polygon& b, std::string* warning = nullptr);

} // namespace tsi
