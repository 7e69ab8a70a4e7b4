#include "tsi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsi/errors.hpp"

namespace tsi {

namespace {

constexpr double kDegenerateArea = 1e-12;
constexpr double kOnBoundaryEps = 1e-12;

double cross(Point2D o, Point2D a, Point2D b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double dist(Point2D a, Point2D b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool segments_intersect(Point2D a, Point2D b, Point2D c, Point2D d) {
    double d1 = cross(c, d, a);
    double d2 = cross(c, d, b);
    double d3 = cross(a, b, c);
    double d4 = cross(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    return false;
}

// Intersection of infinite lines (p1,p2) and (p3,p4). Parallel -> nullopt.
bool line_intersection(Point2D p1, Point2D p2, Point2D p3, Point2D p4, Point2D& out) {
    double a1 = p2.y - p1.y, b1 = p1.x - p2.x;
    double c1 = a1 * p1.x + b1 * p1.y;
    double a2 = p4.y - p3.y, b2 = p3.x - p4.x;
    double c2 = a2 * p3.x + b2 * p3.y;
    double det = a1 * b2 - a2 * b1;
    if (std::abs(det) < 1e-15) return false;
    out = Point2D{(b2 * c1 - b1 * c2) / det, (a1 * c2 - a2 * c1) / det};
    return true;
}

} // namespace

double signed_area(const Polygon& poly) {
    double s = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2D& a = poly[i];
        const Point2D& b = poly[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    return 0.5 * s;
}

double polygon_area(const Polygon& poly) { return std::abs(signed_area(poly)); }

Point2D polygon_centroid(const Polygon& poly) {
    double a = 0.0, cx = 0.0, cy = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2D& p = poly[i];
        const Point2D& q = poly[(i + 1) % n];
        double w = p.x * q.y - q.x * p.y;
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    if (std::abs(a) < kDegenerateArea)
        throw GeometryError("degenerate polygon: zero area centroid");
    return Point2D{cx / (3.0 * a), cy / (3.0 * a)};
}

Point2D box_center(const QuadBox& box) { return polygon_centroid(box.polygon()); }

bool is_convex(const Polygon& poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    int sign = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double c = cross(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]);
        if (std::abs(c) < 1e-12) continue;
        int s = c > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        else if (s != sign) return false;
    }
    return true;
}

bool is_simple_quad(const QuadBox& box) {
    const auto& c = box.corners;
    // only the two diagonally opposite edge pairs can cross in a quad
    return !segments_intersect(c[0], c[1], c[2], c[3]) &&
           !segments_intersect(c[1], c[2], c[3], c[0]);
}

double point_segment_distance(Point2D p, Point2D a, Point2D b) {
    double vx = b.x - a.x, vy = b.y - a.y;
    double len2 = vx * vx + vy * vy;
    if (len2 <= 0.0) return dist(p, a);
    double t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return dist(p, Point2D{a.x + t * vx, a.y + t * vy});
}

double boundary_distance(const Polygon& poly, Point2D p) {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i)
        best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
    return best;
}

bool point_in_polygon(const Polygon& poly, Point2D p) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i)
        if (point_segment_distance(p, poly[i], poly[(i + 1) % n]) <= kOnBoundaryEps)
            return true;
    bool inside = false;
    for (std::size_t i = 0; i < n; ++i) {
        Point2D a = poly[i], b = poly[(i + 1) % n];
        // half-open rule keeps vertices from double-counting
        if ((a.y <= p.y) != (b.y <= p.y)) {
            double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (xint > p.x) inside = !inside;
        }
    }
    return inside;
}

Polygon oriented_positive(const Polygon& poly) {
    if (signed_area(poly) >= 0.0) return poly;
    Polygon r(poly.rbegin(), poly.rend());
    return r;
}

Polygon clip_polygon(const Polygon& subject, const Polygon& clip) {
    Polygon output = subject;
    const Polygon c = oriented_positive(clip);
    const std::size_t cn = c.size();
    for (std::size_t i = 0; i < cn && !output.empty(); ++i) {
        Point2D ca = c[i], cb = c[(i + 1) % cn];
        Polygon input;
        input.swap(output);
        const std::size_t sn = input.size();
        for (std::size_t j = 0; j < sn; ++j) {
            Point2D s = input[j], e = input[(j + 1) % sn];
            // interior of a positively oriented polygon is where cross >= 0
            bool s_in = cross(ca, cb, s) >= 0.0;
            bool e_in = cross(ca, cb, e) >= 0.0;
            if (s_in && e_in) {
                output.push_back(e);
            } else if (s_in && !e_in) {
                Point2D x;
                if (line_intersection(ca, cb, s, e, x)) output.push_back(x);
            } else if (!s_in && e_in) {
                Point2D x;
                if (line_intersection(ca, cb, s, e, x)) output.push_back(x);
                output.push_back(e);
            }
        }
    }
    return output;
}

DenseContour sample_dense_contour(const QuadBox& box, int n) {
    if (n < 16) throw ConfigError("sample_dense_contour: n must be >= 16");
    Polygon poly = box.polygon();
    if (polygon_area(poly) < kDegenerateArea)
        throw GeometryError("degenerate polygon");

    std::array<double, 4> edge_len{};
    double perimeter = 0.0;
    for (int i = 0; i < 4; ++i) {
        edge_len[i] = dist(poly[i], poly[(i + 1) % 4]);
        perimeter += edge_len[i];
    }
    DenseContour out;
    out.points.reserve(n);
    double spacing = perimeter / n;
    int edge = 0;
    double edge_start = 0.0;
    for (int k = 0; k < n; ++k) {
        double target = k * spacing;
        while (edge < 3 && target >= edge_start + edge_len[edge] - 1e-12) {
            edge_start += edge_len[edge];
            ++edge;
        }
        double t = edge_len[edge] > 0 ? (target - edge_start) / edge_len[edge] : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        Point2D a = poly[edge], b = poly[(edge + 1) % 4];
        out.points.push_back(Point2D{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
    return out;
}

DenseContour sample_dense_contour(const QuadBox& box) {
    Polygon poly = box.polygon();
    double perimeter = 0.0;
    for (int i = 0; i < 4; ++i) perimeter += dist(poly[i], poly[(i + 1) % 4]);
    int n = std::max(64, static_cast<int>(std::ceil(perimeter / 2.0)));
    return sample_dense_contour(box, n);
}

Point2D centroid(const DenseContour& contour) {
    return polygon_centroid(contour.points);
}

namespace {

double min_point_distance(const std::vector<Point2D>& pts, Point2D c) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point2D& p : pts) best = std::min(best, dist(c, p));
    return best;
}

Point2D interior_centroid(const Polygon& poly, const char* what) {
    Point2D c = polygon_centroid(poly);
    if (!point_in_polygon(poly, c))
        throw GeometryError(std::string("centroid exterior: ") + what);
    return c;
}

} // namespace

double shrink_offset(const DenseContour& contour) {
    Point2D c = interior_centroid(contour.points, "shrink_offset");
    return 0.5 * min_point_distance(contour.points, c);
}

double shrink_offset(const QuadBox& box) {
    Polygon poly = box.polygon();
    Point2D c = interior_centroid(poly, "shrink_offset");
    return 0.5 * boundary_distance(poly, c);
}

double expand_offset(const DenseContour& contour) {
    Point2D c = interior_centroid(contour.points, "expand_offset");
    return min_point_distance(contour.points, c);
}

double expand_offset(const Polygon& shrunk) {
    Point2D c = interior_centroid(shrunk, "expand_offset");
    return boundary_distance(shrunk, c);
}

namespace {

// d > 0 moves edges inward, d < 0 outward.
Polygon offset_edges(const Polygon& input, double d) {
    Polygon poly = oriented_positive(input);
    const std::size_t n = poly.size();
    if (n < 3 || polygon_area(poly) < kDegenerateArea)
        throw GeometryError("degenerate polygon");

    // translated edge lines
    std::vector<std::pair<Point2D, Point2D>> lines(n);
    for (std::size_t i = 0; i < n; ++i) {
        Point2D a = poly[i], b = poly[(i + 1) % n];
        double ex = b.x - a.x, ey = b.y - a.y;
        double len = std::hypot(ex, ey);
        if (len < 1e-12) throw GeometryError("degenerate edge");
        // interior of a positively oriented polygon lies on the (-ey, ex) side
        double nx = -ey / len, ny = ex / len;
        Point2D shift{nx * d, ny * d};
        lines[i] = {Point2D{a.x + shift.x, a.y + shift.y},
                    Point2D{b.x + shift.x, b.y + shift.y}};
    }
    Polygon out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& prev = lines[(i + n - 1) % n];
        const auto& cur = lines[i];
        Point2D x;
        if (!line_intersection(prev.first, prev.second, cur.first, cur.second, x))
            throw GeometryError("over-shrunk");
        out[i] = x;
    }
    if (d > 0.0) {
        // shrinking must keep orientation and leave real area
        if (signed_area(out) < kDegenerateArea) throw GeometryError("over-shrunk");
        for (std::size_t i = 0; i < n; ++i) {
            double c = cross(out[i], out[(i + 1) % n], out[(i + 2) % n]);
            if (c < -1e-9) throw GeometryError("over-shrunk");
        }
    }
    return out;
}

} // namespace

Polygon shrink_contour(const QuadBox& box, double d) {
    return shrink_contour(box.polygon(), d);
}

Polygon shrink_contour(const Polygon& poly, double d) {
    if (d < 0.0) throw ConfigError("shrink_contour: offset must be >= 0");
    return offset_edges(poly, d);
}

Polygon expand_contour(const Polygon& poly, double d) {
    if (d < 0.0) throw ConfigError("expand_contour: offset must be >= 0");
    return offset_edges(poly, -d);
}

double iou(const Polygon& a, const Polygon& b, std::string* warning) {
    double area_a = polygon_area(a);
    double area_b = polygon_area(b);
    if (a.size() < 3 || b.size() < 3 || area_a < kDegenerateArea || area_b < kDegenerateArea) {
        if (warning) *warning = "degenerate polygon in iou; returning 0";
        return 0.0;
    }
    const Polygon* clip = &b;
    const Polygon* subject = &a;
    if (!is_convex(b)) {
        if (is_convex(a)) {
            clip = &a;
            subject = &b;
        } else if (warning) {
            *warning = "neither polygon convex; iou is approximate";
        }
    }
    double inter = polygon_area(clip_polygon(oriented_positive(*subject), *clip));
    double uni = area_a + area_b - inter;
    if (uni <= 0.0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double iou(const QuadBox& a, const QuadBox& b, std::string* warning) {
    return iou(a.polygon(), b.polygon(), warning);
}

} // namespace tsi
