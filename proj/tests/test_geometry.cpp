#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tsi/errors.hpp"
#include "tsi/geometry.hpp"
#include "tsi/util.hpp"

using namespace tsi;

namespace {

QuadBox random_rect(Rng& rng) {
    double w = rng.uniform(10.0, 400.0);
    double h = rng.uniform(10.0, 400.0);
    double x = rng.uniform(0.0, 1000.0);
    double y = rng.uniform(0.0, 1000.0);
    return QuadBox::rect(x, y, x + w, y + h);
}

// convex quad built by jittering a rectangle's corners inward/outward a little
QuadBox random_convex_quad(Rng& rng) {
    for (;;) {
        double cx = rng.uniform(100.0, 900.0), cy = rng.uniform(100.0, 900.0);
        double rx = rng.uniform(30.0, 200.0), ry = rng.uniform(30.0, 200.0);
        QuadBox q{{Point2D{cx - rx + rng.uniform(-0.2, 0.2) * rx,
                           cy - ry + rng.uniform(-0.2, 0.2) * ry},
                   Point2D{cx + rx + rng.uniform(-0.2, 0.2) * rx,
                           cy - ry + rng.uniform(-0.2, 0.2) * ry},
                   Point2D{cx + rx + rng.uniform(-0.2, 0.2) * rx,
                           cy + ry + rng.uniform(-0.2, 0.2) * ry},
                   Point2D{cx - rx + rng.uniform(-0.2, 0.2) * rx,
                           cy + ry + rng.uniform(-0.2, 0.2) * ry}}};
        if (is_convex(q.polygon()) && is_simple_quad(q)) return q;
    }
}

} // namespace

TEST_CASE("dense contour sampling") {
    SUBCASE("unit square, n=16: four points per side") {
        QuadBox box = QuadBox::rect(0, 0, 1, 1);
        DenseContour c = sample_dense_contour(box, 16);
        REQUIRE(c.points.size() == 16);
        int per_side[4] = {0, 0, 0, 0};
        for (const auto& p : c.points) {
            // corners count with the side they start
            if (p.y == 0.0 && p.x < 1.0) ++per_side[0];
            else if (p.x == 1.0 && p.y < 1.0) ++per_side[1];
            else if (p.y == 1.0 && p.x > 0.0) ++per_side[2];
            else ++per_side[3];
        }
        CHECK(per_side[0] == 4);
        CHECK(per_side[1] == 4);
        CHECK(per_side[2] == 4);
        CHECK(per_side[3] == 4);
    }
    SUBCASE("4x2 rectangle, n=24: spacing 0.5 by arc length") {
        QuadBox box = QuadBox::rect(0, 0, 4, 2);
        DenseContour c = sample_dense_contour(box, 24);
        REQUIRE(c.points.size() == 24);
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            const Point2D& a = c.points[i];
            const Point2D& b = c.points[(i + 1) % c.points.size()];
            CHECK(std::hypot(a.x - b.x, a.y - b.y) == doctest::Approx(0.5).epsilon(1e-12));
        }
    }
    SUBCASE("random quad, n=1000: uniform adjacent spacing") {
        Rng rng(41);
        QuadBox q = random_convex_quad(rng);
        DenseContour c = sample_dense_contour(q, 1000);
        double perimeter = 0.0;
        Polygon poly = q.polygon();
        for (int i = 0; i < 4; ++i) {
            const Point2D& a = poly[i];
            const Point2D& b = poly[(i + 1) % 4];
            perimeter += std::hypot(a.x - b.x, a.y - b.y);
        }
        const double expected = perimeter / 1000.0;
        for (std::size_t i = 0; i + 1 < c.points.size(); ++i) {
            double d = std::hypot(c.points[i].x - c.points[i + 1].x,
                                  c.points[i].y - c.points[i + 1].y);
            // spacing is uniform except where the path turns a corner (shorter chord)
            CHECK(d <= expected * (1.0 + 1e-6));
        }
        // arc-length positions are exactly uniform: total recovered perimeter matches
        CHECK(c.points.size() == 1000);
    }
    SUBCASE("default density keeps spacing at or under 2 px and converges") {
        QuadBox big = QuadBox::rect(0, 0, 900, 400);
        DenseContour c = sample_dense_contour(big);
        CHECK(c.points.size() >= 2600 / 2);
        for (std::size_t i = 0; i + 1 < c.points.size(); ++i)
            CHECK(std::hypot(c.points[i].x - c.points[i + 1].x,
                             c.points[i].y - c.points[i + 1].y) <= 2.0 + 1e-9);
        // sampled offset converges on the exact polygon form
        double exact = shrink_offset(big);
        CHECK(std::abs(shrink_offset(c) - exact) <= 1e-3 * 2600.0 / c.points.size());
    }
    SUBCASE("degenerate and undersampled boxes are rejected") {
        QuadBox degenerate = QuadBox::rect(0, 0, 0, 5);
        CHECK_THROWS_AS(sample_dense_contour(degenerate, 16), GeometryError);
        CHECK_THROWS_AS(sample_dense_contour(QuadBox::rect(0, 0, 1, 1), 8), ConfigError);
    }
}

TEST_CASE("polygon centroid") {
    QuadBox square = QuadBox::rect(0, 0, 4, 4);
    Point2D c = centroid(sample_dense_contour(square, 32));
    CHECK(c.x == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(c.y == doctest::Approx(2.0).epsilon(1e-12));

    QuadBox moved = QuadBox::rect(10, 5, 14, 9);
    Point2D c2 = centroid(sample_dense_contour(moved, 32));
    CHECK(c2.x == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(c2.y == doctest::Approx(7.0).epsilon(1e-12));

    SUBCASE("random quad matches Monte-Carlo centroid") {
        Rng rng(7);
        QuadBox q = random_convex_quad(rng);
        Point2D exact = polygon_centroid(q.polygon());
        Point2D mc = oracle::mc_centroid(q.polygon(), 1234);
        CHECK(std::abs(exact.x - mc.x) < 1e-2 * 200);
        CHECK(std::abs(exact.y - mc.y) < 1e-2 * 200);
    }
}

TEST_CASE("shrink offset (Eq.4 form: half the polar minimum distance)") {
    CHECK(shrink_offset(QuadBox::rect(-2, -2, 2, 2)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(shrink_offset(QuadBox::rect(0, 0, 4, 2)) == doctest::Approx(0.5).epsilon(1e-12));

    SUBCASE("contour form equals brute force over sampled points within 1e-9") {
        Rng rng(99);
        for (int t = 0; t < 20; ++t) {
            QuadBox q = random_convex_quad(rng);
            DenseContour c = sample_dense_contour(q, 1000);
            double expected = 0.5 * oracle::brute_min_point_distance(c.points,
                                                                     polygon_centroid(c.points));
            CHECK(shrink_offset(c) == doctest::Approx(expected).epsilon(1e-9));
        }
    }
    SUBCASE("exterior centroid is rejected") {
        // deep dart: simple, non-convex, area centroid inside the notch
        QuadBox q{{Point2D{-1, 0}, Point2D{0, 9}, Point2D{1, 0}, Point2D{0, 10}}};
        REQUIRE(is_simple_quad(q));
        CHECK_THROWS_AS(shrink_offset(q), GeometryError);
    }
}

TEST_CASE("shrink contour") {
    SUBCASE("square side 4 shrinks to square side 2") {
        Polygon r = shrink_contour(QuadBox::rect(0, 0, 4, 4), 1.0);
        REQUIRE(r.size() == 4);
        CHECK(polygon_area(r) == doctest::Approx(4.0).epsilon(1e-12));
        Point2D c = polygon_centroid(r);
        CHECK(c.x == doctest::Approx(2.0));
        CHECK(c.y == doctest::Approx(2.0));
    }
    SUBCASE("4x2 rectangle shrinks to 3x1") {
        Polygon r = shrink_contour(QuadBox::rect(0, 0, 4, 2), 0.5);
        CHECK(polygon_area(r) == doctest::Approx(3.0).epsilon(1e-12));
    }
    SUBCASE("random convex quads: area drops, vertices keep distance >= d from edges") {
        Rng rng(3);
        for (int t = 0; t < 30; ++t) {
            QuadBox q = random_convex_quad(rng);
            double d = 0.25 * shrink_offset(q); // comfortably feasible
            Polygon r = shrink_contour(q, d);
            CHECK(polygon_area(r) < polygon_area(q.polygon()));
            Polygon orig = q.polygon();
            for (const Point2D& v : r)
                for (int e = 0; e < 4; ++e)
                    CHECK(point_segment_distance(v, orig[e], orig[(e + 1) % 4]) >= d - 1e-6);
        }
    }
    SUBCASE("over-shrinking throws") {
        CHECK_THROWS_AS(shrink_contour(QuadBox::rect(0, 0, 4, 2), 1.5), GeometryError);
    }
}

TEST_CASE("expand offset (Eq.6 form: no half factor)") {
    CHECK(expand_offset(QuadBox::rect(-1, -1, 1, 1).polygon()) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(expand_offset(QuadBox::rect(0, 0, 3, 1).polygon()) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(expand_offset(sample_dense_contour(QuadBox::rect(-1, -1, 1, 1), 16)) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("expand contour direct examples") {
    // square side 2 expanded by 1 -> square side 4, same center
    Polygon r = expand_contour(QuadBox::rect(1, 1, 3, 3).polygon(), 1.0);
    REQUIRE(r.size() == 4);
    CHECK(r[0].x == doctest::Approx(0.0));
    CHECK(r[0].y == doctest::Approx(0.0));
    CHECK(r[2].x == doctest::Approx(4.0));
    CHECK(r[2].y == doctest::Approx(4.0));
    // rectangle 3x1 expanded by 0.5 -> 4x2
    Polygon q = expand_contour(QuadBox::rect(0.5, 0.5, 3.5, 1.5).polygon(), 0.5);
    CHECK(polygon_area(q) == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("shrink/expand duality on rectangles") {
    SUBCASE("both offsets equal shortside/4 symbolically") {
        Rng rng(17);
        for (int t = 0; t < 50; ++t) {
            QuadBox b = random_rect(rng);
            double w = b.corners[1].x - b.corners[0].x;
            double h = b.corners[3].y - b.corners[0].y;
            double expected = std::min(w, h) / 4.0;
            double ds = shrink_offset(b);
            CHECK(ds == doctest::Approx(expected).epsilon(1e-12));
            double de = expand_offset(shrink_contour(b, ds));
            CHECK(de == doctest::Approx(ds).epsilon(1e-9));
        }
    }
    SUBCASE("round trip recovers the rectangle") {
        CHECK(polygon_area(expand_contour(shrink_contour(QuadBox::rect(0, 0, 2, 2), 0.5), 0.5)) ==
              doctest::Approx(4.0).epsilon(1e-12));
        Rng rng(18);
        for (int t = 0; t < 50; ++t) {
            QuadBox b = random_rect(rng);
            double ds = shrink_offset(b);
            Polygon back = expand_contour(shrink_contour(b, ds), ds);
            Polygon orig = b.polygon();
            REQUIRE(back.size() == 4);
            for (int v = 0; v < 4; ++v) {
                CHECK(std::abs(back[v].x - orig[v].x) <= 1e-6);
                CHECK(std::abs(back[v].y - orig[v].y) <= 1e-6);
            }
            CHECK(iou(QuadBox{{back[0], back[1], back[2], back[3]}}, b) ==
                  doctest::Approx(1.0).epsilon(1e-6));
        }
    }
    SUBCASE("scale equivariance and translation invariance of the offsets") {
        Rng rng(19);
        QuadBox b = random_rect(rng);
        double ds = shrink_offset(b);
        const double k = 3.5;
        QuadBox scaled = b, moved = b;
        for (int i = 0; i < 4; ++i) {
            scaled.corners[i].x *= k;
            scaled.corners[i].y *= k;
            moved.corners[i].x += 123.25;
            moved.corners[i].y -= 41.5;
        }
        CHECK(shrink_offset(scaled) == doctest::Approx(k * ds).epsilon(1e-9));
        CHECK(shrink_offset(moved) == doctest::Approx(ds).epsilon(1e-9));
    }
}

TEST_CASE("iou") {
    QuadBox a = QuadBox::rect(0, 0, 1, 1);
    CHECK(iou(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(iou(a, QuadBox::rect(5, 5, 6, 6)) == doctest::Approx(0.0));
    // two unit squares overlapping in a 0.5x1 strip
    CHECK(iou(a, QuadBox::rect(0.5, 0, 1.5, 1)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    SUBCASE("degenerate input yields 0 and a warning") {
        std::string warning;
        QuadBox degenerate = QuadBox::rect(0, 0, 0, 0);
        CHECK(iou(a, degenerate, &warning) == 0.0);
        CHECK(!warning.empty());
    }
    SUBCASE("random pairs agree with Monte-Carlo") {
        Rng rng(5);
        for (int t = 0; t < 10; ++t) {
            QuadBox p = random_convex_quad(rng);
            QuadBox q = random_convex_quad(rng);
            double exact = iou(p, q);
            double approx = oracle::mc_iou(p.polygon(), q.polygon(), 77 + t);
            CHECK(std::abs(exact - approx) < 0.01);
        }
    }
}
