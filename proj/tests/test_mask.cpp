#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "oracles.hpp"
#include "tsi/errors.hpp"
#include "tsi/mask.hpp"
#include "tsi/util.hpp"

using namespace tsi;

TEST_CASE("rasterize") {
    SUBCASE("square covering cells (2..5)x(2..5) sets 16 cells") {
        MaskGrid m = rasterize(QuadBox::rect(2, 2, 6, 6).polygon(), 10, 10);
        CHECK(m.count() == 16);
        for (int y = 0; y < 10; ++y)
            for (int x = 0; x < 10; ++x)
                CHECK(m.at(x, y) == ((x >= 2 && x <= 5 && y >= 2 && y <= 5) ? 1 : 0));
    }
    SUBCASE("empty polygon -> all zero") {
        CHECK(rasterize(Polygon{}, 8, 8).count() == 0);
    }
    SUBCASE("full-grid polygon -> all one") {
        CHECK(rasterize(QuadBox::rect(0, 0, 8, 8).polygon(), 8, 8).count() == 64);
    }
    SUBCASE("boundary through cell centers counts as inside") {
        // right edge passes exactly through the centers of column 3
        MaskGrid m = rasterize(QuadBox::rect(0.5, 0.5, 3.5, 3.5).polygon(), 6, 6);
        CHECK(m.at(3, 1) == 1);
        CHECK(m.at(3, 3) == 1);
    }
}

TEST_CASE("binarize") {
    ProbGrid g(2, 2, 0.9);
    CHECK(binarize(g, 0.5).count() == 4);
    ProbGrid h(2, 2, 0.5);
    CHECK(binarize(h, 0.5).count() == 4); // >= convention on the boundary
    SUBCASE("elementwise against brute force") {
        Rng rng(11);
        ProbGrid mixed(13, 9);
        for (double& v : mixed.cells) v = rng.uniform();
        MaskGrid m = binarize(mixed, 0.37);
        for (std::size_t i = 0; i < mixed.cells.size(); ++i)
            CHECK(m.cells[i] == (mixed.cells[i] >= 0.37 ? 1 : 0));
    }
    SUBCASE("threshold domain") {
        CHECK_THROWS_AS(binarize(ProbGrid(2, 2), 0.0), ConfigError);
        CHECK_THROWS_AS(binarize(ProbGrid(2, 2), 1.0), ConfigError);
    }
}

TEST_CASE("dice coefficient") {
    MaskGrid a(10, 10), b(10, 10);
    SUBCASE("both empty -> 1.0") { CHECK(dice_coefficient(a, b) == 1.0); }
    SUBCASE("identical nonempty -> 1.0") {
        a.at(1, 1) = a.at(2, 2) = 1;
        CHECK(dice_coefficient(a, a) == 1.0);
    }
    SUBCASE("disjoint -> 0.0") {
        a.at(1, 1) = 1;
        b.at(5, 5) = 1;
        CHECK(dice_coefficient(a, b) == 0.0);
    }
    SUBCASE("|A|=|B|=100 with overlap 50 -> 0.5") {
        MaskGrid p(20, 20), q(20, 20);
        for (int i = 0; i < 100; ++i) p.cells[static_cast<std::size_t>(i)] = 1;
        for (int i = 50; i < 150; ++i) q.cells[static_cast<std::size_t>(i)] = 1;
        CHECK(dice_coefficient(p, q) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("symmetry and monotone drop with growing symmetric difference") {
        Rng rng(3);
        MaskGrid p(16, 16), q(16, 16);
        for (int i = 0; i < 80; ++i) {
            auto idx = rng.uniform_index(p.cells.size());
            p.cells[idx] = 1;
            q.cells[idx] = 1;
        }
        double prev = dice_coefficient(p, q);
        CHECK(prev == 1.0);
        // flip matched cells one by one; dice must never increase
        int flipped = 0;
        for (std::size_t i = 0; i < q.cells.size() && flipped < 30; ++i) {
            if (q.cells[i] == 1) {
                q.cells[i] = 0;
                ++flipped;
                double cur = dice_coefficient(p, q);
                CHECK(cur <= prev + 1e-12);
                CHECK(dice_coefficient(q, p) == doctest::Approx(cur).epsilon(1e-15));
                prev = cur;
            }
        }
    }
    SUBCASE("dimension mismatch throws") {
        CHECK_THROWS_AS(dice_coefficient(MaskGrid(2, 2), MaskGrid(2, 3)), ConfigError);
    }
    SUBCASE("dice reaches 1 only on identical masks") {
        Rng rng(8);
        for (int t = 0; t < 200; ++t) {
            MaskGrid p(6, 6), q(6, 6);
            for (auto& c : p.cells) c = rng.bernoulli(0.4) ? 1 : 0;
            q = p;
            if (rng.bernoulli(0.5)) {
                auto idx = rng.uniform_index(q.cells.size());
                q.cells[idx] ^= 1;
            }
            double d = dice_coefficient(p, q);
            CHECK((d == 1.0) == (p == q));
        }
    }
}

TEST_CASE("extract components") {
    SUBCASE("empty mask -> empty list") {
        CHECK(extract_components(MaskGrid(8, 8)).empty());
    }
    SUBCASE("one rasterized square traces back exactly") {
        MaskGrid m = rasterize(QuadBox::rect(2, 2, 6, 6).polygon(), 10, 10);
        auto polys = extract_components(m);
        REQUIRE(polys.size() == 1);
        CHECK(polygon_area(polys[0]) == doctest::Approx(16.0));
        CHECK(iou(polys[0], QuadBox::rect(2, 2, 6, 6).polygon()) >=
              doctest::Approx(0.95));
    }
    SUBCASE("two disjoint squares -> two polygons") {
        MaskGrid m(12, 12);
        for (int y = 1; y <= 3; ++y)
            for (int x = 1; x <= 3; ++x) m.at(x, y) = 1;
        for (int y = 7; y <= 9; ++y)
            for (int x = 7; x <= 9; ++x) m.at(x, y) = 1;
        CHECK(extract_components(m).size() == 2);
    }
    SUBCASE("min_area filter discards specks") {
        MaskGrid m(8, 8);
        m.at(1, 1) = 1;
        m.at(2, 1) = 1; // area 2 < 4
        CHECK(extract_components(m).empty());
        CHECK(extract_components(m, 2).size() == 1);
    }
    SUBCASE("diagonally pinched cells stay one 8-connected component") {
        MaskGrid m(6, 6);
        for (int y = 1; y <= 2; ++y)
            for (int x = 1; x <= 2; ++x) m.at(x, y) = 1;
        for (int y = 3; y <= 4; ++y)
            for (int x = 3; x <= 4; ++x) m.at(x, y) = 1;
        auto polys = extract_components(m);
        REQUIRE(polys.size() == 1);
        // re-rasterizing the pinched contour reproduces the cells
        MaskGrid again = rasterize(polys[0], 6, 6);
        CHECK(again == m);
    }
    SUBCASE("rasterize -> extract -> rasterize is idempotent") {
        Rng rng(23);
        for (int t = 0; t < 10; ++t) {
            MaskGrid m(24, 24);
            for (int b = 0; b < 3; ++b) {
                int x0 = static_cast<int>(rng.uniform_int(0, 15));
                int y0 = static_cast<int>(rng.uniform_int(0, 15));
                int w = static_cast<int>(rng.uniform_int(2, 8));
                int h = static_cast<int>(rng.uniform_int(2, 8));
                for (int y = y0; y < std::min(24, y0 + h); ++y)
                    for (int x = x0; x < std::min(24, x0 + w); ++x) m.at(x, y) = 1;
            }
            auto union_rasterize = [](const std::vector<Polygon>& polys) {
                MaskGrid acc(24, 24);
                for (const Polygon& p : polys) {
                    MaskGrid r = rasterize(p, 24, 24);
                    for (std::size_t i = 0; i < acc.cells.size(); ++i)
                        acc.cells[i] = acc.cells[i] | r.cells[i];
                }
                return acc;
            };
            MaskGrid once = union_rasterize(extract_components(m));
            MaskGrid twice = union_rasterize(extract_components(once));
            CHECK(once == twice);
        }
    }
}

TEST_CASE("pgm export") {
    MaskGrid m = rasterize(QuadBox::rect(1, 1, 3, 3).polygon(), 4, 4);
    std::string path = "test_mask_out.pgm";
    write_pgm(m, path);
    std::ifstream in(path, std::ios::binary);
    std::string header;
    std::getline(in, header);
    CHECK(header == "P5");
    std::getline(in, header);
    CHECK(header == "4 4");
    std::getline(in, header);
    CHECK(header == "1");
    std::remove(path.c_str());
}

TEST_CASE("polygons to json") {
    std::vector<Polygon> polys = {QuadBox::rect(0, 0, 1, 1).polygon()};
    std::string j = polygons_to_json(polys);
    CHECK(j ==
          "[[[0.000000,0.000000],[1.000000,0.000000],[1.000000,1.000000],[0.000000,1.000000]]]");
}
