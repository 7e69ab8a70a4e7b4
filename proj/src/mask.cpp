#include "tsi/mask.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include "tsi/errors.hpp"
#include "tsi/util.hpp"

namespace tsi {

std::size_t MaskGrid::count() const {
    return static_cast<std::size_t>(
        std::accumulate(cells.begin(), cells.end(), std::size_t{0}));
}

MaskGrid rasterize(const Polygon& poly, int height, int width) {
    if (height <= 0 || width <= 0) throw ConfigError("rasterize: grid dimensions must be > 0");
    MaskGrid mask(height, width);
    if (poly.size() < 3) return mask;

    double min_x = poly[0].x, max_x = poly[0].x, min_y = poly[0].y, max_y = poly[0].y;
    for (const Point2D& p : poly) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    int x0 = std::max(0, static_cast<int>(std::floor(min_x - 1)));
    int x1 = std::min(width - 1, static_cast<int>(std::ceil(max_x)));
    int y0 = std::max(0, static_cast<int>(std::floor(min_y - 1)));
    int y1 = std::min(height - 1, static_cast<int>(std::ceil(max_y)));

    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (point_in_polygon(poly, Point2D{x + 0.5, y + 0.5})) mask.at(x, y) = 1;
    return mask;
}

MaskGrid binarize(const ProbGrid& grid, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ConfigError("binarize: threshold must lie in (0,1)");
    MaskGrid mask(grid.height, grid.width);
    for (std::size_t i = 0; i < grid.cells.size(); ++i)
        mask.cells[i] = grid.cells[i] >= threshold ? 1 : 0;
    return mask;
}

double dice_coefficient(const MaskGrid& a, const MaskGrid& b) {
    if (a.height != b.height || a.width != b.width)
        throw ConfigError("dice_coefficient: dimension mismatch");
    std::size_t inter = 0, total = 0;
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        inter += a.cells[i] & b.cells[i];
        total += a.cells[i] + b.cells[i];
    }
    if (total == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(total);
}

namespace {

struct Vertex {
    int x, y;
    bool operator<(const Vertex& o) const { return y < o.y || (y == o.y && x < o.x); }
    bool operator==(const Vertex& o) const = default;
};

// Direction codes for rectilinear walking: E, S, W, N in screen coordinates.
constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};

// Walking with the component interior on the left, the preferred turn at a
// junction is left, then straight, then right (this keeps figure-eight pinch
// points from jumping into the wrong lobe).
int turn_preference(int incoming, int candidate) {
    // left of E(0) is N(3): left = (incoming + 3) % 4 in screen coords
    if (candidate == (incoming + 3) % 4) return 0;
    if (candidate == incoming) return 1;
    if (candidate == (incoming + 1) % 4) return 2;
    return 3;
}

void merge_collinear(Polygon& poly) {
    if (poly.size() < 3) return;
    Polygon out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2D& prev = poly[(i + n - 1) % n];
        const Point2D& cur = poly[i];
        const Point2D& next = poly[(i + 1) % n];
        double cx = (cur.x - prev.x) * (next.y - cur.y) - (cur.y - prev.y) * (next.x - cur.x);
        if (std::abs(cx) > 1e-12) out.push_back(cur);
    }
    if (out.size() >= 3) poly = std::move(out);
}

} // namespace

std::vector<Polygon> extract_components(const MaskGrid& mask, int min_area) {
    const int w = mask.width, h = mask.height;
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<Polygon> result;
    int next_label = 0;

    std::vector<std::pair<int, int>> stack;
    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            if (!mask.at(sx, sy) || label[static_cast<std::size_t>(sy) * w + sx] != -1)
                continue;
            const int comp = next_label++;
            std::vector<std::pair<int, int>> cells;
            stack.clear();
            stack.emplace_back(sx, sy);
            label[static_cast<std::size_t>(sy) * w + sx] = comp;
            while (!stack.empty()) {
                auto [x, y] = stack.back();
                stack.pop_back();
                cells.emplace_back(x, y);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (!dx && !dy) continue;
                        int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        std::size_t idx = static_cast<std::size_t>(ny) * w + nx;
                        if (mask.at(nx, ny) && label[idx] == -1) {
                            label[idx] = comp;
                            stack.emplace_back(nx, ny);
                        }
                    }
                }
            }
            if (static_cast<int>(cells.size()) < min_area) continue;

            // directed boundary edges, interior on the left
            auto inside = [&](int x, int y) {
                return x >= 0 && y >= 0 && x < w && y < h &&
                       label[static_cast<std::size_t>(y) * w + x] == comp;
            };
            // key: start vertex -> list of (direction, end vertex)
            std::map<Vertex, std::vector<int>> edges_from;
            for (auto [x, y] : cells) {
                if (!inside(x, y - 1)) edges_from[{x, y}].push_back(0);         // top: E
                if (!inside(x + 1, y)) edges_from[{x + 1, y}].push_back(1);     // right: S
                if (!inside(x, y + 1)) edges_from[{x + 1, y + 1}].push_back(2); // bottom: W
                if (!inside(x - 1, y)) edges_from[{x, y + 1}].push_back(3);     // left: N
            }
            // walk loops; the outer loop starts at the topmost-leftmost vertex
            // heading east. Inner (hole) loops are left untraced.
            Vertex start = edges_from.begin()->first;
            Polygon poly;
            Vertex cur = start;
            int dir = 0; // topmost-leftmost boundary vertex always has an E edge
            do {
                poly.push_back(Point2D{static_cast<double>(cur.x), static_cast<double>(cur.y)});
                auto it = edges_from.find(cur);
                if (it == edges_from.end() || it->second.empty())
                    throw Error("contour tracing failed: open boundary");
                auto& dirs = it->second;
                int pick = 0;
                for (std::size_t k = 1; k < dirs.size(); ++k)
                    if (turn_preference(dir, dirs[k]) < turn_preference(dir, dirs[pick]))
                        pick = static_cast<int>(k);
                dir = dirs[pick];
                dirs.erase(dirs.begin() + pick);
                if (dirs.empty()) edges_from.erase(it);
                cur = Vertex{cur.x + kDx[dir], cur.y + kDy[dir]};
            } while (!(cur == start));
            merge_collinear(poly);
            result.push_back(std::move(poly));
        }
    }
    return result;
}

void write_pgm(const MaskGrid& mask, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "P5\n" << mask.width << " " << mask.height << "\n1\n";
    out.write(reinterpret_cast<const char*>(mask.cells.data()),
              static_cast<std::streamsize>(mask.cells.size()));
    if (!out) throw IoError("write failed: " + path);
}

std::string polygons_to_json(const std::vector<Polygon>& polys) {
    std::string out = "[";
    for (std::size_t i = 0; i < polys.size(); ++i) {
        if (i) out += ",";
        out += "[";
        for (std::size_t j = 0; j < polys[i].size(); ++j) {
            if (j) out += ",";
            out += "[" + format_fixed6(polys[i][j].x) + "," + format_fixed6(polys[i][j].y) + "]";
        }
        out += "]";
    }
    out += "]";
    return out;
}

} // namespace tsi
