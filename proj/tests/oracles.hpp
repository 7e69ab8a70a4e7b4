// Independent reference implementations used as test oracles. Everything here
// is deliberately brute-force and shares no code with the library paths it
// checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "tsi/geometry.hpp"
#include "tsi/util.hpp"

namespace oracle {

// Monte-Carlo area centroid of a polygon (even-odd inside test re-derived here).
inline bool mc_inside(const tsi::Polygon& poly, double x, double y) {
    bool in = false;
    std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if ((poly[i].y > y) != (poly[j].y > y) &&
            x < (poly[j].x - poly[i].x) * (y - poly[i].y) / (poly[j].y - poly[i].y) + poly[i].x)
            in = !in;
    }
    return in;
}

inline tsi::Point2D mc_centroid(const tsi::Polygon& poly, std::uint64_t seed,
                                std::size_t samples = 1000000) {
    double min_x = poly[0].x, max_x = poly[0].x, min_y = poly[0].y, max_y = poly[0].y;
    for (const auto& p : poly) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    tsi::Rng rng(seed);
    double sx = 0, sy = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        double x = rng.uniform(min_x, max_x);
        double y = rng.uniform(min_y, max_y);
        if (mc_inside(poly, x, y)) {
            sx += x;
            sy += y;
            ++hits;
        }
    }
    return {sx / static_cast<double>(hits), sy / static_cast<double>(hits)};
}

inline double mc_iou(const tsi::Polygon& a, const tsi::Polygon& b, std::uint64_t seed,
                     std::size_t samples = 400000) {
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (const auto* poly : {&a, &b})
        for (const auto& p : *poly) {
            min_x = std::min(min_x, p.x);
            max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y);
            max_y = std::max(max_y, p.y);
        }
    tsi::Rng rng(seed);
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        double x = rng.uniform(min_x, max_x);
        double y = rng.uniform(min_y, max_y);
        bool ia = mc_inside(a, x, y), ib = mc_inside(b, x, y);
        if (ia && ib) ++inter;
        if (ia || ib) ++uni;
    }
    return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

// min distance over explicit points, no halving
inline double brute_min_point_distance(const std::vector<tsi::Point2D>& pts, tsi::Point2D c) {
    double best = 1e300;
    for (const auto& p : pts)
        best = std::min(best, std::sqrt((p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y)));
    return best;
}

// quadratic LCS
inline int lcs_bruteforce(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::vector<int>> dp(a.size() + 1, std::vector<int>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            dp[i][j] = a[i - 1] == b[j - 1] ? dp[i - 1][j - 1] + 1
                                            : std::max(dp[i - 1][j], dp[i][j - 1]);
    return dp[a.size()][b.size()];
}

inline double rouge_l_bruteforce(const std::vector<std::string>& cand,
                                 const std::vector<std::string>& ref) {
    if (cand.empty() && ref.empty()) return 1.0;
    if (cand.empty() || ref.empty()) return 0.0;
    double lcs = lcs_bruteforce(cand, ref);
    double r = lcs / static_cast<double>(ref.size());
    double p = lcs / static_cast<double>(cand.size());
    return (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
}

inline std::map<std::vector<std::string>, int> ngrams_bruteforce(
    const std::vector<std::string>& toks, int n) {
    std::map<std::vector<std::string>, int> out;
    for (int i = 0; i + n <= static_cast<int>(toks.size()); ++i)
        ++out[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
    return out;
}

inline double rouge_n_bruteforce(const std::vector<std::string>& cand,
                                 const std::vector<std::string>& ref, int n) {
    auto rg = ngrams_bruteforce(ref, n);
    auto cg = ngrams_bruteforce(cand, n);
    std::int64_t ref_total = 0;
    for (auto& [g, c] : rg) ref_total += c;
    std::int64_t cand_total = 0;
    for (auto& [g, c] : cg) cand_total += c;
    if (ref_total == 0) return cand_total == 0 ? 1.0 : 0.0;
    std::int64_t overlap = 0;
    for (auto& [g, c] : cg) {
        auto it = rg.find(g);
        if (it != rg.end()) overlap += std::min(c, it->second);
    }
    return static_cast<double>(overlap) / static_cast<double>(ref_total);
}

inline double bleu4_bruteforce(const std::vector<std::vector<std::string>>& cands,
                               const std::vector<std::vector<std::string>>& refs) {
    std::int64_t cand_len = 0, ref_len = 0;
    double log_p = 0.0;
    for (int n = 1; n <= 4; ++n) {
        std::int64_t match = 0, total = 0;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            auto cg = ngrams_bruteforce(cands[i], n);
            auto rg = ngrams_bruteforce(refs[i], n);
            for (auto& [g, c] : cg) {
                total += c;
                auto it = rg.find(g);
                if (it != rg.end()) match += std::min(c, it->second);
            }
        }
        double p = total == 0 ? 1.0
                              : std::max(static_cast<double>(match) / static_cast<double>(total),
                                         1e-9);
        log_p += std::log(p);
    }
    for (std::size_t i = 0; i < cands.size(); ++i) {
        cand_len += static_cast<std::int64_t>(cands[i].size());
        ref_len += static_cast<std::int64_t>(refs[i].size());
    }
    if (cand_len == 0) return 0.0;
    double bp = cand_len < ref_len
                    ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len))
                    : 1.0;
    return bp * std::exp(log_p / 4.0);
}

// exhaustive optimal one-to-one assignment: maximum number of (gt, pred)
// pairs with IoU >= threshold, by recursion over gt indices
inline int optimal_tp_count(const std::vector<std::vector<double>>& iou_matrix, double threshold) {
    const int n_gt = static_cast<int>(iou_matrix.size());
    const int n_pred = n_gt ? static_cast<int>(iou_matrix[0].size()) : 0;
    std::vector<bool> used(n_pred, false);
    int best = 0;
    auto rec = [&](auto&& self, int g, int count) -> void {
        best = std::max(best, count);
        if (g == n_gt) return;
        self(self, g + 1, count); // gt g unmatched
        for (int p = 0; p < n_pred; ++p) {
            if (used[p] || iou_matrix[g][p] < threshold) continue;
            used[p] = true;
            self(self, g + 1, count + 1);
            used[p] = false;
        }
    };
    rec(rec, 0, 0);
    return best;
}

} // namespace oracle
