#include "tsi/detect_eval.hpp"

#include <algorithm>
#include <cmath>

#include "tsi/errors.hpp"
#include "tsi/util.hpp"

namespace tsi {

const char* kind_name(SignKind kind) {
    switch (kind) {
        case SignKind::Symbol: return "symbol";
        case SignKind::Text: return "text";
        case SignKind::Panel: return "panel";
    }
    return "?";
}

void MatchOutcome::accumulate(const MatchOutcome& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    ignored_matches += other.ignored_matches;
    // pairs are per-scene detail; aggregation keeps counts only
}

MatchOutcome match_detections(std::span<const GroundTruthBox> gt,
                              std::span<const Prediction> pred, double iou_threshold) {
    struct Cand {
        double iou;
        int gt_index;
        int pred_index;
    };
    std::vector<Cand> cands;
    for (int g = 0; g < static_cast<int>(gt.size()); ++g) {
        if (gt[g].ignored) continue;
        for (int p = 0; p < static_cast<int>(pred.size()); ++p) {
            double v = iou(gt[g].box, pred[p].box);
            if (v >= iou_threshold) cands.push_back({v, g, p});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.gt_index != b.gt_index) return a.gt_index < b.gt_index;
        return a.pred_index < b.pred_index;
    });

    MatchOutcome out;
    std::vector<bool> gt_used(gt.size(), false), pred_used(pred.size(), false);
    for (const Cand& c : cands) {
        if (gt_used[c.gt_index] || pred_used[c.pred_index]) continue;
        gt_used[c.gt_index] = true;
        pred_used[c.pred_index] = true;
        out.pairs.push_back({c.gt_index, c.pred_index, c.iou});
    }
    out.tp = static_cast<std::int64_t>(out.pairs.size());

    // leftover predictions that sit on an ignored GT region are discarded
    for (int p = 0; p < static_cast<int>(pred.size()); ++p) {
        if (pred_used[p]) continue;
        bool on_ignored = false;
        for (int g = 0; g < static_cast<int>(gt.size()) && !on_ignored; ++g)
            if (gt[g].ignored && iou(gt[g].box, pred[p].box) >= iou_threshold) on_ignored = true;
        if (on_ignored)
            ++out.ignored_matches;
        else
            ++out.fp;
    }
    for (int g = 0; g < static_cast<int>(gt.size()); ++g)
        if (!gt[g].ignored && !gt_used[g]) ++out.fn;
    return out;
}

PRF prf(const MatchOutcome& outcome) {
    const std::int64_t n_pred = outcome.tp + outcome.fp;
    const std::int64_t n_gt = outcome.tp + outcome.fn;
    PRF r;
    if (n_pred == 0 && n_gt == 0) {
        r.precision = r.recall = r.f_measure = 1.0;
        return r;
    }
    r.precision = n_pred ? static_cast<double>(outcome.tp) / n_pred : 0.0;
    r.recall = n_gt ? static_cast<double>(outcome.tp) / n_gt : 0.0;
    r.f_measure = (r.precision + r.recall) > 0.0
                      ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                      : 0.0;
    return r;
}

std::string char_class_of(char32_t cp) {
    if (cp >= '0' && cp <= '9') return "N";
    if (is_cjk_ideograph(cp)) return "C";
    if ((cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z')) return "E";
    return "other";
}

void RecognitionResult::accumulate(const RecognitionResult& other) {
    for (const auto& [k, v] : other.per_class) {
        per_class[k].correct += v.correct;
        per_class[k].total += v.total;
    }
    overall.correct += other.overall.correct;
    overall.total += other.overall.total;
    for (const auto& [k, v] : other.char_classes) {
        char_classes[k].correct += v.correct;
        char_classes[k].total += v.total;
    }
    char_overall.correct += other.char_overall.correct;
    char_overall.total += other.char_overall.total;
}

std::string normalize_text(const std::string& text) {
    // Trim plus a small composition pass (combining acute/grave/circumflex/
    // diaeresis/tilde onto ASCII letters). ASCII and CJK ideographs are
    // already NFC fixed points, which covers everything this toolkit emits.
    std::vector<char32_t> cps = utf8_decode(trim(text));
    std::vector<char32_t> out;
    out.reserve(cps.size());
    auto compose = [](char32_t base, char32_t mark) -> char32_t {
        struct Row {
            char32_t mark;
            const char* bases;
            const char32_t* composed;
        };
        static const char32_t grave[] = {0xC0, 0xC8, 0xCC, 0xD2, 0xD9, 0xE0, 0xE8, 0xEC, 0xF2, 0xF9};
        static const char32_t acute[] = {0xC1, 0xC9, 0xCD, 0xD3, 0xDA, 0xE1, 0xE9, 0xED, 0xF3, 0xFA};
        static const char32_t circ[] = {0xC2, 0xCA, 0xCE, 0xD4, 0xDB, 0xE2, 0xEA, 0xEE, 0xF4, 0xFB};
        static const char32_t tilde[] = {0xC3, 0, 0, 0xD5, 0, 0xE3, 0, 0, 0xF5, 0};
        static const char32_t diaer[] = {0xC4, 0xCB, 0xCF, 0xD6, 0xDC, 0xE4, 0xEB, 0xEF, 0xF6, 0xFC};
        static const Row rows[] = {{0x300, "AEIOUaeiou", grave},
                                   {0x301, "AEIOUaeiou", acute},
                                   {0x302, "AEIOUaeiou", circ},
                                   {0x303, "AEIOUaeiou", tilde},
                                   {0x308, "AEIOUaeiou", diaer}};
        for (const Row& row : rows) {
            if (row.mark != mark) continue;
            for (int i = 0; row.bases[i]; ++i)
                if (static_cast<char32_t>(row.bases[i]) == base && row.composed[i])
                    return row.composed[i];
        }
        if (mark == 0x303 && base == 'N') return 0xD1;
        if (mark == 0x303 && base == 'n') return 0xF1;
        return 0;
    };
    for (char32_t cp : cps) {
        if (!out.empty() && cp >= 0x300 && cp <= 0x36F) {
            char32_t composed = compose(out.back(), cp);
            if (composed) {
                out.back() = composed;
                continue;
            }
        }
        out.push_back(cp);
    }
    return utf8_encode(out);
}

std::vector<std::pair<int, int>> align_edit_script(const std::vector<char32_t>& gt,
                                                   const std::vector<char32_t>& pred) {
    const std::size_t n = gt.size(), m = pred.size();
    std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = 0; i <= n; ++i) dp[i][0] = static_cast<int>(i);
    for (std::size_t j = 0; j <= m; ++j) dp[0][j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            int sub = dp[i - 1][j - 1] + (gt[i - 1] == pred[j - 1] ? 0 : 1);
            dp[i][j] = std::min({sub, dp[i - 1][j] + 1, dp[i][j - 1] + 1});
        }
    }
    // backtrace, preferring diagonal, then deletion, then insertion
    std::vector<std::pair<int, int>> aligned;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 &&
            dp[i][j] == dp[i - 1][j - 1] + (gt[i - 1] == pred[j - 1] ? 0 : 1)) {
            aligned.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
            --i;
            --j;
        } else if (i > 0 && dp[i][j] == dp[i - 1][j] + 1) {
            --i;
        } else {
            --j;
        }
    }
    std::reverse(aligned.begin(), aligned.end());
    return aligned;
}

RecognitionResult recognition_accuracy(std::span<const GroundTruthBox> gt,
                                       std::span<const Prediction> pred, SignKind kind,
                                       double iou_threshold) {
    MatchOutcome matches = match_detections(gt, pred, iou_threshold);
    RecognitionResult result;

    std::vector<int> matched_pred(gt.size(), -1);
    for (const auto& pair : matches.pairs) matched_pred[pair.gt_index] = pair.pred_index;

    for (std::size_t g = 0; g < gt.size(); ++g) {
        if (gt[g].ignored) continue;
        const int p = matched_pred[g];
        if (kind == SignKind::Text) {
            const std::string gt_norm = normalize_text(gt[g].label);
            const std::string pred_norm = p >= 0 ? normalize_text(pred[p].label) : std::string();
            const bool exact = p >= 0 && gt_norm == pred_norm;
            ++result.overall.total;
            if (exact) ++result.overall.correct;

            std::vector<char32_t> gt_cps = utf8_decode(gt_norm);
            std::vector<char32_t> pred_cps = utf8_decode(pred_norm);
            std::vector<bool> gt_char_ok(gt_cps.size(), false);
            if (p >= 0) {
                for (const auto& [gi, pi] : align_edit_script(gt_cps, pred_cps))
                    if (gt_cps[gi] == pred_cps[pi]) gt_char_ok[gi] = true;
            }
            for (std::size_t k = 0; k < gt_cps.size(); ++k) {
                std::string cls = char_class_of(gt_cps[k]);
                ++result.char_classes[cls].total;
                ++result.char_overall.total;
                if (gt_char_ok[k]) {
                    ++result.char_classes[cls].correct;
                    ++result.char_overall.correct;
                }
            }
        } else {
            const bool correct = p >= 0 && gt[g].label == pred[p].label;
            ++result.per_class[gt[g].label].total;
            ++result.overall.total;
            if (correct) {
                ++result.per_class[gt[g].label].correct;
                ++result.overall.correct;
            }
        }
    }
    return result;
}

double cross_entropy(std::span<const double> prob, std::size_t target_index) {
    if (target_index >= prob.size())
        throw ConfigError("cross_entropy: target index out of range");
    double sum = 0.0;
    for (double p : prob) sum += p;
    if (std::abs(sum - 1.0) > 1e-6)
        throw ConfigError("cross_entropy: probabilities must sum to 1");
    return -std::log(std::max(prob[target_index], 1e-12));
}

std::vector<GroundTruthBox> gt_boxes_of_kind(const SceneRecord& scene, SignKind kind) {
    std::vector<GroundTruthBox> out;
    switch (kind) {
        case SignKind::Symbol:
            for (const auto& a : scene.symbols) out.push_back({a.box, a.class_code, a.ignored});
            break;
        case SignKind::Text:
            for (const auto& t : scene.texts) out.push_back({t.box, t.transcription, t.ignored});
            break;
        case SignKind::Panel:
            for (const auto& p : scene.panels)
                out.push_back({p.box, std::to_string(p.panel_class), false});
            break;
    }
    return out;
}

std::vector<Prediction> predictions_of_kind(const SceneRecord& scene, SignKind kind) {
    std::vector<Prediction> out;
    switch (kind) {
        case SignKind::Symbol:
            for (const auto& a : scene.symbols)
                out.push_back({a.box, kind, a.class_code, a.score});
            break;
        case SignKind::Text:
            for (const auto& t : scene.texts)
                out.push_back({t.box, kind, t.transcription, t.score});
            break;
        case SignKind::Panel:
            for (const auto& p : scene.panels)
                out.push_back({p.box, kind, std::to_string(p.panel_class), p.score});
            break;
    }
    return out;
}

} // namespace tsi
