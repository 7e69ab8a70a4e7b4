#include "tsi/text_metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "tsi/errors.hpp"
#include "tsi/util.hpp"

using nlohmann::json;

namespace tsi {

namespace {

bool is_ws(char32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
           cp == 0x3000 || cp == 0xA0;
}

// Trailing punctuation split off in whitespace mode; also emitted as single
// tokens in cjk-char mode.
bool is_punct(char32_t cp) {
    switch (cp) {
        case '.': case ',': case ';': case ':': case '!': case '?':
        case ')': case '(': case ']': case '[': case '}': case '{':
        case '"':
        case 0xFF0C: // fullwidth comma
        case 0x3002: // ideographic full stop
        case 0xFF01: case 0xFF1F: case 0xFF1B: case 0xFF1A:
        case 0x3001: // ideographic comma
        case 0xFF08: case 0xFF09:
            return true;
        default:
            return false;
    }
}

bool is_run_char(char32_t cp) {
    return (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z') ||
           cp == '.' || cp == '/' || cp == '\'' || cp == '-';
}

TokenMode resolve_mode(const std::vector<char32_t>& cps, TokenMode mode) {
    if (mode != TokenMode::Auto) return mode;
    for (char32_t cp : cps)
        if (is_cjk_ideograph(cp)) return TokenMode::CjkChar;
    return TokenMode::Whitespace;
}

bool is_separator_token(const std::string& tok) {
    return tok == "," || tok == "，" || tok == "、";
}

} // namespace

TokenSeq tokenize(const std::string& text, TokenMode mode) {
    std::vector<char32_t> cps = utf8_decode(text);
    TokenMode resolved = resolve_mode(cps, mode);
    TokenSeq out;
    out.mode = resolved;

    if (resolved == TokenMode::Whitespace) {
        std::size_t i = 0;
        while (i < cps.size()) {
            while (i < cps.size() && is_ws(cps[i])) ++i;
            if (i >= cps.size()) break;
            std::size_t j = i;
            while (j < cps.size() && !is_ws(cps[j])) ++j;
            std::vector<char32_t> word(cps.begin() + i, cps.begin() + j);
            // peel trailing punctuation, preserving its order
            std::size_t end = word.size();
            while (end > 0 && is_punct(word[end - 1])) --end;
            if (end > 0) out.tokens.push_back(utf8_encode({word.begin(), word.begin() + end}));
            for (std::size_t k = end; k < word.size(); ++k)
                out.tokens.push_back(utf8_encode_one(word[k]));
            i = j;
        }
    } else {
        std::vector<char32_t> run;
        auto flush = [&]() {
            if (!run.empty()) {
                out.tokens.push_back(utf8_encode(run));
                run.clear();
            }
        };
        for (char32_t cp : cps) {
            if (is_cjk_ideograph(cp)) {
                flush();
                out.tokens.push_back(utf8_encode_one(cp));
            } else if (is_run_char(cp)) {
                run.push_back(cp);
            } else if (is_ws(cp)) {
                flush();
            } else {
                flush();
                out.tokens.push_back(utf8_encode_one(cp));
            }
        }
        flush();
    }
    return out;
}

SlotRules SlotRules::from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError("slot rules: " + std::string(e.what()), e.byte);
    }
    SlotRules rules;
    try {
        if (j.contains("regex_slots")) {
            for (const json& r : j["regex_slots"]) {
                RegexSlot rs;
                rs.pattern = r.at("pattern").get<std::string>();
                rs.slot = r.at("slot").get<std::string>();
                try {
                    rs.compiled = std::regex(rs.pattern);
                } catch (const std::regex_error& e) {
                    throw ConfigError("slot rules: bad pattern '" + rs.pattern + "': " + e.what());
                }
                rules.regex_slots.push_back(std::move(rs));
            }
        }
        if (j.contains("lexicon")) {
            for (auto it = j["lexicon"].begin(); it != j["lexicon"].end(); ++it)
                rules.lexicon[it.key()] = it.value().get<std::string>();
        }
        if (j.contains("max_span")) rules.max_span = j["max_span"].get<int>();
    } catch (const Error&) {
        throw;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("slot rules: ") + e.what());
    }
    return rules;
}

std::string SlotRules::to_json() const {
    json j;
    j["schema_version"] = 1;
    j["regex_slots"] = json::array();
    for (const auto& r : regex_slots)
        j["regex_slots"].push_back({{"pattern", r.pattern}, {"slot", r.slot}});
    j["lexicon"] = json::object();
    for (const auto& [k, v] : lexicon) j["lexicon"][k] = v;
    j["max_span"] = max_span;
    return j.dump();
}

SyntaxFrame extract_frame(const std::string& description, const SlotRules& rules,
                          TokenMode mode) {
    TokenSeq seq = tokenize(description, mode);
    const std::string joiner = seq.mode == TokenMode::CjkChar ? "" : " ";
    const std::size_t n = seq.tokens.size();

    std::vector<std::string> marked;
    std::size_t i = 0;
    while (i < n) {
        std::string matched_slot;
        std::size_t matched_len = 0;
        std::size_t max_len = std::min<std::size_t>(static_cast<std::size_t>(rules.max_span), n - i);
        for (std::size_t len = max_len; len >= 1 && matched_len == 0; --len) {
            std::string span = seq.tokens[i];
            for (std::size_t k = 1; k < len; ++k) span += joiner + seq.tokens[i + k];
            auto it = rules.lexicon.find(span);
            if (it != rules.lexicon.end()) {
                matched_slot = it->second;
                matched_len = len;
                break;
            }
            for (const auto& r : rules.regex_slots) {
                if (std::regex_match(span, r.compiled)) {
                    matched_slot = r.slot;
                    matched_len = len;
                    break;
                }
            }
        }
        if (matched_len > 0) {
            marked.push_back("SLOT:" + matched_slot);
            i += matched_len;
        } else {
            marked.push_back(seq.tokens[i]);
            ++i;
        }
    }

    // collapse comma-separated runs of one slot into a single marker
    SyntaxFrame frame;
    bool has_literal = false;
    for (const std::string& tok : marked) {
        bool is_marker = tok.rfind("SLOT:", 0) == 0;
        if (is_marker) {
            if (!frame.skeleton.empty() && frame.skeleton.back() == tok) continue;
            if (frame.skeleton.size() >= 2 && is_separator_token(frame.skeleton.back()) &&
                frame.skeleton[frame.skeleton.size() - 2] == tok) {
                frame.skeleton.pop_back();
                continue;
            }
        } else {
            has_literal = true;
        }
        frame.skeleton.push_back(tok);
    }
    if (frame.skeleton.empty() || !has_literal)
        throw Error("frameless description: every token was a slot filler");
    return frame;
}

namespace {

using NgramCounts = std::unordered_map<std::string, int>;

NgramCounts count_ngrams(const std::vector<std::string>& toks, int n) {
    NgramCounts counts;
    if (static_cast<int>(toks.size()) < n) return counts;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        std::string key = toks[i];
        for (int k = 1; k < n; ++k) {
            key += '\x1f';
            key += toks[i + k];
        }
        ++counts[key];
    }
    return counts;
}

std::int64_t total_ngrams(std::size_t len, int n) {
    return len + 1 >= static_cast<std::size_t>(n)
               ? static_cast<std::int64_t>(len) - n + 1
               : 0;
}

std::int64_t clipped_overlap(const NgramCounts& cand, const NgramCounts& ref) {
    std::int64_t overlap = 0;
    for (const auto& [gram, c] : cand) {
        auto it = ref.find(gram);
        if (it != ref.end()) overlap += std::min(c, it->second);
    }
    return overlap;
}

} // namespace

double rouge_n(const TokenSeq& candidate, const TokenSeq& reference, int n) {
    if (n != 1 && n != 2) throw ConfigError("rouge_n: n must be 1 or 2");
    std::int64_t ref_total = total_ngrams(reference.tokens.size(), n);
    std::int64_t cand_total = total_ngrams(candidate.tokens.size(), n);
    if (ref_total == 0) return cand_total == 0 ? 1.0 : 0.0;
    if (cand_total == 0) return 0.0;
    auto ref_counts = count_ngrams(reference.tokens, n);
    auto cand_counts = count_ngrams(candidate.tokens, n);
    return static_cast<double>(clipped_overlap(cand_counts, ref_counts)) /
           static_cast<double>(ref_total);
}

double rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
    const auto& c = candidate.tokens;
    const auto& r = reference.tokens;
    if (c.empty() && r.empty()) return 1.0;
    if (c.empty() || r.empty()) return 0.0;
    std::vector<std::int64_t> prev(r.size() + 1, 0), cur(r.size() + 1, 0);
    for (std::size_t i = 1; i <= c.size(); ++i) {
        for (std::size_t j = 1; j <= r.size(); ++j) {
            if (c[i - 1] == r[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    double lcs = static_cast<double>(prev[r.size()]);
    double recall = lcs / static_cast<double>(r.size());
    double precision = lcs / static_cast<double>(c.size());
    if (recall + precision <= 0.0) return 0.0;
    return 2.0 * recall * precision / (recall + precision);
}

double bleu_4(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references) {
    if (candidates.size() != references.size() || candidates.empty())
        throw ConfigError("bleu_4: candidate/reference lists must have equal nonzero length");

    std::array<std::int64_t, 4> matches{}, totals{};
    std::int64_t cand_len = 0, ref_len = 0;
    for (std::size_t p = 0; p < candidates.size(); ++p) {
        const auto& c = candidates[p].tokens;
        const auto& r = references[p].tokens;
        cand_len += static_cast<std::int64_t>(c.size());
        ref_len += static_cast<std::int64_t>(r.size());
        for (int n = 1; n <= 4; ++n) {
            totals[n - 1] += total_ngrams(c.size(), n);
            if (total_ngrams(c.size(), n) > 0 && total_ngrams(r.size(), n) > 0)
                matches[n - 1] += clipped_overlap(count_ngrams(c, n), count_ngrams(r, n));
        }
    }
    if (cand_len == 0) return 0.0;

    double log_precision = 0.0;
    for (int n = 0; n < 4; ++n) {
        double p;
        if (totals[n] == 0)
            p = 1.0; // vacuous order: no candidate n-grams of this length exist
        else
            p = std::max(static_cast<double>(matches[n]) / static_cast<double>(totals[n]), 1e-9);
        log_precision += std::log(p);
    }
    double bp = cand_len < ref_len
                    ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len))
                    : 1.0;
    return bp * std::exp(log_precision / 4.0);
}

double soft_accuracy(const std::vector<std::string>& candidates,
                     const std::vector<std::string>& references, const SlotRules& rules,
                     TokenMode mode) {
    if (candidates.size() != references.size())
        throw ConfigError("soft_accuracy: candidate/reference lists must have equal length");
    if (candidates.empty()) return 1.0;
    std::int64_t hits = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        try {
            if (extract_frame(candidates[i], rules, mode) ==
                extract_frame(references[i], rules, mode))
                ++hits;
        } catch (const Error&) {
            // frameless side: pair scores 0
        }
    }
    return static_cast<double>(hits) / static_cast<double>(candidates.size());
}

MetricScores evaluate_descriptions(const std::vector<std::string>& candidates,
                                   const std::vector<std::string>& references,
                                   const SlotRules& rules, TokenMode mode) {
    if (candidates.size() != references.size())
        throw ConfigError("evaluate_descriptions: list length mismatch");
    MetricScores scores;
    if (candidates.empty()) {
        scores = {1.0, 1.0, 1.0, 1.0, 1.0};
        return scores;
    }
    std::vector<TokenSeq> cand_toks, ref_toks;
    cand_toks.reserve(candidates.size());
    ref_toks.reserve(references.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        // one pair, one tokenizer: an ideograph on either side selects cjk-char
        TokenMode pair_mode = mode;
        if (mode == TokenMode::Auto) {
            pair_mode = tokenize(references[i] + candidates[i], TokenMode::Auto).mode;
        }
        cand_toks.push_back(tokenize(candidates[i], pair_mode));
        ref_toks.push_back(tokenize(references[i], pair_mode));
    }
    double r1 = 0.0, r2 = 0.0, rl = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        r1 += rouge_n(cand_toks[i], ref_toks[i], 1);
        r2 += rouge_n(cand_toks[i], ref_toks[i], 2);
        rl += rouge_l(cand_toks[i], ref_toks[i]);
    }
    const double n = static_cast<double>(candidates.size());
    scores.rouge1 = r1 / n;
    scores.rouge2 = r2 / n;
    scores.rougeL = rl / n;
    scores.bleu4 = bleu_4(cand_toks, ref_toks);
    scores.soft_accuracy = soft_accuracy(candidates, references, rules, mode);
    return scores;
}

} // namespace tsi
