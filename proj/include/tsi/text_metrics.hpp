#pragma once

#include <map>
#include <regex>
#include <string>
#include <vector>

namespace tsi {

enum class TokenMode { Auto, CjkChar, Whitespace };

struct TokenSeq {
    std::vector<std::string> tokens;
    TokenMode mode = TokenMode::Whitespace;
};

// Whitespace mode splits on whitespace and detaches trailing punctuation into
// separate tokens; cjk-char mode emits each CJK ideograph on its own and
// groups contiguous Latin/digit runs. Auto picks cjk-char iff the text
// contains an ideograph.
TokenSeq tokenize(const std::string& text, TokenMode mode = TokenMode::Auto);

// Slot-elision rules driving syntax-frame extraction: token spans matching a
// lexicon entity or a regex rule collapse to SLOT:<name> markers.
struct SlotRules {
    struct RegexSlot {
        std::string pattern;
        std::string slot;
        std::regex compiled;
    };
    std::vector<RegexSlot> regex_slots;
    std::map<std::string, std::string> lexicon; // entity -> slot
    int max_span = 6;

    static SlotRules from_json(const std::string& json_text);
    std::string to_json() const;
};

// A description with slot fillers elided; the equality class Soft Accuracy
// scores against.
struct SyntaxFrame {
    std::vector<std::string> skeleton;
    bool operator==(const SyntaxFrame&) const = default;
};

SyntaxFrame extract_frame(const std::string& description, const SlotRules& rules,
                          TokenMode mode = TokenMode::Auto);

// Recall-oriented n-gram overlap (n in {1,2}): clipped matches / reference
// n-gram count. Both-empty scores 1, empty candidate against a non-empty
// reference scores 0.
double rouge_n(const TokenSeq& candidate, const TokenSeq& reference, int n);

// LCS F-measure with beta = 1.
double rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

// Corpus-level BLEU, uniform weights over n = 1..4, clipped modified
// precisions, brevity penalty, and a 1e-9 floor on zero-count precisions.
double bleu_4(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references);

// Fraction of pairs whose syntax frames match exactly; a frameless side scores
// that pair 0 without aborting the corpus.
double soft_accuracy(const std::vector<std::string>& candidates,
                     const std::vector<std::string>& references, const SlotRules& rules,
                     TokenMode mode = TokenMode::Auto);

struct MetricScores {
    double rouge1 = 0.0;
    double rouge2 = 0.0;
    double rougeL = 0.0;
    double bleu4 = 0.0;
    double soft_accuracy = 0.0;
};

// Full interpretation-metric sweep over paired corpora. ROUGE scores are
// per-pair averages; BLEU aggregates counts corpus-wide.
MetricScores evaluate_descriptions(const std::vector<std::string>& candidates,
                                   const std::vector<std::string>& references,
                                   const SlotRules& rules, TokenMode mode = TokenMode::Auto);

} // namespace tsi
