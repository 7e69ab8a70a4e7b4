#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tsi/geometry.hpp"
#include "tsi/scene.hpp"

namespace tsi {

enum class SignKind { Symbol, Text, Panel };

const char* kind_name(SignKind kind);

struct GroundTruthBox {
    QuadBox box;
    std::string label; // class_code / transcription / panel_class as string
    bool ignored = false;
};

struct Prediction {
    QuadBox box;
    SignKind kind = SignKind::Symbol;
    std::string label;
    double score = 1.0;
};

struct MatchOutcome {
    struct Pair {
        int gt_index;
        int pred_index;
        double iou;
    };
    std::vector<Pair> pairs; // accepted matches against non-ignored GT
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t ignored_matches = 0;

    void accumulate(const MatchOutcome& other);
};

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
};

// One-to-one greedy matching over descending IoU with deterministic
// (gt index, pred index) tie-breaks. Predictions whose only qualifying overlap
// is an ignored GT box are discarded rather than counted as FP; ignored GT
// never counts as FN.
MatchOutcome match_detections(std::span<const GroundTruthBox> gt,
                              std::span<const Prediction> pred, double iou_threshold);

// p = tp/(tp+fp), r = tp/(tp+fn), f harmonic mean. With neither predictions
// nor targets all three are 1; other 0/0 cases resolve to 0.
PRF prf(const MatchOutcome& outcome);

struct ClassAccuracy {
    std::int64_t correct = 0;
    std::int64_t total = 0;
    double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

// Character classes for the text table: Arabic numerals (N), Chinese (C),
// English letters (E), everything else under "other".
std::string char_class_of(char32_t cp);

struct RecognitionResult {
    std::map<std::string, ClassAccuracy> per_class; // symbols/panels: per label
    ClassAccuracy overall;                          // instance level (texts: exact match)
    // text kind only: per character class over minimal-edit-script alignment
    std::map<std::string, ClassAccuracy> char_classes;
    ClassAccuracy char_overall;

    void accumulate(const RecognitionResult& other);
};

// Category-aware accuracy among box-matched pairs; denominators count every
// non-ignored GT instance, so unmatched GT weighs against accuracy.
RecognitionResult recognition_accuracy(std::span<const GroundTruthBox> gt,
                                       std::span<const Prediction> pred, SignKind kind,
                                       double iou_threshold);

// -log(prob[target]), probability floored at 1e-12. Probabilities must sum to
// 1 within 1e-6; an out-of-range index throws.
double cross_entropy(std::span<const double> prob, std::size_t target_index);

// Whitespace-trimmed, lightly NFC-normalized equality used for transcriptions.
std::string normalize_text(const std::string& text);

// Scene adapters.
std::vector<GroundTruthBox> gt_boxes_of_kind(const SceneRecord& scene, SignKind kind);
std::vector<Prediction> predictions_of_kind(const SceneRecord& scene, SignKind kind);

// Minimal edit-script alignment (match/substitute/delete/insert); returns
// aligned index pairs (gi, pi) for matches and substitutions.
std::vector<std::pair<int, int>> align_edit_script(const std::vector<char32_t>& gt,
                                                   const std::vector<char32_t>& pred);

} // namespace tsi
