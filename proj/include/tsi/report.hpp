#pragma once

#include <map>
#include <string>
#include <vector>

#include "tsi/detect_eval.hpp"
#include "tsi/scene.hpp"
#include "tsi/text_metrics.hpp"

namespace tsi {

struct DescriptionEntry {
    std::string image_id;
    int panel_id = -1;
    std::string text;
};

std::vector<DescriptionEntry> read_descriptions_file(const std::string& path);
std::string descriptions_to_jsonl(const std::vector<DescriptionEntry>& entries);

struct DetectionEvaluation {
    std::map<std::string, MatchOutcome> counts; // keyed "symbol"/"text"/"panel"
    std::map<std::string, PRF> scores;
};

struct RecognitionEvaluation {
    std::map<std::string, RecognitionResult> per_kind;
};

// Scenes pair by image_id; the two corpora must cover the same image set.
DetectionEvaluation evaluate_detection(const Corpus& gt, const Corpus& pred,
                                       double iou_threshold);
RecognitionEvaluation evaluate_recognition(const Corpus& gt, const Corpus& pred,
                                           double iou_threshold);

// Candidate descriptions pair with references by (image_id, panel_id); a
// missing side of a pair becomes the empty string, so dropped panels and
// spurious descriptions both cost score. Candidates naming an unknown
// image_id raise DataMismatchError.
MetricScores evaluate_interpretation(const Corpus& gt,
                                     const std::vector<DescriptionEntry>& candidates,
                                     const SlotRules& rules, TokenMode mode = TokenMode::Auto);

struct Provenance {
    std::string tool;
    std::map<std::string, std::pair<std::string, std::string>> inputs; // name -> (path, fnv64)
    std::map<std::string, std::string> options;
    std::string config_hash;
    std::string timestamp; // empty unless explicitly stamped

    void add_input(const std::string& name, const std::string& path);
    void add_option(const std::string& key, const std::string& value);
    void finalize_hash();
};

struct FullReport {
    bool has_detection = false;
    bool has_recognition = false;
    bool has_interpretation = false;
    DetectionEvaluation detection;
    RecognitionEvaluation recognition;
    MetricScores interpretation;
    Provenance provenance;
};

std::string report_to_json(const FullReport& report);
// Aligned-column tables in the style of the detection/recognition/metric
// tables this toolkit mirrors.
std::string report_to_text(const FullReport& report);

} // namespace tsi
