#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsi/interpreter.hpp"
#include "tsi/scene.hpp"

namespace tsi {

// Content vocabulary the generator draws from; entries must agree with the
// slot-rule lexicon so generated descriptions stay frame-extractable.
struct GenVocab {
    std::vector<std::string> destinations;
    std::vector<std::string> scenic;
    std::vector<std::string> vehicles;
    std::vector<std::string> notices;
    std::vector<std::string> dynamics;

    static GenVocab builtin(const std::string& lang = "en");
    static GenVocab from_json(const std::string& json_text);
};

struct GeneratorConfig {
    int n_scenes = 100;
    std::uint64_t seed = 0;
    int width = 3840;
    int height = 2160;
    int panels_min = 1;
    int panels_max = 3;
    int members_min = 2;
    int members_max = 6;
    std::string lang = "en";
    double ignored_text_rate = 0.08; // chance of an extra "###" text per panel
    double extra_symbol_rate = 0.2;  // chance of an informational symbol in guidance panels
    double empty_panel_rate = 0.04;  // chance a panel carries no members
    double zipf_s = 1.2;             // category skew
};

// Hidden ground truth the generator records for oracle-style tests: per-panel
// membership and grid (reading) order, as member ids "s<i>"/"t<i>".
struct ClusterOracle {
    struct Entry {
        int panel_id;
        std::vector<std::string> members; // grid order
    };
    std::string image_id;
    std::vector<Entry> clusters;
};

struct GeneratedScene {
    SceneRecord scene;
    ClusterOracle oracle;
};

// Deterministic for fixed (config, scene_seed); the scene's descriptions are
// produced by running the interpreter on the clean annotations.
GeneratedScene generate_scene(const GeneratorConfig& config, std::uint64_t scene_seed,
                              const Grammar& grammar, const GenVocab& vocab, int scene_index);

struct GeneratedCorpus {
    Corpus corpus;
    std::vector<ClusterOracle> oracles;
    std::vector<std::string> warnings;
};

// Scene i uses mix_seed(config.seed, i); output is identical for any worker
// count. workers <= 0 means one thread.
GeneratedCorpus generate_corpus(const GeneratorConfig& config, int workers = 1);

// Detector/recognizer error injection, applied in the fixed order
// drop -> jitter -> confuse -> substitute -> insert.
struct NoiseProfile {
    double drop_rate = 0.0;           // per-sign omission probability
    double spurious_rate = 0.0;       // expected spurious boxes per scene
    double jitter_sigma = 0.0;        // Gaussian corner noise, pixels
    double class_confusion_rate = 0.0; // symbol/panel label flip probability
    double char_sub_rate = 0.0;       // per-character substitution probability

    static NoiseProfile from_json(const std::string& json_text);
    std::string to_json() const;
};

struct PerturbationLog {
    std::string image_id;
    std::vector<std::string> dropped;  // member ids incl. panels "p<i>"
    std::vector<std::string> jittered; // ids whose boxes moved
    struct Flip {
        std::string id, from, to;
    };
    std::vector<Flip> label_flips;
    std::vector<Flip> char_edits; // texts: from/to transcription
    struct Spurious {
        std::string kind, label;
    };
    std::vector<Spurious> spurious;

    std::string to_json_line() const;
};

struct PerturbResult {
    SceneRecord predictions; // same record shape, scores filled
    PerturbationLog log;
};

PerturbResult perturb_predictions(const SceneRecord& scene, const NoiseProfile& profile,
                                  std::uint64_t seed);

} // namespace tsi
