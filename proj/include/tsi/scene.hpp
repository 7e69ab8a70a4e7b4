#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsi/geometry.hpp"

namespace tsi {

// Symbol box naming follows the w/i/p/a + serial-number scheme ("a2", "w10").
struct SymbolAnnotation {
    QuadBox box;
    std::string class_code;
    bool ignored = false;
    double score = 1.0; // only meaningful in prediction files
    bool operator==(const SymbolAnnotation& o) const {
        return box == o.box && class_code == o.class_code && ignored == o.ignored;
    }
};

// Texts with unreadable strokes carry the "###" marker and ignored=true.
struct TextAnnotation {
    QuadBox box;
    std::string transcription;
    bool ignored = false;
    double score = 1.0;
    bool operator==(const TextAnnotation& o) const {
        return box == o.box && transcription == o.transcription && ignored == o.ignored;
    }
};

// Guide panels carry one of seven classes (prohibit, warning, normal road
// instruction, highway instruction, scenic area instruction, notice, dynamic
// prompt) and a scene-unique id.
struct PanelAnnotation {
    QuadBox box;
    int panel_class = 1;
    int panel_id = 0;
    double score = 1.0;
    bool operator==(const PanelAnnotation& o) const {
        return box == o.box && panel_class == o.panel_class && panel_id == o.panel_id;
    }
};

struct DescriptionAnnotation {
    int panel_id = 0;
    std::string text;
    bool operator==(const DescriptionAnnotation&) const = default;
};

struct SceneRecord {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<SymbolAnnotation> symbols;
    std::vector<TextAnnotation> texts;
    std::vector<PanelAnnotation> panels;
    std::vector<DescriptionAnnotation> descriptions;
    bool operator==(const SceneRecord&) const = default;
};

struct Corpus {
    std::vector<SceneRecord> scenes;
    std::map<std::string, std::string> symbol_vocab; // class_code -> display name
    std::map<int, std::string> panel_vocab;          // panel_class -> display name
};

struct Violation {
    std::string entity; // e.g. "texts[2]"
    std::string rule;   // e.g. "box outside image"
    std::string message;
};

// One JSON line -> SceneRecord. Structural problems throw ParseError (bad
// JSON) or ValidationError (wrong type / panel_class out of range); semantic
// rule checks are left to validate_scene. Unknown keys are reported through
// *warnings and otherwise ignored.
SceneRecord parse_scene(const std::string& line, std::vector<std::string>* warnings = nullptr);

// Canonical one-line form: fixed key order, coordinates with 6 decimal places,
// non-ASCII escaped. parse_scene(serialize_scene(s)) == s for scenes on the
// 1e-6 coordinate lattice. with_scores adds the per-entry "score" key used by
// prediction files.
std::string serialize_scene(const SceneRecord& scene, bool with_scores = false);

std::vector<Violation> validate_scene(const SceneRecord& scene);
// Scene checks plus vocabulary coverage; an empty vocab map means "not
// provided" and skips that coverage check.
std::vector<Violation> validate_corpus(const Corpus& corpus);

struct CategoryHistogram {
    std::map<std::string, std::int64_t> symbol_counts; // per class_code
    std::map<int, std::int64_t> panel_counts;          // per panel_class
    std::int64_t scene_count = 0;
    std::int64_t text_count = 0;         // non-ignored
    std::int64_t ignored_text_count = 0;
    std::int64_t char_count = 0;         // code points over non-ignored texts
    std::int64_t description_count = 0;
    double mean_symbol_area = 0.0;
    double mean_text_area = 0.0;
    double mean_panel_area = 0.0;
};

CategoryHistogram corpus_stats(const Corpus& corpus);

struct SplitResult {
    Corpus train;
    Corpus test;
    std::vector<std::string> warnings; // categories for which tolerance was unachievable
};

// Disjoint, exhaustive, deterministic split with |test| = round(f*N), stratified
// over panel_class so per-class relative frequencies of the halves stay within
// `tolerance` whenever the data allows it.
SplitResult split_corpus(const Corpus& corpus, double test_fraction, std::uint64_t seed,
                         double tolerance = 0.05);

// --- file io ---------------------------------------------------------------

// JSON Lines corpus. Parse failures are rethrown with the 1-based line number.
Corpus read_corpus(const std::string& path, std::vector<std::string>* warnings = nullptr);
void write_corpus_file(const std::string& path, const Corpus& corpus, bool with_scores = false);

std::map<std::string, std::string> read_symbol_vocab(const std::string& path);
std::map<int, std::string> read_panel_vocab(const std::string& path);
void write_symbol_vocab(const std::string& path, const std::map<std::string, std::string>& vocab);
void write_panel_vocab(const std::string& path, const std::map<int, std::string>& vocab);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace tsi
