#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsi/scene.hpp"
#include "tsi/text_metrics.hpp"

namespace tsi {

// Everything the rule system needs to turn sign layouts into sentences:
// frame templates, the arrow action table, limit-symbol subjects/units, the
// panel-class -> frame map, and the slot rules used for frame extraction.
// All of it loads from JSON data files; builtin() returns the shipped packs.
struct FrameTemplate {
    std::string pattern;  // literal text, <slot> placeholders, [optional groups]
    std::string fallback; // used when a required slot has no filler
};

struct LimitInfo {
    std::string subject;
    std::string unit;
};

struct Grammar {
    std::string language = "en";
    std::map<std::string, FrameTemplate> frames;
    std::map<std::string, std::string> joiners;
    std::map<std::string, std::string> actions; // arrow class_code -> verb phrase
    std::map<std::string, LimitInfo> limits;    // limit class_code -> subject/unit
    std::string unit_separator = " ";
    std::map<int, std::string> panel_frames;
    std::map<char, std::string> orphan_frames;
    std::map<std::string, std::string> loose_text_slots;
    SlotRules slot_rules;
    std::map<std::string, std::string> symbol_vocab;
    std::map<int, std::string> panel_vocab;

    static Grammar builtin(const std::string& lang = "en");
    // Any path left empty falls back to the builtin pack for `lang`.
    static Grammar load(const std::string& lang, const std::string& templates_path,
                        const std::string& actions_path, const std::string& frames_path,
                        const std::string& slot_rules_path, const std::string& symbol_vocab_path,
                        const std::string& panel_vocab_path);
};

struct ClusterMember {
    enum class Kind { Symbol, Text };
    Kind kind = Kind::Text;
    int index = 0; // position in the scene's symbols[]/texts[] array
    QuadBox box;
    std::string value; // class_code or transcription
    Point2D center;

    std::string id() const {
        return (kind == Kind::Symbol ? "s" : "t") + std::to_string(index);
    }
};

// Signs grouped under one guide panel; orphans (outside every panel) form
// singleton clusters with no panel.
struct SignCluster {
    std::optional<PanelAnnotation> panel;
    std::vector<ClusterMember> members;
};

// Pairwise directions (8-way compass, E=0 counter-clockwise through SE=7) and
// distances normalized by the cluster's maximum pairwise center distance.
struct SpatialRelation {
    int from = 0;
    int to = 0;
    int direction = 0;
    double normalized_distance = 0.0;
};

struct SpatialDependence {
    std::vector<SpatialRelation> relations;
};

inline constexpr const char* kCompassNames[8] = {"E", "NE", "N", "NW", "W", "SW", "S", "SE"};

struct SemanticGraph {
    std::string frame_type;
    std::map<std::string, std::vector<std::string>> bindings; // slot -> fillers in order
    // provenance: which member produced which binding, plus arrow->text links
    std::vector<std::pair<std::string, std::string>> source_members; // (slot, member id)
    std::vector<std::string> unbound;                                // member ids with no rule
};

struct InterpretedDescription {
    std::string text;
    SyntaxFrame frame;
    int panel_id = -1; // -1 for orphan clusters
};

std::vector<SignCluster> cluster_signs(const SceneRecord& scene);
SpatialDependence spatial_dependence(const SignCluster& cluster);
// Row-major presentation order: rows grouped by >= 50% vertical-interval
// overlap of the shorter box, rows top-to-bottom, members left-to-right.
std::vector<int> reading_order(const SignCluster& cluster);
SemanticGraph assemble_semantics(const SignCluster& cluster, const SpatialDependence& dep,
                                 const Grammar& grammar);
InterpretedDescription generate_description(const SemanticGraph& graph,
                                            const SignCluster& cluster, const Grammar& grammar);

struct InterpretOutcome {
    std::vector<InterpretedDescription> descriptions;
    std::vector<std::string> diagnostics; // per-cluster failures, interpretation continues
};

InterpretOutcome interpret_scene(const SceneRecord& scene, const Grammar& grammar);

} // namespace tsi
