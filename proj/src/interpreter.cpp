#include "tsi/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>

#include <json.hpp>

#include "tsi/embedded_data.hpp"
#include "tsi/errors.hpp"
#include "tsi/util.hpp"

using nlohmann::json;

namespace tsi {

namespace {

Grammar parse_grammar_inner(const std::string& lang, const std::string& templates_json,
                            const std::string& actions_json, const std::string& frames_json,
                            const std::string& slot_rules_json,
                            const std::string& symbol_vocab_json,
                            const std::string& panel_vocab_json) {
    Grammar g;
    g.language = lang;
    json jt = json::parse(templates_json);
    for (auto it = jt.at("frames").begin(); it != jt.at("frames").end(); ++it)
        g.frames[it.key()] = FrameTemplate{it.value().at("template").get<std::string>(),
                                           it.value().at("fallback").get<std::string>()};
    if (jt.contains("joiners"))
        for (auto it = jt["joiners"].begin(); it != jt["joiners"].end(); ++it)
            g.joiners[it.key()] = it.value().get<std::string>();

    json ja = json::parse(actions_json);
    for (auto it = ja.at("actions").begin(); it != ja.at("actions").end(); ++it)
        g.actions[it.key()] = it.value().get<std::string>();
    if (ja.contains("limits"))
        for (auto it = ja["limits"].begin(); it != ja["limits"].end(); ++it)
            g.limits[it.key()] = LimitInfo{it.value().at("subject").get<std::string>(),
                                           it.value().at("unit").get<std::string>()};
    g.unit_separator = ja.value("unit_separator", std::string(" "));

    json jf = json::parse(frames_json);
    for (auto it = jf.at("panel_frames").begin(); it != jf.at("panel_frames").end(); ++it)
        g.panel_frames[std::stoi(it.key())] = it.value().get<std::string>();
    for (auto it = jf.at("orphan_frames").begin(); it != jf.at("orphan_frames").end(); ++it)
        g.orphan_frames[it.key()[0]] = it.value().get<std::string>();
    for (auto it = jf.at("loose_text_slots").begin(); it != jf.at("loose_text_slots").end(); ++it)
        g.loose_text_slots[it.key()] = it.value().get<std::string>();

    g.slot_rules = SlotRules::from_json(slot_rules_json);

    json js = json::parse(symbol_vocab_json);
    for (auto it = js.begin(); it != js.end(); ++it)
        g.symbol_vocab[it.key()] = it.value().get<std::string>();
    json jp = json::parse(panel_vocab_json);
    for (auto it = jp.begin(); it != jp.end(); ++it)
        g.panel_vocab[std::stoi(it.key())] = it.value().get<std::string>();
    return g;
}

Grammar parse_grammar(const std::string& lang, const std::string& templates_json,
                      const std::string& actions_json, const std::string& frames_json,
                      const std::string& slot_rules_json, const std::string& symbol_vocab_json,
                      const std::string& panel_vocab_json) {
    try {
        return parse_grammar_inner(lang, templates_json, actions_json, frames_json,
                                   slot_rules_json, symbol_vocab_json, panel_vocab_json);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw ValidationError(std::string("grammar data: ") + e.what());
    }
}

} // namespace

Grammar Grammar::builtin(const std::string& lang) {
    if (lang == "en")
        return parse_grammar("en", std::string(embedded::k_templates_en_json),
                             std::string(embedded::k_actions_en_json),
                             std::string(embedded::k_frames_json),
                             std::string(embedded::k_slot_rules_en_json),
                             std::string(embedded::k_symbol_vocab_en_json),
                             std::string(embedded::k_panel_vocab_en_json));
    if (lang == "zh")
        return parse_grammar("zh", std::string(embedded::k_templates_zh_json),
                             std::string(embedded::k_actions_zh_json),
                             std::string(embedded::k_frames_json),
                             std::string(embedded::k_slot_rules_zh_json),
                             std::string(embedded::k_symbol_vocab_zh_json),
                             std::string(embedded::k_panel_vocab_zh_json));
    throw ConfigError("unknown language pack: " + lang);
}

Grammar Grammar::load(const std::string& lang, const std::string& templates_path,
                      const std::string& actions_path, const std::string& frames_path,
                      const std::string& slot_rules_path, const std::string& symbol_vocab_path,
                      const std::string& panel_vocab_path) {
    if (lang != "en" && lang != "zh") throw ConfigError("unknown language pack: " + lang);
    auto text_or = [](const std::string& path, std::string_view fallback) {
        return path.empty() ? std::string(fallback) : read_text_file(path);
    };
    const bool zh = lang == "zh";
    return parse_grammar(
        lang,
        text_or(templates_path, zh ? embedded::k_templates_zh_json : embedded::k_templates_en_json),
        text_or(actions_path, zh ? embedded::k_actions_zh_json : embedded::k_actions_en_json),
        text_or(frames_path, embedded::k_frames_json),
        text_or(slot_rules_path,
                zh ? embedded::k_slot_rules_zh_json : embedded::k_slot_rules_en_json),
        text_or(symbol_vocab_path,
                zh ? embedded::k_symbol_vocab_zh_json : embedded::k_symbol_vocab_en_json),
        text_or(panel_vocab_path,
                zh ? embedded::k_panel_vocab_zh_json : embedded::k_panel_vocab_en_json));
}

// --- clustering -------------------------------------------------------------

std::vector<SignCluster> cluster_signs(const SceneRecord& scene) {
    struct PanelRef {
        const PanelAnnotation* panel;
        Polygon poly;
        double area;
        Point2D center;
    };
    std::vector<PanelRef> panels;
    panels.reserve(scene.panels.size());
    for (const auto& p : scene.panels) {
        Polygon poly = p.box.polygon();
        panels.push_back({&p, poly, polygon_area(poly), polygon_centroid(poly)});
    }

    // panel reading order: top-to-bottom then left-to-right by center
    std::vector<int> panel_order(panels.size());
    for (std::size_t i = 0; i < panels.size(); ++i) panel_order[i] = static_cast<int>(i);
    std::sort(panel_order.begin(), panel_order.end(), [&](int a, int b) {
        if (panels[a].center.y != panels[b].center.y) return panels[a].center.y < panels[b].center.y;
        if (panels[a].center.x != panels[b].center.x) return panels[a].center.x < panels[b].center.x;
        return panels[a].panel->panel_id < panels[b].panel->panel_id;
    });

    std::vector<std::vector<ClusterMember>> panel_members(panels.size());
    std::vector<ClusterMember> orphans;

    auto assign = [&](ClusterMember member) {
        int best = -1;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            if (!point_in_polygon(panels[i].poly, member.center)) continue;
            if (best < 0 || panels[i].area < panels[best].area ||
                (panels[i].area == panels[best].area &&
                 panels[i].panel->panel_id < panels[best].panel->panel_id))
                best = static_cast<int>(i);
        }
        if (best >= 0)
            panel_members[best].push_back(std::move(member));
        else
            orphans.push_back(std::move(member));
    };

    for (int i = 0; i < static_cast<int>(scene.symbols.size()); ++i) {
        const auto& a = scene.symbols[i];
        if (a.ignored) continue;
        assign({ClusterMember::Kind::Symbol, i, a.box, a.class_code, box_center(a.box)});
    }
    for (int i = 0; i < static_cast<int>(scene.texts.size()); ++i) {
        const auto& t = scene.texts[i];
        if (t.ignored) continue;
        assign({ClusterMember::Kind::Text, i, t.box, t.transcription, box_center(t.box)});
    }

    std::vector<SignCluster> clusters;
    for (int idx : panel_order)
        clusters.push_back({*panels[idx].panel, std::move(panel_members[idx])});

    std::sort(orphans.begin(), orphans.end(), [](const ClusterMember& a, const ClusterMember& b) {
        if (a.center.y != b.center.y) return a.center.y < b.center.y;
        if (a.center.x != b.center.x) return a.center.x < b.center.x;
        return a.id() < b.id();
    });
    for (auto& m : orphans) clusters.push_back({std::nullopt, {std::move(m)}});
    return clusters;
}

// --- spatial dependence ------------------------------------------------------

namespace {

int compass_bin(Point2D from, Point2D to) {
    // screen y grows downward; flip it so N means up
    double deg = std::atan2(-(to.y - from.y), to.x - from.x) * 180.0 / 3.14159265358979323846;
    double shifted = deg + 22.5;
    int k = static_cast<int>(std::floor(shifted / 45.0));
    return ((k % 8) + 8) % 8;
}

double center_distance(const ClusterMember& a, const ClusterMember& b) {
    return std::hypot(a.center.x - b.center.x, a.center.y - b.center.y);
}

} // namespace

SpatialDependence spatial_dependence(const SignCluster& cluster) {
    SpatialDependence dep;
    const auto& m = cluster.members;
    if (m.size() < 2) return dep;
    double maxd = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j)
            maxd = std::max(maxd, center_distance(m[i], m[j]));
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (i == j) continue;
            double d = center_distance(m[i], m[j]);
            dep.relations.push_back({static_cast<int>(i), static_cast<int>(j),
                                     compass_bin(m[i].center, m[j].center),
                                     maxd > 0.0 ? d / maxd : 0.0});
        }
    }
    return dep;
}

// --- reading order ----------------------------------------------------------

std::vector<int> reading_order(const SignCluster& cluster) {
    const auto& members = cluster.members;
    struct Extent {
        int index;
        double y0, y1, cx, cy;
    };
    std::vector<Extent> items;
    items.reserve(members.size());
    for (int i = 0; i < static_cast<int>(members.size()); ++i) {
        double y0 = members[i].box.corners[0].y, y1 = y0;
        for (const auto& c : members[i].box.corners) {
            y0 = std::min(y0, c.y);
            y1 = std::max(y1, c.y);
        }
        items.push_back({i, y0, y1, members[i].center.x, members[i].center.y});
    }
    std::sort(items.begin(), items.end(), [](const Extent& a, const Extent& b) {
        if (a.cy != b.cy) return a.cy < b.cy;
        if (a.cx != b.cx) return a.cx < b.cx;
        return a.index < b.index;
    });

    struct Row {
        double y0, y1; // anchor interval from the first member
        std::vector<int> items; // indexes into `items`
    };
    std::vector<Row> rows;
    for (std::size_t k = 0; k < items.size(); ++k) {
        const Extent& e = items[k];
        bool placed = false;
        for (Row& row : rows) {
            double overlap = std::min(e.y1, row.y1) - std::max(e.y0, row.y0);
            double shorter = std::min(e.y1 - e.y0, row.y1 - row.y0);
            if (overlap >= 0.5 * shorter) {
                row.items.push_back(static_cast<int>(k));
                placed = true;
                break;
            }
        }
        if (!placed) rows.push_back({e.y0, e.y1, {static_cast<int>(k)}});
    }
    std::vector<int> order;
    order.reserve(members.size());
    for (Row& row : rows) {
        std::sort(row.items.begin(), row.items.end(), [&](int a, int b) {
            if (items[a].cx != items[b].cx) return items[a].cx < items[b].cx;
            return items[a].index < items[b].index;
        });
        for (int k : row.items) order.push_back(items[k].index);
    }
    return order;
}

// --- semantics --------------------------------------------------------------

namespace {

const std::regex kRouteRegex("^[GS][0-9]+$");
const std::regex kNumericRegex("^[0-9]+(\\.[0-9]+)?$");

bool is_symbol(const ClusterMember& m) { return m.kind == ClusterMember::Kind::Symbol; }
bool is_text(const ClusterMember& m) { return m.kind == ClusterMember::Kind::Text; }

// nearest counterpart via the dependence relations; ties resolved by reading
// order position of the counterpart
int nearest_by_relation(const SpatialDependence& dep, int from,
                        const std::vector<int>& rank_of,
                        const std::vector<bool>& candidate_ok) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& r : dep.relations) {
        if (r.from != from) continue;
        if (!candidate_ok[r.to]) continue;
        if (r.normalized_distance < best_d ||
            (r.normalized_distance == best_d && best >= 0 && rank_of[r.to] < rank_of[best])) {
            best_d = r.normalized_distance;
            best = r.to;
        }
    }
    return best;
}

} // namespace

SemanticGraph assemble_semantics(const SignCluster& cluster, const SpatialDependence& dep,
                                 const Grammar& grammar) {
    SemanticGraph graph;
    const auto& members = cluster.members;

    bool has_symbol = std::any_of(members.begin(), members.end(),
                                  [](const ClusterMember& m) { return is_symbol(m); });
    if (cluster.panel) {
        auto it = grammar.panel_frames.find(cluster.panel->panel_class);
        if (it == grammar.panel_frames.end())
            throw ConfigError("no frame mapped for panel_class " +
                              std::to_string(cluster.panel->panel_class));
        graph.frame_type = it->second;
    } else if (has_symbol) {
        char letter = 0;
        for (const auto& m : members)
            if (is_symbol(m) && !m.value.empty()) {
                letter = m.value[0];
                break;
            }
        auto it = grammar.orphan_frames.find(letter);
        if (it == grammar.orphan_frames.end())
            throw Error(std::string("no orphan frame for symbol letter '") + letter + "'");
        graph.frame_type = it->second;
    } else {
        throw Error("cluster has neither panel nor symbol; cannot pick a frame");
    }

    const std::vector<int> order = reading_order(cluster);
    std::vector<int> rank_of(members.size(), 0);
    for (std::size_t r = 0; r < order.size(); ++r) rank_of[order[r]] = static_cast<int>(r);
    std::vector<bool> bound(members.size(), false);

    auto bind = [&](const std::string& slot, const std::string& filler, int member_idx) {
        graph.bindings[slot].push_back(filler);
        graph.source_members.emplace_back(slot, members[member_idx].id());
        bound[member_idx] = true;
    };

    // 1. route-code texts
    for (int idx : order)
        if (is_text(members[idx]) && std::regex_match(members[idx].value, kRouteRegex))
            bind("route", members[idx].value, idx);

    // 2. arrow symbols carry the action; each records its nearest
    //    same-row-or-below destination text as provenance
    for (int idx : order) {
        const auto& m = members[idx];
        if (!is_symbol(m) || m.value.empty() || m.value[0] != 'a') continue;
        auto it = grammar.actions.find(m.value);
        if (it == grammar.actions.end()) continue; // unmapped arrow stays unbound
        bind("action", it->second, idx);
        std::vector<bool> dest_candidates(members.size(), false);
        for (const auto& r : dep.relations) {
            if (r.from != idx || !is_text(members[r.to]) || bound[r.to]) continue;
            // same row (E/W) or below (SE/S/SW)
            if (r.direction == 0 || r.direction == 4 || r.direction == 5 || r.direction == 6 ||
                r.direction == 7)
                dest_candidates[r.to] = true;
        }
        int attached = nearest_by_relation(dep, idx, rank_of, dest_candidates);
        if (attached >= 0)
            graph.source_members.emplace_back("action->dest", members[attached].id());
    }

    // 3. numeric texts bind to the nearest limit symbol as quantity + unit
    for (int idx : order) {
        const auto& m = members[idx];
        if (!is_text(m) || bound[idx] || !std::regex_match(m.value, kNumericRegex)) continue;
        std::vector<bool> limit_ok(members.size(), false);
        bool any = false;
        for (std::size_t j = 0; j < members.size(); ++j)
            if (is_symbol(members[j]) && grammar.limits.count(members[j].value)) {
                limit_ok[j] = true;
                any = true;
            }
        if (!any) continue;
        int sym = nearest_by_relation(dep, idx, rank_of, limit_ok);
        if (sym < 0) continue;
        const LimitInfo& info = grammar.limits.at(members[sym].value);
        bind("quantity", m.value + grammar.unit_separator + info.unit, idx);
        if (!graph.bindings.count("subject")) bind("subject", info.subject, sym);
        else bound[sym] = true;
    }

    // 4. vehicle-type texts next to a limit symbol
    bool has_limit_symbol = std::any_of(members.begin(), members.end(), [&](const ClusterMember& m) {
        return is_symbol(m) && grammar.limits.count(m.value) > 0;
    });
    for (int idx : order) {
        const auto& m = members[idx];
        if (!is_text(m) || bound[idx] || !has_limit_symbol) continue;
        auto it = grammar.slot_rules.lexicon.find(m.value);
        if (it != grammar.slot_rules.lexicon.end() && it->second == "vehicle")
            bind("vehicle", m.value, idx);
    }

    // 5. remaining texts fall into the frame's loose slot, in reading order
    std::string loose_slot = "dest";
    if (auto it = grammar.loose_text_slots.find(graph.frame_type);
        it != grammar.loose_text_slots.end())
        loose_slot = it->second;
    for (int idx : order)
        if (is_text(members[idx]) && !bound[idx]) bind(loose_slot, members[idx].value, idx);

    // 6. warning frames take their hazard from the first warning symbol
    if (graph.frame_type == "warning") {
        for (int idx : order) {
            const auto& m = members[idx];
            if (!is_symbol(m) || bound[idx] || m.value.empty() || m.value[0] != 'w') continue;
            auto it = grammar.symbol_vocab.find(m.value);
            bind("hazard", it != grammar.symbol_vocab.end() ? it->second : m.value, idx);
            break;
        }
    }

    for (int idx : order)
        if (!bound[idx]) graph.unbound.push_back(members[idx].id());
    return graph;
}

// --- description generation ---------------------------------------------------

namespace {

struct RenderResult {
    std::string text;
    bool missing_required = false;
};

std::string joiner_for(const Grammar& grammar, const std::string& slot) {
    auto it = grammar.joiners.find(slot);
    return it != grammar.joiners.end() ? it->second : std::string(", ");
}

// Template mini-language: literal text, <slot> placeholders, and [...] groups
// that drop out entirely when any slot inside them has no filler.
RenderResult render_template(const std::string& pattern, const SemanticGraph& graph,
                             const Grammar& grammar) {
    RenderResult out;
    std::size_t i = 0;
    while (i < pattern.size()) {
        char c = pattern[i];
        if (c == '[') {
            std::size_t close = pattern.find(']', i + 1);
            if (close == std::string::npos)
                throw ConfigError("template: unterminated optional group");
            RenderResult inner =
                render_template(pattern.substr(i + 1, close - i - 1), graph, grammar);
            if (!inner.missing_required) out.text += inner.text;
            i = close + 1;
        } else if (c == '<') {
            std::size_t close = pattern.find('>', i + 1);
            if (close == std::string::npos) throw ConfigError("template: unterminated slot");
            std::string slot = pattern.substr(i + 1, close - i - 1);
            auto it = graph.bindings.find(slot);
            if (it == graph.bindings.end() || it->second.empty()) {
                out.missing_required = true;
            } else {
                const std::string join = joiner_for(grammar, slot);
                for (std::size_t k = 0; k < it->second.size(); ++k) {
                    if (k) out.text += join;
                    out.text += it->second[k];
                }
            }
            i = close + 1;
        } else {
            out.text += c;
            ++i;
        }
    }
    return out;
}

} // namespace

InterpretedDescription generate_description(const SemanticGraph& graph,
                                            const SignCluster& cluster, const Grammar& grammar) {
    auto it = grammar.frames.find(graph.frame_type);
    if (it == grammar.frames.end())
        throw ConfigError("no template for frame_type '" + graph.frame_type + "'");

    RenderResult rendered = render_template(it->second.pattern, graph, grammar);
    std::string text = rendered.missing_required ? it->second.fallback : trim(rendered.text);
    if (text.empty()) text = it->second.fallback;

    InterpretedDescription desc;
    desc.text = text;
    desc.frame = extract_frame(text, grammar.slot_rules);
    desc.panel_id = cluster.panel ? cluster.panel->panel_id : -1;
    return desc;
}

InterpretOutcome interpret_scene(const SceneRecord& scene, const Grammar& grammar) {
    InterpretOutcome outcome;
    for (const SignCluster& cluster : cluster_signs(scene)) {
        try {
            SpatialDependence dep = spatial_dependence(cluster);
            SemanticGraph graph = assemble_semantics(cluster, dep, grammar);
            outcome.descriptions.push_back(generate_description(graph, cluster, grammar));
        } catch (const Error& e) {
            std::string where = cluster.panel
                                    ? "panel " + std::to_string(cluster.panel->panel_id)
                                    : "orphan " + (cluster.members.empty()
                                                       ? std::string("?")
                                                       : cluster.members.front().id());
            outcome.diagnostics.push_back(scene.image_id + ": " + where + ": " + e.what());
        }
    }
    return outcome;
}

} // namespace tsi
