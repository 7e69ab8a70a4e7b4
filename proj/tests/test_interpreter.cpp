#include <doctest.h>

#include <algorithm>
#include <set>

#include "tsi/errors.hpp"
#include "tsi/generator.hpp"
#include "tsi/interpreter.hpp"
#include "tsi/util.hpp"

using namespace tsi;

namespace {

const Grammar& grammar() {
    static Grammar g = Grammar::builtin("en");
    return g;
}

SceneRecord guide_panel_scene() {
    // one guide panel: arrow + route on the top row, two destinations below
    SceneRecord s;
    s.image_id = "demo";
    s.width = 1000;
    s.height = 800;
    s.panels.push_back({QuadBox::rect(100, 100, 700, 500), 4, 1, 1.0});
    s.symbols.push_back({QuadBox::rect(140, 140, 240, 240), "a1", false, 1.0});
    s.texts.push_back({QuadBox::rect(400, 150, 600, 230), "G70", false, 1.0});
    s.texts.push_back({QuadBox::rect(140, 300, 380, 380), "Xi'an", false, 1.0});
    s.texts.push_back({QuadBox::rect(420, 300, 660, 380), "Xianyang", false, 1.0});
    return s;
}

} // namespace

TEST_CASE("cluster_signs") {
    SUBCASE("members assign to the containing panel") {
        SceneRecord s = guide_panel_scene();
        auto clusters = cluster_signs(s);
        REQUIRE(clusters.size() == 1);
        CHECK(clusters[0].panel.has_value());
        CHECK(clusters[0].members.size() == 4);
    }
    SUBCASE("signs outside every panel become orphan singletons") {
        SceneRecord s = guide_panel_scene();
        s.symbols.push_back({QuadBox::rect(800, 600, 860, 660), "w1", false, 1.0});
        auto clusters = cluster_signs(s);
        REQUIRE(clusters.size() == 2);
        CHECK(!clusters[1].panel.has_value());
        CHECK(clusters[1].members.size() == 1);
        CHECK(clusters[1].members[0].value == "w1");
    }
    SUBCASE("nested panels resolve to the smaller one") {
        SceneRecord s;
        s.image_id = "nest";
        s.width = 1000;
        s.height = 1000;
        s.panels.push_back({QuadBox::rect(0, 0, 900, 900), 3, 1, 1.0});
        s.panels.push_back({QuadBox::rect(100, 100, 400, 400), 6, 2, 1.0});
        s.texts.push_back({QuadBox::rect(150, 150, 250, 200), "school zone", false, 1.0});
        auto clusters = cluster_signs(s);
        for (const auto& c : clusters) {
            if (c.panel->panel_id == 2) CHECK(c.members.size() == 1);
            if (c.panel->panel_id == 1) CHECK(c.members.empty());
        }
    }
    SUBCASE("ignored texts never join a cluster") {
        SceneRecord s = guide_panel_scene();
        s.texts.push_back({QuadBox::rect(150, 400, 250, 450), "###", true, 1.0});
        auto clusters = cluster_signs(s);
        CHECK(clusters[0].members.size() == 4);
    }
    SUBCASE("clustering is a partition of non-ignored signs") {
        GeneratorConfig config;
        config.n_scenes = 10;
        config.seed = 77;
        GeneratedCorpus g = generate_corpus(config);
        for (const SceneRecord& s : g.corpus.scenes) {
            std::set<std::string> seen;
            std::size_t expected = 0;
            for (std::size_t i = 0; i < s.symbols.size(); ++i)
                if (!s.symbols[i].ignored) ++expected;
            for (std::size_t i = 0; i < s.texts.size(); ++i)
                if (!s.texts[i].ignored) ++expected;
            for (const auto& c : cluster_signs(s))
                for (const auto& m : c.members) CHECK(seen.insert(m.id()).second);
            CHECK(seen.size() == expected);
        }
    }
}

TEST_CASE("spatial_dependence") {
    SUBCASE("two horizontally aligned members: east relation at distance 1") {
        SignCluster c;
        c.members.push_back({ClusterMember::Kind::Symbol, 0, QuadBox::rect(0, 0, 10, 10), "a1",
                             Point2D{5, 5}});
        c.members.push_back({ClusterMember::Kind::Text, 0, QuadBox::rect(40, 0, 50, 10), "G70",
                             Point2D{45, 5}});
        SpatialDependence dep = spatial_dependence(c);
        REQUIRE(dep.relations.size() == 2);
        const auto& r01 = dep.relations[0].from == 0 ? dep.relations[0] : dep.relations[1];
        CHECK(std::string(kCompassNames[r01.direction]) == "E");
        CHECK(r01.normalized_distance == doctest::Approx(1.0));
        const auto& r10 = dep.relations[0].from == 0 ? dep.relations[1] : dep.relations[0];
        CHECK(std::string(kCompassNames[r10.direction]) == "W");
    }
    SUBCASE("single member yields no relations") {
        SignCluster c;
        c.members.push_back({ClusterMember::Kind::Symbol, 0, QuadBox::rect(0, 0, 10, 10), "w1",
                             Point2D{5, 5}});
        CHECK(spatial_dependence(c).relations.empty());
    }
    SUBCASE("four members: all distances <= 1 with exactly one pair at 1") {
        Rng rng(15);
        SignCluster c;
        for (int i = 0; i < 4; ++i) {
            double x = rng.uniform(0, 300), y = rng.uniform(0, 300);
            c.members.push_back({ClusterMember::Kind::Text, i, QuadBox::rect(x, y, x + 10, y + 10),
                                 "t", Point2D{x + 5, y + 5}});
        }
        SpatialDependence dep = spatial_dependence(c);
        CHECK(dep.relations.size() == 12);
        // recompute distances directly
        double maxd = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (i != j)
                    maxd = std::max(maxd, std::hypot(c.members[i].center.x - c.members[j].center.x,
                                                     c.members[i].center.y - c.members[j].center.y));
        int at_max = 0;
        for (const auto& r : dep.relations) {
            CHECK(r.normalized_distance <= 1.0 + 1e-12);
            double d = std::hypot(c.members[r.from].center.x - c.members[r.to].center.x,
                                  c.members[r.from].center.y - c.members[r.to].center.y);
            CHECK(r.normalized_distance == doctest::Approx(d / maxd).epsilon(1e-12));
            if (r.normalized_distance == doctest::Approx(1.0)) ++at_max;
        }
        CHECK(at_max == 2); // the farthest pair, both directions
    }
    SUBCASE("directions are antisymmetric") {
        Rng rng(16);
        SignCluster c;
        for (int i = 0; i < 5; ++i) {
            double x = rng.uniform(0, 100), y = rng.uniform(0, 100);
            c.members.push_back({ClusterMember::Kind::Text, i, QuadBox::rect(x, y, x + 4, y + 4),
                                 "t", Point2D{x + 2, y + 2}});
        }
        SpatialDependence dep = spatial_dependence(c);
        for (const auto& r : dep.relations) {
            for (const auto& back : dep.relations) {
                if (back.from == r.to && back.to == r.from)
                    CHECK(back.direction == (r.direction + 4) % 8);
            }
        }
    }
}

TEST_CASE("reading_order") {
    SUBCASE("side-by-side texts read left to right") {
        SignCluster c;
        c.members.push_back({ClusterMember::Kind::Text, 0, QuadBox::rect(300, 0, 400, 20), "right",
                             Point2D{350, 10}});
        c.members.push_back({ClusterMember::Kind::Text, 1, QuadBox::rect(0, 2, 100, 22), "left",
                             Point2D{50, 12}});
        auto order = reading_order(c);
        CHECK(c.members[order[0]].value == "left");
        CHECK(c.members[order[1]].value == "right");
    }
    SUBCASE("two stacked rows produce row-major order") {
        SignCluster c;
        auto add = [&](double x, double y, const std::string& v, int idx) {
            c.members.push_back({ClusterMember::Kind::Text, idx,
                                 QuadBox::rect(x, y, x + 80, y + 30), v,
                                 Point2D{x + 40, y + 15}});
        };
        add(100, 100, "b", 0);
        add(0, 102, "a", 1);
        add(100, 200, "d", 2);
        add(0, 198, "c", 3);
        auto order = reading_order(c);
        std::vector<std::string> got;
        for (int i : order) got.push_back(c.members[i].value);
        CHECK(got == std::vector<std::string>{"a", "b", "c", "d"});
    }
    SUBCASE("jittered grids recover the generator's grid order") {
        GeneratorConfig config;
        config.n_scenes = 20;
        config.seed = 55;
        GeneratedCorpus g = generate_corpus(config);
        for (std::size_t i = 0; i < g.corpus.scenes.size(); ++i) {
            auto clusters = cluster_signs(g.corpus.scenes[i]);
            for (const auto& cluster : clusters) {
                REQUIRE(cluster.panel.has_value());
                const ClusterOracle::Entry* entry = nullptr;
                for (const auto& e : g.oracles[i].clusters)
                    if (e.panel_id == cluster.panel->panel_id) entry = &e;
                REQUIRE(entry != nullptr);
                std::vector<std::string> got;
                for (int idx : reading_order(cluster)) got.push_back(cluster.members[idx].id());
                CHECK(got == entry->members);
            }
        }
    }
}

TEST_CASE("assemble_semantics") {
    SUBCASE("guide panel binds action, route, and destinations") {
        SceneRecord s = guide_panel_scene();
        auto clusters = cluster_signs(s);
        REQUIRE(clusters.size() == 1);
        SemanticGraph g = assemble_semantics(clusters[0], spatial_dependence(clusters[0]),
                                             grammar());
        CHECK(g.frame_type == "highway");
        CHECK(g.bindings.at("action") == std::vector<std::string>{"Go straight"});
        CHECK(g.bindings.at("route") == std::vector<std::string>{"G70"});
        CHECK(g.bindings.at("dest") == std::vector<std::string>{"Xi'an", "Xianyang"});
        CHECK(g.unbound.empty());
    }
    SUBCASE("speed-limit pair binds quantity with its unit") {
        SceneRecord s;
        s.image_id = "lim";
        s.width = 500;
        s.height = 500;
        s.panels.push_back({QuadBox::rect(50, 50, 450, 400), 1, 1, 1.0});
        s.symbols.push_back({QuadBox::rect(80, 80, 180, 180), "p1", false, 1.0});
        s.texts.push_back({QuadBox::rect(250, 90, 380, 170), "60", false, 1.0});
        auto clusters = cluster_signs(s);
        SemanticGraph g = assemble_semantics(clusters[0], spatial_dependence(clusters[0]),
                                             grammar());
        CHECK(g.frame_type == "prohibition");
        CHECK(g.bindings.at("quantity") == std::vector<std::string>{"60 km/h"});
        CHECK(g.bindings.at("subject") == std::vector<std::string>{"Speed"});
    }
    SUBCASE("panel with no members keeps an empty binding set") {
        SceneRecord s;
        s.image_id = "empty";
        s.width = 500;
        s.height = 500;
        s.panels.push_back({QuadBox::rect(50, 50, 450, 400), 6, 9, 1.0});
        auto clusters = cluster_signs(s);
        SemanticGraph g = assemble_semantics(clusters[0], spatial_dependence(clusters[0]),
                                             grammar());
        CHECK(g.frame_type == "notice");
        CHECK(g.bindings.empty());
    }
    SUBCASE("unmatched members land in unbound, never dropped") {
        SceneRecord s = guide_panel_scene();
        s.symbols.push_back({QuadBox::rect(260, 140, 360, 240), "i3", false, 1.0});
        auto clusters = cluster_signs(s);
        SemanticGraph g = assemble_semantics(clusters[0], spatial_dependence(clusters[0]),
                                             grammar());
        REQUIRE(g.unbound.size() == 1);
        CHECK(g.unbound[0] == "s1");
    }
}

TEST_CASE("generate_description") {
    SUBCASE("guide panel renders the canonical sentence") {
        SceneRecord s = guide_panel_scene();
        auto clusters = cluster_signs(s);
        SemanticGraph g = assemble_semantics(clusters[0], spatial_dependence(clusters[0]),
                                             grammar());
        InterpretedDescription d = generate_description(g, clusters[0], grammar());
        CHECK(d.text == "Go straight along G70 to Xi'an, Xianyang");
        CHECK(d.panel_id == 1);
        CHECK(d.frame == extract_frame(d.text, grammar().slot_rules));
    }
    SUBCASE("prohibition without vehicle omits the connector") {
        SemanticGraph g;
        g.frame_type = "prohibition";
        g.bindings["subject"] = {"Speed"};
        g.bindings["quantity"] = {"60 km/h"};
        SignCluster c;
        c.panel = PanelAnnotation{QuadBox::rect(0, 0, 10, 10), 1, 3, 1.0};
        InterpretedDescription d = generate_description(g, c, grammar());
        CHECK(d.text == "Speed limited to 60 km/h");
    }
    SUBCASE("no bindings falls back to the frame default sentence") {
        SemanticGraph g;
        g.frame_type = "notice";
        SignCluster c;
        c.panel = PanelAnnotation{QuadBox::rect(0, 0, 10, 10), 6, 3, 1.0};
        InterpretedDescription d = generate_description(g, c, grammar());
        CHECK(d.text == "Notice panel posted here");
    }
    SUBCASE("missing template names the frame type") {
        SemanticGraph g;
        g.frame_type = "nonesuch";
        SignCluster c;
        CHECK_THROWS_WITH_AS(generate_description(g, c, grammar()),
                             doctest::Contains("nonesuch"), ConfigError);
    }
}

TEST_CASE("interpret_scene") {
    SUBCASE("clean generated scenes reproduce their stored descriptions") {
        GeneratorConfig config;
        config.n_scenes = 25;
        config.seed = 12;
        GeneratedCorpus g = generate_corpus(config);
        for (const SceneRecord& s : g.corpus.scenes) {
            InterpretOutcome out = interpret_scene(s, grammar());
            CHECK(out.diagnostics.empty());
            REQUIRE(out.descriptions.size() == s.descriptions.size());
            for (std::size_t i = 0; i < out.descriptions.size(); ++i) {
                CHECK(out.descriptions[i].text == s.descriptions[i].text);
                CHECK(out.descriptions[i].panel_id == s.descriptions[i].panel_id);
            }
        }
    }
    SUBCASE("orphan warning symbol produces a warning-frame description") {
        SceneRecord s;
        s.image_id = "orphan";
        s.width = 500;
        s.height = 500;
        s.symbols.push_back({QuadBox::rect(100, 100, 160, 160), "w3", false, 1.0});
        InterpretOutcome out = interpret_scene(s, grammar());
        REQUIRE(out.descriptions.size() == 1);
        CHECK(out.descriptions[0].panel_id == -1);
        CHECK(out.descriptions[0].text == "Warning slippery road ahead");
    }
    SUBCASE("orphan text yields a diagnostic, not a crash") {
        SceneRecord s;
        s.image_id = "lonely";
        s.width = 500;
        s.height = 500;
        s.texts.push_back({QuadBox::rect(10, 10, 80, 40), "Xi'an", false, 1.0});
        InterpretOutcome out = interpret_scene(s, grammar());
        CHECK(out.descriptions.empty());
        REQUIRE(out.diagnostics.size() == 1);
    }
    SUBCASE("dropping a destination changes only rouge, not SA") {
        SceneRecord s = guide_panel_scene();
        InterpretOutcome full = interpret_scene(s, grammar());
        SceneRecord perturbed = s;
        perturbed.texts.erase(perturbed.texts.begin() + 2); // drop "Xianyang"
        InterpretOutcome partial = interpret_scene(perturbed, grammar());
        REQUIRE(full.descriptions.size() == 1);
        REQUIRE(partial.descriptions.size() == 1);
        CHECK(partial.descriptions[0].text == "Go straight along G70 to Xi'an");
        CHECK(soft_accuracy({partial.descriptions[0].text}, {full.descriptions[0].text},
                            grammar().slot_rules) == 1.0);
        CHECK(rouge_n(tokenize(partial.descriptions[0].text), tokenize(full.descriptions[0].text),
                      1) < 1.0);
    }
    SUBCASE("translation and uniform scaling change nothing") {
        GeneratorConfig config;
        config.n_scenes = 8;
        config.seed = 13;
        GeneratedCorpus g = generate_corpus(config);
        for (const SceneRecord& s : g.corpus.scenes) {
            InterpretOutcome base = interpret_scene(s, grammar());
            SceneRecord moved = s;
            for (auto& a : moved.symbols)
                for (auto& c : a.box.corners) {
                    c.x += 37.5;
                    c.y += 11.25;
                }
            for (auto& a : moved.texts)
                for (auto& c : a.box.corners) {
                    c.x += 37.5;
                    c.y += 11.25;
                }
            for (auto& a : moved.panels)
                for (auto& c : a.box.corners) {
                    c.x += 37.5;
                    c.y += 11.25;
                }
            moved.width += 100;
            moved.height += 100;
            InterpretOutcome shifted = interpret_scene(moved, grammar());
            REQUIRE(base.descriptions.size() == shifted.descriptions.size());
            for (std::size_t i = 0; i < base.descriptions.size(); ++i)
                CHECK(base.descriptions[i].text == shifted.descriptions[i].text);

            SceneRecord scaled = s;
            for (auto& a : scaled.symbols)
                for (auto& c : a.box.corners) {
                    c.x *= 2.0;
                    c.y *= 2.0;
                }
            for (auto& a : scaled.texts)
                for (auto& c : a.box.corners) {
                    c.x *= 2.0;
                    c.y *= 2.0;
                }
            for (auto& a : scaled.panels)
                for (auto& c : a.box.corners) {
                    c.x *= 2.0;
                    c.y *= 2.0;
                }
            scaled.width *= 2;
            scaled.height *= 2;
            InterpretOutcome doubled = interpret_scene(scaled, grammar());
            REQUIRE(base.descriptions.size() == doubled.descriptions.size());
            for (std::size_t i = 0; i < base.descriptions.size(); ++i)
                CHECK(base.descriptions[i].text == doubled.descriptions[i].text);
        }
    }
    SUBCASE("dropping a member of one cluster leaves other clusters untouched") {
        SceneRecord s = guide_panel_scene();
        s.panels.push_back({QuadBox::rect(100, 550, 500, 780), 1, 2, 1.0});
        s.symbols.push_back({QuadBox::rect(130, 580, 210, 660), "p1", false, 1.0});
        s.texts.push_back({QuadBox::rect(280, 590, 420, 660), "60", false, 1.0});
        InterpretOutcome before = interpret_scene(s, grammar());
        REQUIRE(before.descriptions.size() == 2);
        SceneRecord fewer = s;
        fewer.texts.erase(fewer.texts.begin() + 1); // "Xi'an" from panel 1
        InterpretOutcome after = interpret_scene(fewer, grammar());
        REQUIRE(after.descriptions.size() == 2);
        CHECK(after.descriptions[0].text != before.descriptions[0].text);
        CHECK(after.descriptions[1].text == before.descriptions[1].text);
        CHECK(before.descriptions[1].text == "Speed limited to 60 km/h");
    }
    SUBCASE("zh grammar round-trips through its own corpus") {
        GeneratorConfig config;
        config.n_scenes = 10;
        config.seed = 14;
        config.lang = "zh";
        GeneratedCorpus g = generate_corpus(config);
        Grammar zh = Grammar::builtin("zh");
        for (const SceneRecord& s : g.corpus.scenes) {
            InterpretOutcome out = interpret_scene(s, zh);
            CHECK(out.diagnostics.empty());
            REQUIRE(out.descriptions.size() == s.descriptions.size());
            for (std::size_t i = 0; i < out.descriptions.size(); ++i)
                CHECK(out.descriptions[i].text == s.descriptions[i].text);
        }
    }
}
