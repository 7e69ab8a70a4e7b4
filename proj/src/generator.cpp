#include "tsi/generator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "tsi/embedded_data.hpp"
#include "tsi/errors.hpp"
#include "tsi/util.hpp"

using nlohmann::json;

namespace tsi {

GenVocab GenVocab::from_json(const std::string& json_text) {
    try {
        json j = json::parse(json_text);
        GenVocab v;
        auto read = [&](const char* key, std::vector<std::string>& out) {
            for (const json& e : j.at(key)) out.push_back(e.get<std::string>());
        };
        read("destinations", v.destinations);
        read("scenic", v.scenic);
        read("vehicles", v.vehicles);
        read("notices", v.notices);
        read("dynamics", v.dynamics);
        return v;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("generator vocab: ") + e.what());
    }
}

GenVocab GenVocab::builtin(const std::string& lang) {
    if (lang == "en") return from_json(std::string(embedded::k_gen_vocab_en_json));
    if (lang == "zh") return from_json(std::string(embedded::k_gen_vocab_zh_json));
    throw ConfigError("unknown language pack: " + lang);
}

namespace {

QuadBox rect_box(double x0, double y0, double x1, double y1) {
    return QuadBox::rect(quantize6(x0), quantize6(y0), quantize6(x1), quantize6(y1));
}

bool rects_overlap(const QuadBox& a, const QuadBox& b, double gap) {
    double ax0 = a.corners[0].x, ay0 = a.corners[0].y, ax1 = a.corners[2].x, ay1 = a.corners[2].y;
    double bx0 = b.corners[0].x, by0 = b.corners[0].y, bx1 = b.corners[2].x, by1 = b.corners[2].y;
    return !(ax1 + gap <= bx0 || bx1 + gap <= ax0 || ay1 + gap <= by0 || by1 + gap <= ay0);
}

// one panel's planned content before layout
struct PlannedMember {
    ClusterMember::Kind kind;
    std::string value; // class_code or transcription
    bool ignored = false;
};

std::string pick(Rng& rng, const std::vector<std::string>& pool, double zipf_s) {
    if (pool.empty()) throw ConfigError("generator vocabulary pool is empty");
    int rank = rng.zipf(static_cast<int>(pool.size()), zipf_s);
    return pool[static_cast<std::size_t>(rank - 1)];
}

std::vector<std::string> pick_distinct(Rng& rng, const std::vector<std::string>& pool, int count,
                                       double zipf_s) {
    std::vector<std::string> out;
    int guard = 0;
    while (static_cast<int>(out.size()) < count && guard++ < 200) {
        std::string cand = pick(rng, pool, zipf_s);
        if (std::find(out.begin(), out.end(), cand) == out.end()) out.push_back(cand);
    }
    return out;
}

} // namespace

GeneratedScene generate_scene(const GeneratorConfig& config, std::uint64_t scene_seed,
                              const Grammar& grammar, const GenVocab& vocab, int scene_index) {
    Rng rng(scene_seed);
    GeneratedScene out;
    SceneRecord& scene = out.scene;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "synth_%06d", scene_index);
    scene.image_id = idbuf;
    scene.width = config.width;
    scene.height = config.height;

    const double W = config.width, H = config.height;
    const int n_panels = static_cast<int>(rng.uniform_int(config.panels_min, config.panels_max));

    std::vector<QuadBox> panel_boxes;
    for (int p = 0; p < n_panels; ++p) {
        bool placed = false;
        for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
            double pw = rng.uniform(0.14 * W, 0.36 * W);
            double ph = rng.uniform(0.14 * H, 0.42 * H);
            double px = rng.uniform(20.0, W - 20.0 - pw);
            double py = rng.uniform(20.0, H - 20.0 - ph);
            QuadBox box = rect_box(px, py, px + pw, py + ph);
            bool clash = false;
            for (const QuadBox& other : panel_boxes)
                if (rects_overlap(box, other, 12.0)) clash = true;
            if (!clash) {
                panel_boxes.push_back(box);
                placed = true;
            }
        }
        // an unplaceable panel is skipped; the scene simply has fewer panels
    }

    for (std::size_t p = 0; p < panel_boxes.size(); ++p) {
        const int panel_class = rng.zipf(7, config.zipf_s);
        const int panel_id = static_cast<int>(p) + 1;
        scene.panels.push_back({panel_boxes[p], panel_class, panel_id, 1.0});

        std::vector<PlannedMember> plan;
        const std::string frame = grammar.panel_frames.at(panel_class);
        const int budget = static_cast<int>(rng.uniform_int(config.members_min, config.members_max));
        if (!rng.bernoulli(config.empty_panel_rate)) {
            if (frame == "guidance" || frame == "highway") {
                char arrow[4];
                std::snprintf(arrow, sizeof(arrow), "a%d", rng.zipf(8, config.zipf_s));
                plan.push_back({ClusterMember::Kind::Symbol, arrow});
                if (rng.bernoulli(0.75)) {
                    std::string route = (rng.bernoulli(0.6) ? "G" : "S") +
                                        std::to_string(rng.uniform_int(1, 99));
                    plan.push_back({ClusterMember::Kind::Text, route});
                }
                int dest_budget = std::max(1, budget - static_cast<int>(plan.size()));
                int n_dest = static_cast<int>(rng.uniform_int(1, std::min(3, dest_budget)));
                for (const std::string& d :
                     pick_distinct(rng, vocab.destinations, n_dest, config.zipf_s))
                    plan.push_back({ClusterMember::Kind::Text, d});
                if (rng.bernoulli(config.extra_symbol_rate) &&
                    static_cast<int>(plan.size()) < config.members_max) {
                    char info[4];
                    std::snprintf(info, sizeof(info), "i%d", rng.zipf(8, config.zipf_s));
                    plan.push_back({ClusterMember::Kind::Symbol, info});
                }
            } else if (frame == "prohibition") {
                int limit_rank = rng.zipf(3, config.zipf_s);
                char code[4];
                std::snprintf(code, sizeof(code), "p%d", limit_rank);
                plan.push_back({ClusterMember::Kind::Symbol, code});
                std::string value;
                if (limit_rank == 1) value = std::to_string(10 * rng.uniform_int(3, 12));
                else if (limit_rank == 2) value = std::to_string(5 * rng.uniform_int(2, 11));
                else {
                    static const char* heights[] = {"2.5", "3.5", "4", "4.5", "5"};
                    value = heights[rng.uniform_index(5)];
                }
                plan.push_back({ClusterMember::Kind::Text, value});
                if (rng.bernoulli(0.4))
                    plan.push_back({ClusterMember::Kind::Text, pick(rng, vocab.vehicles, config.zipf_s)});
            } else if (frame == "warning") {
                char code[4];
                std::snprintf(code, sizeof(code), "w%d", rng.zipf(8, config.zipf_s));
                plan.push_back({ClusterMember::Kind::Symbol, code});
            } else if (frame == "scenic") {
                int n = static_cast<int>(rng.uniform_int(1, 2));
                for (const std::string& s : pick_distinct(rng, vocab.scenic, n, config.zipf_s))
                    plan.push_back({ClusterMember::Kind::Text, s});
            } else if (frame == "notice") {
                plan.push_back({ClusterMember::Kind::Text, pick(rng, vocab.notices, config.zipf_s)});
            } else { // dynamic
                plan.push_back({ClusterMember::Kind::Text, pick(rng, vocab.dynamics, config.zipf_s)});
            }
            if (rng.bernoulli(config.ignored_text_rate))
                plan.push_back({ClusterMember::Kind::Text, "###", true});
        }

        // grid layout: rows of up to two cells inside the panel
        const QuadBox& pb = panel_boxes[p];
        double inner_x = pb.corners[0].x, inner_y = pb.corners[0].y;
        double inner_w = pb.corners[2].x - inner_x, inner_h = pb.corners[2].y - inner_y;
        double pad_x = 0.07 * inner_w, pad_y = 0.09 * inner_h;
        inner_x += pad_x;
        inner_y += pad_y;
        inner_w -= 2 * pad_x;
        inner_h -= 2 * pad_y;

        const int n_members = static_cast<int>(plan.size());
        const int cols = n_members > 1 ? 2 : 1;
        const int rows = n_members > 0 ? (n_members + cols - 1) / cols : 1;
        double cell_w = inner_w / cols, cell_h = inner_h / rows;

        ClusterOracle::Entry oracle_entry;
        oracle_entry.panel_id = panel_id;
        for (int m = 0; m < n_members; ++m) {
            int row = m / cols, col = m % cols;
            double cx = inner_x + (col + 0.5) * cell_w + rng.uniform(-0.04, 0.04) * cell_w;
            double cy = inner_y + (row + 0.5) * cell_h + rng.uniform(-0.04, 0.04) * cell_h;
            double bw, bh;
            if (plan[m].kind == ClusterMember::Kind::Symbol) {
                double side = std::min(cell_w, cell_h) * rng.uniform(0.45, 0.7);
                bw = bh = side;
            } else {
                bw = cell_w * rng.uniform(0.6, 0.88);
                bh = cell_h * rng.uniform(0.38, 0.6);
            }
            QuadBox box = rect_box(cx - bw / 2, cy - bh / 2, cx + bw / 2, cy + bh / 2);
            if (plan[m].kind == ClusterMember::Kind::Symbol) {
                oracle_entry.members.push_back("s" + std::to_string(scene.symbols.size()));
                scene.symbols.push_back({box, plan[m].value, false, 1.0});
            } else {
                if (!plan[m].ignored)
                    oracle_entry.members.push_back("t" + std::to_string(scene.texts.size()));
                scene.texts.push_back({box, plan[m].value, plan[m].ignored, 1.0});
            }
        }
        out.oracle.clusters.push_back(std::move(oracle_entry));
    }
    out.oracle.image_id = scene.image_id;

    // ground-truth descriptions come from the interpreter itself
    InterpretOutcome interp = interpret_scene(scene, grammar);
    if (!interp.diagnostics.empty())
        throw Error("generator produced an uninterpretable scene: " + interp.diagnostics.front());
    for (const auto& d : interp.descriptions)
        scene.descriptions.push_back({d.panel_id, d.text});
    return out;
}

GeneratedCorpus generate_corpus(const GeneratorConfig& config, int workers) {
    if (config.n_scenes < 0) throw ConfigError("generate_corpus: n_scenes must be >= 0");
    if (config.panels_min < 0 || config.panels_max < config.panels_min)
        throw ConfigError("generate_corpus: bad panels range");
    if (config.members_min < 1 || config.members_max < config.members_min)
        throw ConfigError("generate_corpus: bad members range");
    if (config.width <= 0 || config.height <= 0)
        throw ConfigError("generate_corpus: image size must be positive");

    const Grammar grammar = Grammar::builtin(config.lang);
    const GenVocab vocab = GenVocab::builtin(config.lang);

    GeneratedCorpus out;
    out.corpus.symbol_vocab = grammar.symbol_vocab;
    out.corpus.panel_vocab = grammar.panel_vocab;
    out.corpus.scenes.resize(static_cast<std::size_t>(config.n_scenes));
    out.oracles.resize(static_cast<std::size_t>(config.n_scenes));

    const int n_workers = std::max(1, workers);
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;

    auto work = [&]() {
        while (true) {
            int i = next.fetch_add(1);
            if (i >= config.n_scenes || failed.load()) break;
            try {
                GeneratedScene g = generate_scene(config, mix_seed(config.seed, i), grammar,
                                                  vocab, i);
                out.corpus.scenes[static_cast<std::size_t>(i)] = std::move(g.scene);
                out.oracles[static_cast<std::size_t>(i)] = std::move(g.oracle);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) first_error = e.what();
            }
        }
    };
    if (n_workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw Error("generate_corpus: " + first_error);
    return out;
}

// --- noise injection ---------------------------------------------------------

NoiseProfile NoiseProfile::from_json(const std::string& json_text) {
    NoiseProfile p;
    try {
        json j = json::parse(json_text);
        p.drop_rate = j.value("drop_rate", 0.0);
        p.spurious_rate = j.value("spurious_rate", 0.0);
        p.jitter_sigma = j.value("jitter_sigma", 0.0);
        p.class_confusion_rate = j.value("class_confusion_rate", 0.0);
        p.char_sub_rate = j.value("char_sub_rate", 0.0);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("noise profile: ") + e.what());
    }
    for (double v : {p.drop_rate, p.class_confusion_rate, p.char_sub_rate})
        if (v < 0.0 || v > 1.0) throw ConfigError("noise profile: probabilities must lie in [0,1]");
    if (p.jitter_sigma < 0.0 || p.spurious_rate < 0.0)
        throw ConfigError("noise profile: sigma and spurious_rate must be >= 0");
    return p;
}

std::string NoiseProfile::to_json() const {
    json j;
    j["drop_rate"] = drop_rate;
    j["spurious_rate"] = spurious_rate;
    j["jitter_sigma"] = jitter_sigma;
    j["class_confusion_rate"] = class_confusion_rate;
    j["char_sub_rate"] = char_sub_rate;
    return j.dump();
}

std::string PerturbationLog::to_json_line() const {
    json j;
    j["image_id"] = image_id;
    j["dropped"] = dropped;
    j["jittered"] = jittered;
    j["label_flips"] = json::array();
    for (const auto& f : label_flips)
        j["label_flips"].push_back({{"id", f.id}, {"from", f.from}, {"to", f.to}});
    j["char_edits"] = json::array();
    for (const auto& f : char_edits)
        j["char_edits"].push_back({{"id", f.id}, {"from", f.from}, {"to", f.to}});
    j["spurious"] = json::array();
    for (const auto& s : spurious)
        j["spurious"].push_back({{"kind", s.kind}, {"label", s.label}});
    return j.dump();
}

namespace {

const char32_t kSubstitutionPool[] = U"0123456789ABCDEFGHJKLMNPQRSTUVWXYZ西安咸阳宝鸡郑州周口路道桥山";

QuadBox jitter_box(const QuadBox& box, double sigma, double width, double height, Rng& rng,
                   bool& moved) {
    moved = false;
    if (sigma <= 0.0) return box;
    for (int attempt = 0; attempt < 10; ++attempt) {
        QuadBox jittered = box;
        for (Point2D& c : jittered.corners) {
            c.x = quantize6(std::clamp(c.x + rng.gauss(sigma), 0.0, width));
            c.y = quantize6(std::clamp(c.y + rng.gauss(sigma), 0.0, height));
        }
        if (is_simple_quad(jittered) && polygon_area(jittered.polygon()) > 1.0) {
            moved = !(jittered == box);
            return jittered;
        }
    }
    return box; // keep the original when jitter keeps degenerating it
}

std::string substitute_chars(const std::string& text, double rate, Rng& rng, bool& changed) {
    changed = false;
    if (rate <= 0.0) return text;
    std::vector<char32_t> cps = utf8_decode(text);
    const std::size_t pool_n = sizeof(kSubstitutionPool) / sizeof(char32_t) - 1;
    for (char32_t& cp : cps) {
        if (!rng.bernoulli(rate)) continue;
        char32_t repl = kSubstitutionPool[rng.uniform_index(pool_n)];
        if (repl != cp) {
            cp = repl;
            changed = true;
        }
    }
    return utf8_encode(cps);
}

} // namespace

PerturbResult perturb_predictions(const SceneRecord& scene, const NoiseProfile& profile,
                                  std::uint64_t seed) {
    Rng rng(seed);
    PerturbResult out;
    out.log.image_id = scene.image_id;
    SceneRecord& pred = out.predictions;
    pred.image_id = scene.image_id;
    pred.width = scene.width;
    pred.height = scene.height;

    const double W = scene.width, H = scene.height;

    // 1. drop
    std::vector<const SymbolAnnotation*> kept_symbols;
    std::vector<const TextAnnotation*> kept_texts;
    std::vector<const PanelAnnotation*> kept_panels;
    for (std::size_t i = 0; i < scene.symbols.size(); ++i) {
        if (rng.bernoulli(profile.drop_rate))
            out.log.dropped.push_back("s" + std::to_string(i));
        else
            kept_symbols.push_back(&scene.symbols[i]);
    }
    for (std::size_t i = 0; i < scene.texts.size(); ++i) {
        if (rng.bernoulli(profile.drop_rate))
            out.log.dropped.push_back("t" + std::to_string(i));
        else
            kept_texts.push_back(&scene.texts[i]);
    }
    for (std::size_t i = 0; i < scene.panels.size(); ++i) {
        if (rng.bernoulli(profile.drop_rate))
            out.log.dropped.push_back("p" + std::to_string(i));
        else
            kept_panels.push_back(&scene.panels[i]);
    }

    // 2. jitter
    int out_index = 0;
    for (const auto* a : kept_symbols) {
        SymbolAnnotation copy = *a;
        bool moved = false;
        copy.box = jitter_box(copy.box, profile.jitter_sigma, W, H, rng, moved);
        if (moved) out.log.jittered.push_back("s" + std::to_string(out_index));
        copy.score = 1.0;
        pred.symbols.push_back(std::move(copy));
        ++out_index;
    }
    out_index = 0;
    for (const auto* t : kept_texts) {
        TextAnnotation copy = *t;
        bool moved = false;
        copy.box = jitter_box(copy.box, profile.jitter_sigma, W, H, rng, moved);
        if (moved) out.log.jittered.push_back("t" + std::to_string(out_index));
        copy.score = 1.0;
        pred.texts.push_back(std::move(copy));
        ++out_index;
    }
    out_index = 0;
    for (const auto* p : kept_panels) {
        PanelAnnotation copy = *p;
        bool moved = false;
        copy.box = jitter_box(copy.box, profile.jitter_sigma, W, H, rng, moved);
        if (moved) out.log.jittered.push_back("p" + std::to_string(out_index));
        copy.score = 1.0;
        pred.panels.push_back(std::move(copy));
        ++out_index;
    }

    // 3. class confusion
    std::vector<std::string> symbol_codes;
    {
        // stable universe: the builtin vocab of both letters present in scenes
        for (const char* code :
             {"a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "w1", "w2", "w3", "w4", "w5", "w6",
              "w7", "w8", "p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8", "i1", "i2", "i3", "i4",
              "i5", "i6", "i7", "i8"})
            symbol_codes.push_back(code);
    }
    for (std::size_t i = 0; i < pred.symbols.size(); ++i) {
        if (!rng.bernoulli(profile.class_confusion_rate)) continue;
        std::string from = pred.symbols[i].class_code;
        std::string to = from;
        int guard = 0;
        while (to == from && guard++ < 20)
            to = symbol_codes[rng.uniform_index(symbol_codes.size())];
        pred.symbols[i].class_code = to;
        out.log.label_flips.push_back({"s" + std::to_string(i), from, to});
    }
    for (std::size_t i = 0; i < pred.panels.size(); ++i) {
        if (!rng.bernoulli(profile.class_confusion_rate)) continue;
        int from = pred.panels[i].panel_class;
        int to = from;
        int guard = 0;
        while (to == from && guard++ < 20) to = static_cast<int>(rng.uniform_int(1, 7));
        pred.panels[i].panel_class = to;
        out.log.label_flips.push_back(
            {"p" + std::to_string(i), std::to_string(from), std::to_string(to)});
    }

    // 4. character substitution (ignored "###" markers stay untouched)
    for (std::size_t i = 0; i < pred.texts.size(); ++i) {
        if (pred.texts[i].ignored) continue;
        bool changed = false;
        std::string edited = substitute_chars(pred.texts[i].transcription, profile.char_sub_rate,
                                              rng, changed);
        if (changed) {
            out.log.char_edits.push_back(
                {"t" + std::to_string(i), pred.texts[i].transcription, edited});
            pred.texts[i].transcription = edited;
            pred.texts[i].ignored = pred.texts[i].transcription == "###";
        }
    }

    // 5. spurious insertions, sized from the scene's own boxes when possible
    const int n_spurious = rng.poisson(profile.spurious_rate);
    for (int k = 0; k < n_spurious; ++k) {
        int kind = static_cast<int>(rng.uniform_index(3));
        double bw, bh;
        if (kind == 0 && !scene.symbols.empty()) {
            const QuadBox& src = scene.symbols[rng.uniform_index(scene.symbols.size())].box;
            bw = src.corners[2].x - src.corners[0].x;
            bh = src.corners[2].y - src.corners[0].y;
        } else if (kind == 1 && !scene.texts.empty()) {
            const QuadBox& src = scene.texts[rng.uniform_index(scene.texts.size())].box;
            bw = src.corners[2].x - src.corners[0].x;
            bh = src.corners[2].y - src.corners[0].y;
        } else if (kind == 2 && !scene.panels.empty()) {
            const QuadBox& src = scene.panels[rng.uniform_index(scene.panels.size())].box;
            bw = src.corners[2].x - src.corners[0].x;
            bh = src.corners[2].y - src.corners[0].y;
        } else {
            bw = kind == 2 ? 0.2 * W : 0.04 * W;
            bh = kind == 2 ? 0.2 * H : 0.03 * H;
        }
        bw = std::min(bw, W - 2.0);
        bh = std::min(bh, H - 2.0);
        double x0 = rng.uniform(0.0, W - bw);
        double y0 = rng.uniform(0.0, H - bh);
        QuadBox box = rect_box(x0, y0, x0 + bw, y0 + bh);
        double score = rng.uniform(0.5, 0.95);
        if (kind == 0) {
            std::string label = symbol_codes[rng.uniform_index(symbol_codes.size())];
            pred.symbols.push_back({box, label, false, score});
            out.log.spurious.push_back({"symbol", label});
        } else if (kind == 1) {
            int len = static_cast<int>(rng.uniform_int(2, 6));
            std::vector<char32_t> cps;
            const std::size_t pool_n = sizeof(kSubstitutionPool) / sizeof(char32_t) - 1;
            for (int c = 0; c < len; ++c) cps.push_back(kSubstitutionPool[rng.uniform_index(pool_n)]);
            std::string label = utf8_encode(cps);
            pred.texts.push_back({box, label, false, score});
            out.log.spurious.push_back({"text", label});
        } else {
            int cls = static_cast<int>(rng.uniform_int(1, 7));
            int max_id = 0;
            for (const auto& p : pred.panels) max_id = std::max(max_id, p.panel_id);
            pred.panels.push_back({box, cls, max_id + 1000 + k, score});
            out.log.spurious.push_back({"panel", std::to_string(cls)});
        }
    }
    return out;
}

} // namespace tsi
