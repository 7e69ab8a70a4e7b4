#include "tsi/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tsi/errors.hpp"
#include "tsi/util.hpp"

using nlohmann::json;

namespace tsi {

namespace {

void escape_json_string(const std::string& s, std::string& out) {
    out += '"';
    for (char32_t cp : utf8_decode(s)) {
        switch (cp) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (cp < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", static_cast<unsigned>(cp));
                    out += buf;
                } else if (cp < 0x80) {
                    out += static_cast<char>(cp);
                } else if (cp < 0x10000) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", static_cast<unsigned>(cp));
                    out += buf;
                } else {
                    char32_t v = cp - 0x10000;
                    char buf[16];
                    std::snprintf(buf, sizeof(buf), "\\u%04x\\u%04x",
                                  static_cast<unsigned>(0xD800 + (v >> 10)),
                                  static_cast<unsigned>(0xDC00 + (v & 0x3FF)));
                    out += buf;
                }
        }
    }
    out += '"';
}

void append_box(const QuadBox& box, std::string& out) {
    out += "[";
    for (int i = 0; i < 4; ++i) {
        if (i) out += ",";
        out += "[" + format_fixed6(box.corners[i].x) + "," + format_fixed6(box.corners[i].y) + "]";
    }
    out += "]";
}

QuadBox parse_box(const json& j, const std::string& entity) {
    if (!j.is_array() || j.size() != 4)
        throw ValidationError(entity + ".box: expected 4 corner points");
    QuadBox box;
    for (int i = 0; i < 4; ++i) {
        const json& pt = j[i];
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number())
            throw ValidationError(entity + ".box: corner must be [x,y]");
        box.corners[i] = Point2D{pt[0].get<double>(), pt[1].get<double>()};
        if (!std::isfinite(box.corners[i].x) || !std::isfinite(box.corners[i].y))
            throw ValidationError(entity + ".box: non-finite coordinate");
    }
    return box;
}

void warn_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                       const std::string& entity, std::vector<std::string>* warnings) {
    if (!warnings) return;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool found = false;
        for (const char* k : known)
            if (it.key() == k) { found = true; break; }
        if (!found) warnings->push_back("unknown field '" + entity + "." + it.key() + "' ignored");
    }
}

bool valid_class_code(const std::string& code) {
    if (code.size() < 2) return false;
    char c = code[0];
    if (c != 'w' && c != 'i' && c != 'p' && c != 'a') return false;
    if (code[1] == '0') return false;
    for (std::size_t i = 1; i < code.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(code[i]))) return false;
    return true;
}

double safe_area(const QuadBox& box) {
    return polygon_area(box.polygon());
}

} // namespace

namespace {

SceneRecord parse_scene_object(const json& j, std::vector<std::string>* warnings);

} // namespace

SceneRecord parse_scene(const std::string& line, std::vector<std::string>* warnings) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError("malformed record: " + std::string(e.what()), e.byte);
    }
    if (!j.is_object()) throw ValidationError("record is not an object");
    try {
        return parse_scene_object(j, warnings);
    } catch (const Error&) {
        throw;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("record field type error: ") + e.what());
    }
}

namespace {

SceneRecord parse_scene_object(const json& j, std::vector<std::string>* warnings) {
    SceneRecord scene;
    if (!j.contains("image_id") || !j["image_id"].is_string())
        throw ValidationError("missing or non-string field image_id");
    scene.image_id = j["image_id"].get<std::string>();
    for (const char* dim : {"width", "height"}) {
        if (!j.contains(dim) || !j[dim].is_number())
            throw ValidationError(std::string("missing or non-numeric field ") + dim);
    }
    scene.width = j["width"].get<int>();
    scene.height = j["height"].get<int>();
    warn_unknown_keys(j, {"image_id", "width", "height", "symbols", "texts", "panels",
                          "descriptions"},
                      scene.image_id, warnings);

    auto get_list = [&](const char* key) -> const json& {
        static const json empty = json::array();
        if (!j.contains(key)) return empty;
        if (!j[key].is_array()) throw ValidationError(std::string(key) + ": expected array");
        return j[key];
    };

    int idx = 0;
    for (const json& e : get_list("symbols")) {
        std::string entity = "symbols[" + std::to_string(idx++) + "]";
        if (!e.is_object()) throw ValidationError(entity + ": expected object");
        if (!e.contains("box")) throw ValidationError(entity + ": missing box");
        if (!e.contains("class_code") || !e["class_code"].is_string())
            throw ValidationError(entity + ": missing or non-string class_code");
        SymbolAnnotation a;
        a.box = parse_box(e["box"], entity);
        a.class_code = e["class_code"].get<std::string>();
        a.ignored = e.value("ignored", false);
        a.score = e.value("score", 1.0);
        warn_unknown_keys(e, {"box", "class_code", "ignored", "score"}, entity, warnings);
        scene.symbols.push_back(std::move(a));
    }
    idx = 0;
    for (const json& e : get_list("texts")) {
        std::string entity = "texts[" + std::to_string(idx++) + "]";
        if (!e.is_object()) throw ValidationError(entity + ": expected object");
        if (!e.contains("box")) throw ValidationError(entity + ": missing box");
        if (!e.contains("transcription") || !e["transcription"].is_string())
            throw ValidationError(entity + ": missing or non-string transcription");
        TextAnnotation a;
        a.box = parse_box(e["box"], entity);
        a.transcription = e["transcription"].get<std::string>();
        a.ignored = e.value("ignored", a.transcription == "###");
        a.score = e.value("score", 1.0);
        warn_unknown_keys(e, {"box", "transcription", "ignored", "score"}, entity, warnings);
        scene.texts.push_back(std::move(a));
    }
    idx = 0;
    for (const json& e : get_list("panels")) {
        std::string entity = "panels[" + std::to_string(idx++) + "]";
        if (!e.is_object()) throw ValidationError(entity + ": expected object");
        if (!e.contains("box")) throw ValidationError(entity + ": missing box");
        if (!e.contains("panel_class") || !e["panel_class"].is_number_integer())
            throw ValidationError(entity + ": missing or non-integer panel_class");
        if (!e.contains("panel_id") || !e["panel_id"].is_number_integer())
            throw ValidationError(entity + ": missing or non-integer panel_id");
        PanelAnnotation a;
        a.box = parse_box(e["box"], entity);
        a.panel_class = e["panel_class"].get<int>();
        if (a.panel_class < 1 || a.panel_class > 7)
            throw ValidationError(entity + ": panel_class out of range (1..7): " +
                                  std::to_string(a.panel_class));
        a.panel_id = e["panel_id"].get<int>();
        a.score = e.value("score", 1.0);
        warn_unknown_keys(e, {"box", "panel_class", "panel_id", "score"}, entity, warnings);
        scene.panels.push_back(std::move(a));
    }
    idx = 0;
    for (const json& e : get_list("descriptions")) {
        std::string entity = "descriptions[" + std::to_string(idx++) + "]";
        if (!e.is_object()) throw ValidationError(entity + ": expected object");
        if (!e.contains("panel_id") || !e["panel_id"].is_number_integer())
            throw ValidationError(entity + ": missing or non-integer panel_id");
        if (!e.contains("text") || !e["text"].is_string())
            throw ValidationError(entity + ": missing or non-string text");
        DescriptionAnnotation d;
        d.panel_id = e["panel_id"].get<int>();
        d.text = e["text"].get<std::string>();
        warn_unknown_keys(e, {"panel_id", "text"}, entity, warnings);
        scene.descriptions.push_back(std::move(d));
    }
    return scene;
}

} // namespace

std::string serialize_scene(const SceneRecord& scene, bool with_scores) {
    std::string out = "{\"image_id\":";
    escape_json_string(scene.image_id, out);
    out += ",\"width\":" + std::to_string(scene.width);
    out += ",\"height\":" + std::to_string(scene.height);

    out += ",\"symbols\":[";
    for (std::size_t i = 0; i < scene.symbols.size(); ++i) {
        const auto& a = scene.symbols[i];
        if (i) out += ",";
        out += "{\"box\":";
        append_box(a.box, out);
        out += ",\"class_code\":";
        escape_json_string(a.class_code, out);
        out += ",\"ignored\":";
        out += a.ignored ? "true" : "false";
        if (with_scores) out += ",\"score\":" + format_fixed6(a.score);
        out += "}";
    }
    out += "],\"texts\":[";
    for (std::size_t i = 0; i < scene.texts.size(); ++i) {
        const auto& a = scene.texts[i];
        if (i) out += ",";
        out += "{\"box\":";
        append_box(a.box, out);
        out += ",\"transcription\":";
        escape_json_string(a.transcription, out);
        out += ",\"ignored\":";
        out += a.ignored ? "true" : "false";
        if (with_scores) out += ",\"score\":" + format_fixed6(a.score);
        out += "}";
    }
    out += "],\"panels\":[";
    for (std::size_t i = 0; i < scene.panels.size(); ++i) {
        const auto& a = scene.panels[i];
        if (i) out += ",";
        out += "{\"box\":";
        append_box(a.box, out);
        out += ",\"panel_class\":" + std::to_string(a.panel_class);
        out += ",\"panel_id\":" + std::to_string(a.panel_id);
        if (with_scores) out += ",\"score\":" + format_fixed6(a.score);
        out += "}";
    }
    out += "],\"descriptions\":[";
    for (std::size_t i = 0; i < scene.descriptions.size(); ++i) {
        const auto& d = scene.descriptions[i];
        if (i) out += ",";
        out += "{\"panel_id\":" + std::to_string(d.panel_id) + ",\"text\":";
        escape_json_string(d.text, out);
        out += "}";
    }
    out += "]}";
    return out;
}

namespace {

void check_box(const QuadBox& box, int width, int height, const std::string& entity,
               std::vector<Violation>& out) {
    for (const Point2D& c : box.corners) {
        if (c.x < 0 || c.y < 0 || c.x > width || c.y > height) {
            out.push_back({entity, "box outside image",
                           entity + ": corner (" + format_fixed6(c.x) + "," + format_fixed6(c.y) +
                               ") outside [0," + std::to_string(width) + "]x[0," +
                               std::to_string(height) + "]"});
            break;
        }
    }
    if (!is_simple_quad(box))
        out.push_back({entity, "non-simple box polygon", entity + ": box self-intersects"});
    else if (safe_area(box) <= 0.0)
        out.push_back({entity, "non-positive box area", entity + ": box area is zero"});
}

} // namespace

std::vector<Violation> validate_scene(const SceneRecord& scene) {
    std::vector<Violation> out;
    if (scene.width <= 0 || scene.height <= 0)
        out.push_back({"scene", "non-positive image size",
                       scene.image_id + ": width/height must be positive"});

    for (std::size_t i = 0; i < scene.symbols.size(); ++i) {
        const auto& a = scene.symbols[i];
        std::string entity = "symbols[" + std::to_string(i) + "]";
        check_box(a.box, scene.width, scene.height, entity, out);
        if (!valid_class_code(a.class_code)) {
            std::string rule = (!a.class_code.empty() &&
                                std::string("wipa").find(a.class_code[0]) == std::string::npos)
                                   ? "unknown symbol type letter"
                                   : "malformed class_code";
            out.push_back({entity, rule, entity + ": class_code '" + a.class_code + "'"});
        }
    }
    for (std::size_t i = 0; i < scene.texts.size(); ++i) {
        const auto& a = scene.texts[i];
        std::string entity = "texts[" + std::to_string(i) + "]";
        check_box(a.box, scene.width, scene.height, entity, out);
        if (a.ignored != (a.transcription == "###"))
            out.push_back({entity, "ignored flag inconsistent with ### marker",
                           entity + ": ignored=" + (a.ignored ? "true" : "false") +
                               " transcription='" + a.transcription + "'"});
    }
    std::set<int> panel_ids;
    for (std::size_t i = 0; i < scene.panels.size(); ++i) {
        const auto& a = scene.panels[i];
        std::string entity = "panels[" + std::to_string(i) + "]";
        check_box(a.box, scene.width, scene.height, entity, out);
        if (a.panel_class < 1 || a.panel_class > 7)
            out.push_back({entity, "panel_class out of range",
                           entity + ": panel_class " + std::to_string(a.panel_class)});
        if (!panel_ids.insert(a.panel_id).second)
            out.push_back({entity, "duplicate panel_id",
                           entity + ": panel_id " + std::to_string(a.panel_id)});
    }
    for (std::size_t i = 0; i < scene.descriptions.size(); ++i) {
        const auto& d = scene.descriptions[i];
        std::string entity = "descriptions[" + std::to_string(i) + "]";
        if (!panel_ids.count(d.panel_id))
            out.push_back({entity, "dangling panel reference",
                           entity + ": panel_id " + std::to_string(d.panel_id) +
                               " has no panel"});
        if (d.text.empty())
            out.push_back({entity, "empty description text", entity + ": text is empty"});
    }
    return out;
}

std::vector<Violation> validate_corpus(const Corpus& corpus) {
    std::vector<Violation> out;
    std::set<std::string> image_ids;
    for (std::size_t s = 0; s < corpus.scenes.size(); ++s) {
        const SceneRecord& scene = corpus.scenes[s];
        auto v = validate_scene(scene);
        for (auto& violation : v) {
            violation.entity = scene.image_id + "." + violation.entity;
            out.push_back(std::move(violation));
        }
        if (!image_ids.insert(scene.image_id).second)
            out.push_back({scene.image_id, "duplicate image_id", scene.image_id});
        for (const auto& a : scene.symbols)
            if (!corpus.symbol_vocab.empty() && !corpus.symbol_vocab.count(a.class_code))
                out.push_back({scene.image_id, "class_code not in vocab",
                               scene.image_id + ": '" + a.class_code + "'"});
        for (const auto& p : scene.panels)
            if (!corpus.panel_vocab.empty() && !corpus.panel_vocab.count(p.panel_class))
                out.push_back({scene.image_id, "panel_class not in vocab",
                               scene.image_id + ": " + std::to_string(p.panel_class)});
    }
    return out;
}

CategoryHistogram corpus_stats(const Corpus& corpus) {
    CategoryHistogram h;
    h.scene_count = static_cast<std::int64_t>(corpus.scenes.size());
    double symbol_area = 0.0, text_area = 0.0, panel_area = 0.0;
    std::int64_t symbol_n = 0, text_n = 0, panel_n = 0;
    for (const SceneRecord& scene : corpus.scenes) {
        for (const auto& a : scene.symbols) {
            ++h.symbol_counts[a.class_code];
            symbol_area += safe_area(a.box);
            ++symbol_n;
        }
        for (const auto& t : scene.texts) {
            if (t.ignored) {
                ++h.ignored_text_count;
            } else {
                ++h.text_count;
                h.char_count += static_cast<std::int64_t>(utf8_decode(t.transcription).size());
            }
            text_area += safe_area(t.box);
            ++text_n;
        }
        for (const auto& p : scene.panels) {
            ++h.panel_counts[p.panel_class];
            panel_area += safe_area(p.box);
            ++panel_n;
        }
        h.description_count += static_cast<std::int64_t>(scene.descriptions.size());
    }
    h.mean_symbol_area = symbol_n ? symbol_area / symbol_n : 0.0;
    h.mean_text_area = text_n ? text_area / text_n : 0.0;
    h.mean_panel_area = panel_n ? panel_area / panel_n : 0.0;
    return h;
}

namespace {

int dominant_panel_class(const SceneRecord& scene) {
    if (scene.panels.empty()) return 0; // stratum for panel-free scenes
    std::array<int, 8> counts{};
    for (const auto& p : scene.panels)
        if (p.panel_class >= 1 && p.panel_class <= 7) ++counts[p.panel_class];
    int best = 1;
    for (int c = 2; c <= 7; ++c)
        if (counts[c] > counts[best]) best = c;
    return best;
}

} // namespace

SplitResult split_corpus(const Corpus& corpus, double test_fraction, std::uint64_t seed,
                         double tolerance) {
    const std::size_t n = corpus.scenes.size();
    if (n < 2) throw ConfigError("split_corpus: corpus must contain at least 2 scenes");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("split_corpus: test_fraction must lie in (0,1)");

    const std::int64_t test_total =
        std::llround(test_fraction * static_cast<double>(n));
    if (test_total < 1 || test_total >= static_cast<std::int64_t>(n))
        throw ConfigError("split_corpus: fraction leaves an empty subset");

    // strata by dominant panel class, shuffled deterministically
    std::map<int, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < n; ++i)
        strata[dominant_panel_class(corpus.scenes[i])].push_back(i);
    for (auto& [cls, members] : strata) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(cls) + 101));
        for (std::size_t i = members.size(); i > 1; --i)
            std::swap(members[i - 1], members[rng.uniform_index(i)]);
    }

    // largest-remainder apportionment of the test quota across strata
    struct Share {
        int cls;
        std::int64_t quota;
        double remainder;
        std::size_t size;
    };
    std::vector<Share> shares;
    std::int64_t assigned = 0;
    for (auto& [cls, members] : strata) {
        double ideal = static_cast<double>(test_total) * members.size() / static_cast<double>(n);
        std::int64_t q = static_cast<std::int64_t>(std::floor(ideal));
        q = std::min<std::int64_t>(q, static_cast<std::int64_t>(members.size()));
        shares.push_back({cls, q, ideal - std::floor(ideal), members.size()});
        assigned += q;
    }
    std::sort(shares.begin(), shares.end(), [](const Share& a, const Share& b) {
        if (a.remainder != b.remainder) return a.remainder > b.remainder;
        return a.cls < b.cls;
    });
    for (auto& s : shares) {
        if (assigned >= test_total) break;
        if (s.quota < static_cast<std::int64_t>(s.size)) {
            ++s.quota;
            ++assigned;
        }
    }
    // still short (tiny strata): top up wherever room remains
    for (auto& s : shares) {
        while (assigned < test_total && s.quota < static_cast<std::int64_t>(s.size)) {
            ++s.quota;
            ++assigned;
        }
    }

    std::vector<bool> in_test(n, false);
    for (const auto& s : shares) {
        const auto& members = strata[s.cls];
        for (std::int64_t k = 0; k < s.quota; ++k) in_test[members[static_cast<std::size_t>(k)]] = true;
    }

    // directed swap refinement toward the tolerance, with incremental counts
    std::vector<std::array<int, 8>> scene_counts(n);
    for (std::size_t i = 0; i < n; ++i) {
        scene_counts[i].fill(0);
        for (const auto& p : corpus.scenes[i].panels)
            if (p.panel_class >= 1 && p.panel_class <= 7) ++scene_counts[i][p.panel_class];
    }
    std::array<std::int64_t, 8> cnt_train{}, cnt_test{};
    std::int64_t tot_train = 0, tot_test = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto& cnt = in_test[i] ? cnt_test : cnt_train;
        auto& tot = in_test[i] ? tot_test : tot_train;
        for (int c = 1; c <= 7; ++c) {
            cnt[c] += scene_counts[i][c];
            tot += scene_counts[i][c];
        }
    }
    auto current_gap = [&](int* worst) {
        double worst_gap = 0.0;
        for (int c = 1; c <= 7; ++c) {
            double a = tot_train ? static_cast<double>(cnt_train[c]) / tot_train : 0.0;
            double b = tot_test ? static_cast<double>(cnt_test[c]) / tot_test : 0.0;
            if (std::abs(a - b) > worst_gap) {
                worst_gap = std::abs(a - b);
                if (worst) *worst = c;
            }
        }
        return worst_gap;
    };
    auto apply_swap = [&](std::size_t a, std::size_t b) { // a: train -> test, b: test -> train
        std::int64_t delta = 0;
        for (int c = 1; c <= 7; ++c) {
            cnt_train[c] += scene_counts[b][c] - scene_counts[a][c];
            cnt_test[c] += scene_counts[a][c] - scene_counts[b][c];
            delta += scene_counts[a][c] - scene_counts[b][c];
        }
        tot_train -= delta;
        tot_test += delta;
        in_test[a] = true;
        in_test[b] = false;
    };
    int worst_class = 0;
    double gap = current_gap(&worst_class);
    for (int iter = 0; iter < 50 && gap > tolerance; ++iter) {
        double ftr = tot_train ? static_cast<double>(cnt_train[worst_class]) / tot_train : 0.0;
        double fte = tot_test ? static_cast<double>(cnt_test[worst_class]) / tot_test : 0.0;
        // move a worst_class-rich scene toward the poor side
        bool rich_is_train = ftr > fte;
        std::size_t rich = n, poor = n;
        int rich_best = -1, poor_best = 1 << 20;
        for (std::size_t i = 0; i < n; ++i) {
            if (in_test[i] != rich_is_train) { // candidate on the rich side
                if (scene_counts[i][worst_class] > rich_best) {
                    rich_best = scene_counts[i][worst_class];
                    rich = i;
                }
            } else { // candidate on the poor side
                if (scene_counts[i][worst_class] < poor_best) {
                    poor_best = scene_counts[i][worst_class];
                    poor = i;
                }
            }
        }
        if (rich == n || poor == n || rich_best <= poor_best) break;
        std::size_t train_scene = rich_is_train ? rich : poor;
        std::size_t test_scene = rich_is_train ? poor : rich;
        double before = gap;
        apply_swap(train_scene, test_scene);
        gap = current_gap(&worst_class);
        if (gap >= before) { // undo a non-improving swap and stop
            apply_swap(test_scene, train_scene);
            gap = current_gap(&worst_class);
            break;
        }
    }

    SplitResult result;
    result.train.symbol_vocab = corpus.symbol_vocab;
    result.train.panel_vocab = corpus.panel_vocab;
    result.test.symbol_vocab = corpus.symbol_vocab;
    result.test.panel_vocab = corpus.panel_vocab;
    for (std::size_t i = 0; i < n; ++i)
        (in_test[i] ? result.test : result.train).scenes.push_back(corpus.scenes[i]);
    if (gap > tolerance)
        result.warnings.push_back("split tolerance " + format_fixed6(tolerance) +
                                  " unachievable; worst panel_class " +
                                  std::to_string(worst_class) + " gap " + format_fixed6(gap));
    return result;
}

Corpus read_corpus(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path);
    Corpus corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            corpus.scenes.push_back(parse_scene(line, warnings));
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what(), lineno);
        }
    }
    return corpus;
}

void write_corpus_file(const std::string& path, const Corpus& corpus, bool with_scores) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (const SceneRecord& s : corpus.scenes) out << serialize_scene(s, with_scores) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

std::map<std::string, std::string> read_symbol_vocab(const std::string& path) {
    json j = json::parse(read_text_file(path));
    std::map<std::string, std::string> vocab;
    for (auto it = j.begin(); it != j.end(); ++it) vocab[it.key()] = it.value().get<std::string>();
    return vocab;
}

std::map<int, std::string> read_panel_vocab(const std::string& path) {
    json j = json::parse(read_text_file(path));
    std::map<int, std::string> vocab;
    for (auto it = j.begin(); it != j.end(); ++it)
        vocab[std::stoi(it.key())] = it.value().get<std::string>();
    return vocab;
}

void write_symbol_vocab(const std::string& path, const std::map<std::string, std::string>& vocab) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : vocab) {
        if (!first) out += ",";
        first = false;
        escape_json_string(k, out);
        out += ":";
        escape_json_string(v, out);
    }
    out += "}\n";
    write_text_file(path, out);
}

void write_panel_vocab(const std::string& path, const std::map<int, std::string>& vocab) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : vocab) {
        if (!first) out += ",";
        first = false;
        out += "\"" + std::to_string(k) + "\":";
        escape_json_string(v, out);
    }
    out += "}\n";
    write_text_file(path, out);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

} // namespace tsi
