#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tsi/detect_eval.hpp"
#include "tsi/errors.hpp"
#include "tsi/generator.hpp"
#include "tsi/interpreter.hpp"
#include "tsi/mask.hpp"
#include "tsi/report.hpp"
#include "tsi/scene.hpp"
#include "tsi/text_metrics.hpp"
#include "tsi/util.hpp"
#include "tsi/version.hpp"

namespace py = pybind11;

namespace {

tsi::QuadBox box_from_corners(const std::vector<std::pair<double, double>>& corners) {
    if (corners.size() != 4)
        throw tsi::ConfigError("box must have exactly 4 corners");
    tsi::QuadBox box;
    for (int i = 0; i < 4; ++i) box.corners[i] = {corners[i].first, corners[i].second};
    return box;
}

std::vector<std::pair<double, double>> polygon_to_pairs(const tsi::Polygon& poly) {
    std::vector<std::pair<double, double>> out;
    for (const auto& p : poly) out.emplace_back(p.x, p.y);
    return out;
}

tsi::TokenMode mode_from_name(const std::string& name) {
    if (name == "auto") return tsi::TokenMode::Auto;
    if (name == "cjk") return tsi::TokenMode::CjkChar;
    if (name == "ws") return tsi::TokenMode::Whitespace;
    throw tsi::ConfigError("tokenizer mode must be auto|cjk|ws");
}

tsi::SlotRules rules_from(const std::string& slot_rules_json) {
    if (slot_rules_json.empty()) return tsi::Grammar::builtin("en").slot_rules;
    return tsi::SlotRules::from_json(slot_rules_json);
}

} // namespace

PYBIND11_MODULE(_tsikit, m) {
    m.doc() = "deterministic traffic-scene annotation, interpretation, and evaluation core";
    m.attr("__version__") = tsi::kVersion;

    // geometry
    m.def("shrink_offset",
          [](const std::vector<std::pair<double, double>>& corners) {
              return tsi::shrink_offset(box_from_corners(corners));
          },
          py::arg("box"), "Half the minimum centroid-to-boundary distance of a 4-corner box.");
    m.def("expand_offset",
          [](const std::vector<std::pair<double, double>>& polygon) {
              tsi::Polygon poly;
              for (const auto& [x, y] : polygon) poly.push_back({x, y});
              return tsi::expand_offset(poly);
          },
          py::arg("polygon"), "Minimum centroid-to-boundary distance of a polygon.");
    m.def("shrink_contour",
          [](const std::vector<std::pair<double, double>>& corners, double d) {
              return polygon_to_pairs(tsi::shrink_contour(box_from_corners(corners), d));
          },
          py::arg("box"), py::arg("d"));
    m.def("expand_contour",
          [](const std::vector<std::pair<double, double>>& polygon, double d) {
              tsi::Polygon poly;
              for (const auto& [x, y] : polygon) poly.push_back({x, y});
              return polygon_to_pairs(tsi::expand_contour(poly, d));
          },
          py::arg("polygon"), py::arg("d"));
    m.def("iou",
          [](const std::vector<std::pair<double, double>>& a,
             const std::vector<std::pair<double, double>>& b) {
              return tsi::iou(box_from_corners(a), box_from_corners(b));
          },
          py::arg("a"), py::arg("b"));
    m.def("sample_dense_contour",
          [](const std::vector<std::pair<double, double>>& corners, int n) {
              auto contour = tsi::sample_dense_contour(box_from_corners(corners), n);
              return polygon_to_pairs(contour.points);
          },
          py::arg("box"), py::arg("n"));

    // masks
    m.def("rasterize",
          [](const std::vector<std::pair<double, double>>& polygon, int height, int width) {
              tsi::Polygon poly;
              for (const auto& [x, y] : polygon) poly.push_back({x, y});
              tsi::MaskGrid mask = tsi::rasterize(poly, height, width);
              std::vector<std::vector<int>> rows(static_cast<std::size_t>(mask.height));
              for (int y = 0; y < mask.height; ++y)
                  for (int x = 0; x < mask.width; ++x)
                      rows[static_cast<std::size_t>(y)].push_back(mask.at(x, y));
              return rows;
          },
          py::arg("polygon"), py::arg("height"), py::arg("width"));
    m.def("dice_coefficient",
          [](const std::vector<std::vector<int>>& a, const std::vector<std::vector<int>>& b) {
              auto to_mask = [](const std::vector<std::vector<int>>& rows) {
                  tsi::MaskGrid mask(static_cast<int>(rows.size()),
                                     rows.empty() ? 0 : static_cast<int>(rows[0].size()));
                  for (std::size_t y = 0; y < rows.size(); ++y)
                      for (std::size_t x = 0; x < rows[y].size(); ++x)
                          mask.at(static_cast<int>(x), static_cast<int>(y)) =
                              rows[y][x] ? 1 : 0;
                  return mask;
              };
              return tsi::dice_coefficient(to_mask(a), to_mask(b));
          },
          py::arg("a"), py::arg("b"));

    // text metrics
    m.def("tokenize",
          [](const std::string& text, const std::string& mode) {
              return tsi::tokenize(text, mode_from_name(mode)).tokens;
          },
          py::arg("text"), py::arg("mode") = "auto");
    m.def("rouge_n",
          [](const std::vector<std::string>& cand, const std::vector<std::string>& ref, int n) {
              return tsi::rouge_n({cand, tsi::TokenMode::Whitespace},
                                  {ref, tsi::TokenMode::Whitespace}, n);
          },
          py::arg("candidate"), py::arg("reference"), py::arg("n"));
    m.def("rouge_l",
          [](const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
              return tsi::rouge_l({cand, tsi::TokenMode::Whitespace},
                                  {ref, tsi::TokenMode::Whitespace});
          },
          py::arg("candidate"), py::arg("reference"));
    m.def("bleu_4",
          [](const std::vector<std::vector<std::string>>& cands,
             const std::vector<std::vector<std::string>>& refs) {
              std::vector<tsi::TokenSeq> c, r;
              for (const auto& t : cands) c.push_back({t, tsi::TokenMode::Whitespace});
              for (const auto& t : refs) r.push_back({t, tsi::TokenMode::Whitespace});
              return tsi::bleu_4(c, r);
          },
          py::arg("candidates"), py::arg("references"));
    m.def("extract_frame",
          [](const std::string& text, const std::string& slot_rules_json,
             const std::string& mode) {
              return tsi::extract_frame(text, rules_from(slot_rules_json), mode_from_name(mode))
                  .skeleton;
          },
          py::arg("text"), py::arg("slot_rules_json") = "", py::arg("mode") = "auto");
    m.def("soft_accuracy",
          [](const std::vector<std::string>& cands, const std::vector<std::string>& refs,
             const std::string& slot_rules_json, const std::string& mode) {
              return tsi::soft_accuracy(cands, refs, rules_from(slot_rules_json),
                                        mode_from_name(mode));
          },
          py::arg("candidates"), py::arg("references"), py::arg("slot_rules_json") = "",
          py::arg("mode") = "auto");
    m.def("evaluate_descriptions",
          [](const std::vector<std::string>& cands, const std::vector<std::string>& refs,
             const std::string& slot_rules_json, const std::string& mode) {
              tsi::MetricScores s = tsi::evaluate_descriptions(
                  cands, refs, rules_from(slot_rules_json), mode_from_name(mode));
              py::dict out;
              out["R1"] = s.rouge1;
              out["R2"] = s.rouge2;
              out["Rl"] = s.rougeL;
              out["B4"] = s.bleu4;
              out["SA"] = s.soft_accuracy;
              return out;
          },
          py::arg("candidates"), py::arg("references"), py::arg("slot_rules_json") = "",
          py::arg("mode") = "auto");

    // detection / recognition
    m.def("prf",
          [](std::int64_t tp, std::int64_t fp, std::int64_t fn) {
              tsi::MatchOutcome o;
              o.tp = tp;
              o.fp = fp;
              o.fn = fn;
              tsi::PRF r = tsi::prf(o);
              return py::make_tuple(r.precision, r.recall, r.f_measure);
          },
          py::arg("tp"), py::arg("fp"), py::arg("fn"));
    m.def("cross_entropy",
          [](const std::vector<double>& prob, std::size_t target) {
              return tsi::cross_entropy(prob, target);
          },
          py::arg("prob"), py::arg("target_index"));

    // scenes and corpora
    m.def("parse_scene_canonical",
          [](const std::string& line) { return tsi::serialize_scene(tsi::parse_scene(line)); },
          py::arg("line"), "Parses one corpus line and returns its canonical serialization.");
    m.def("validate_scene",
          [](const std::string& line) {
              std::vector<std::string> out;
              for (const auto& v : tsi::validate_scene(tsi::parse_scene(line)))
                  out.push_back(v.entity + ": " + v.rule);
              return out;
          },
          py::arg("line"));
    m.def("interpret_scene",
          [](const std::string& line, const std::string& lang) {
              tsi::Grammar grammar = tsi::Grammar::builtin(lang);
              tsi::InterpretOutcome out =
                  tsi::interpret_scene(tsi::parse_scene(line), grammar);
              py::list descs;
              for (const auto& d : out.descriptions) {
                  py::dict e;
                  e["panel_id"] = d.panel_id;
                  e["text"] = d.text;
                  descs.append(e);
              }
              return descs;
          },
          py::arg("line"), py::arg("lang") = "en");

    // generation / perturbation / evaluation at file level
    m.def("generate_corpus_file",
          [](int n_scenes, std::uint64_t seed, const std::string& out_dir,
             const std::string& lang, int workers) {
              tsi::GeneratorConfig config;
              config.n_scenes = n_scenes;
              config.seed = seed;
              config.lang = lang;
              tsi::GeneratedCorpus g = tsi::generate_corpus(config, workers);
              tsi::write_corpus_file(out_dir + "/corpus.jsonl", g.corpus);
              tsi::write_symbol_vocab(out_dir + "/symbol_vocab.json", g.corpus.symbol_vocab);
              tsi::write_panel_vocab(out_dir + "/panel_vocab.json", g.corpus.panel_vocab);
              tsi::write_text_file(out_dir + "/slot_rules.json",
                                   tsi::Grammar::builtin(lang).slot_rules.to_json() + "\n");
              return out_dir + "/corpus.jsonl";
          },
          py::arg("n_scenes"), py::arg("seed"), py::arg("out_dir"), py::arg("lang") = "en",
          py::arg("workers") = 1);
    m.def("perturb_corpus_file",
          [](const std::string& corpus_path, const std::string& profile_json, std::uint64_t seed,
             const std::string& predictions_path, const std::string& log_path) {
              tsi::Corpus corpus = tsi::read_corpus(corpus_path);
              tsi::NoiseProfile profile = tsi::NoiseProfile::from_json(profile_json);
              std::string preds, logs;
              for (std::size_t i = 0; i < corpus.scenes.size(); ++i) {
                  tsi::PerturbResult r = tsi::perturb_predictions(corpus.scenes[i], profile,
                                                                  tsi::mix_seed(seed, i));
                  preds += tsi::serialize_scene(r.predictions, true) + "\n";
                  logs += r.log.to_json_line() + "\n";
              }
              tsi::write_text_file(predictions_path, preds);
              if (!log_path.empty()) tsi::write_text_file(log_path, logs);
          },
          py::arg("corpus_path"), py::arg("profile_json"), py::arg("seed"),
          py::arg("predictions_path"), py::arg("log_path") = "");
    m.def("interpret_corpus_file",
          [](const std::string& corpus_path, const std::string& out_path,
             const std::string& lang) {
              tsi::Corpus corpus = tsi::read_corpus(corpus_path);
              tsi::Grammar grammar = tsi::Grammar::builtin(lang);
              std::vector<tsi::DescriptionEntry> entries;
              for (const auto& scene : corpus.scenes) {
                  tsi::InterpretOutcome out = tsi::interpret_scene(scene, grammar);
                  for (const auto& d : out.descriptions)
                      entries.push_back({scene.image_id, d.panel_id, d.text});
              }
              tsi::write_text_file(out_path, tsi::descriptions_to_jsonl(entries));
          },
          py::arg("corpus_path"), py::arg("out_path"), py::arg("lang") = "en");
    m.def("evaluate_files",
          [](const std::string& gt_path, const std::string& pred_path,
             const std::string& pred_desc_path, const std::string& slot_rules_json,
             double iou_thresh) {
              tsi::Corpus gt = tsi::read_corpus(gt_path);
              tsi::FullReport report;
              if (!pred_path.empty()) {
                  tsi::Corpus pred = tsi::read_corpus(pred_path);
                  report.has_detection = true;
                  report.has_recognition = true;
                  report.detection = tsi::evaluate_detection(gt, pred, iou_thresh);
                  report.recognition = tsi::evaluate_recognition(gt, pred, iou_thresh);
              }
              if (!pred_desc_path.empty()) {
                  report.has_interpretation = true;
                  report.interpretation = tsi::evaluate_interpretation(
                      gt, tsi::read_descriptions_file(pred_desc_path),
                      rules_from(slot_rules_json));
              }
              report.provenance.finalize_hash();
              return tsi::report_to_json(report);
          },
          py::arg("gt_path"), py::arg("pred_path") = "", py::arg("pred_desc_path") = "",
          py::arg("slot_rules_json") = "", py::arg("iou_thresh") = 0.5);
    m.def("builtin_slot_rules",
          [](const std::string& lang) { return tsi::Grammar::builtin(lang).slot_rules.to_json(); },
          py::arg("lang") = "en");
    m.def("corpus_stats_file",
          [](const std::string& path) {
              tsi::CategoryHistogram h = tsi::corpus_stats(tsi::read_corpus(path));
              py::dict out;
              py::dict symbols;
              for (const auto& [code, n] : h.symbol_counts) symbols[py::str(code)] = n;
              py::dict panels;
              for (const auto& [cls, n] : h.panel_counts)
                  panels[py::str(std::to_string(cls))] = n;
              out["scene_count"] = h.scene_count;
              out["symbol_counts"] = symbols;
              out["panel_counts"] = panels;
              out["text_count"] = h.text_count;
              out["ignored_text_count"] = h.ignored_text_count;
              out["char_count"] = h.char_count;
              out["description_count"] = h.description_count;
              out["mean_symbol_area"] = h.mean_symbol_area;
              out["mean_text_area"] = h.mean_text_area;
              out["mean_panel_area"] = h.mean_panel_area;
              return out;
          },
          py::arg("path"));
    m.def("validate_corpus_file",
          [](const std::string& path, const std::string& symbol_vocab_path,
             const std::string& panel_vocab_path) {
              tsi::Corpus corpus = tsi::read_corpus(path);
              if (!symbol_vocab_path.empty())
                  corpus.symbol_vocab = tsi::read_symbol_vocab(symbol_vocab_path);
              if (!panel_vocab_path.empty())
                  corpus.panel_vocab = tsi::read_panel_vocab(panel_vocab_path);
              std::vector<std::string> out;
              for (const auto& v : tsi::validate_corpus(corpus))
                  out.push_back(v.entity + ": " + v.rule);
              return out;
          },
          py::arg("path"), py::arg("symbol_vocab_path") = "", py::arg("panel_vocab_path") = "");
    m.def("split_corpus_file",
          [](const std::string& corpus_path, double test_fraction, std::uint64_t seed,
             const std::string& train_path, const std::string& test_path) {
              tsi::Corpus corpus = tsi::read_corpus(corpus_path);
              tsi::SplitResult r = tsi::split_corpus(corpus, test_fraction, seed);
              tsi::write_corpus_file(train_path, r.train);
              tsi::write_corpus_file(test_path, r.test);
              return py::make_tuple(r.train.scenes.size(), r.test.scenes.size(), r.warnings);
          },
          py::arg("corpus_path"), py::arg("test_fraction"), py::arg("seed"),
          py::arg("train_path"), py::arg("test_path"));

    py::register_exception<tsi::Error>(m, "TsiError");
}
