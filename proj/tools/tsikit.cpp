// tsikit: deterministic generation, perturbation, interpretation, and
// evaluation of traffic-scene sign annotations.
//
// Exit codes: 0 success, 2 usage/config/malformed input, 3 I/O failure,
// 4 mismatched inputs.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsi/detect_eval.hpp"
#include "tsi/errors.hpp"
#include "tsi/generator.hpp"
#include "tsi/interpreter.hpp"
#include "tsi/report.hpp"
#include "tsi/scene.hpp"
#include "tsi/util.hpp"
#include "tsi/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitMismatch = 4;

struct GlobalOptions {
    std::uint64_t seed = 0;
    int workers = 1;
    std::string tokenizer = "auto";
    double iou_thresh = 0.5;
    std::string config_path;
    std::string lang = "en";
    bool stamp = false;
};

tsi::TokenMode tokenizer_mode(const std::string& name) {
    if (name == "auto") return tsi::TokenMode::Auto;
    if (name == "cjk") return tsi::TokenMode::CjkChar;
    if (name == "ws") return tsi::TokenMode::Whitespace;
    throw tsi::ConfigError("unknown tokenizer mode '" + name + "' (auto|cjk|ws)");
}

struct GlobalOptionFlags {
    CLI::Option* seed = nullptr;
    CLI::Option* workers = nullptr;
    CLI::Option* tokenizer = nullptr;
    CLI::Option* iou_thresh = nullptr;
    CLI::Option* lang = nullptr;
    bool seed_from_config = false;
};

// Config file (and TSI_KIT_CONFIG fallback) provides defaults; explicit flags win.
void load_config_defaults(GlobalOptions& opts, GlobalOptionFlags& flags,
                          const std::string& explicit_path) {
    std::string path = explicit_path;
    if (path.empty()) {
        if (const char* env = std::getenv("TSI_KIT_CONFIG")) path = env;
    }
    if (path.empty()) return;
    if (!fs::exists(path)) {
        if (!explicit_path.empty()) throw tsi::IoError("config file not found: " + explicit_path);
        return;
    }
    try {
        json j = json::parse(tsi::read_text_file(path));
        if (j.contains("seed") && !flags.seed->count()) {
            opts.seed = j["seed"].get<std::uint64_t>();
            flags.seed_from_config = true;
        }
        if (j.contains("workers") && !flags.workers->count())
            opts.workers = j["workers"].get<int>();
        if (j.contains("tokenizer") && !flags.tokenizer->count())
            opts.tokenizer = j["tokenizer"].get<std::string>();
        if (j.contains("iou_thresh") && !flags.iou_thresh->count())
            opts.iou_thresh = j["iou_thresh"].get<double>();
        if (j.contains("lang") && !flags.lang->count()) opts.lang = j["lang"].get<std::string>();
    } catch (const json::exception& e) {
        throw tsi::ConfigError("config file " + path + ": " + e.what());
    }
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw tsi::IoError("cannot create output directory: " + dir);
}

std::string timestamp_now() {
    char buf[32];
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// deterministic per-scene fan-out preserving output order
template <typename Fn>
void parallel_for_scenes(std::size_t n, int workers, Fn&& fn) {
    const int n_workers = std::max(1, workers);
    if (n_workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) break;
                try {
                    fn(i);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!failed.exchange(true)) first_error = e.what();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed.load()) throw tsi::Error(first_error);
}

int cmd_gen(const GlobalOptions& gopts, const tsi::GeneratorConfig& config,
            const std::string& out_dir) {
    ensure_out_dir(out_dir);
    tsi::GeneratedCorpus generated = tsi::generate_corpus(config, gopts.workers);
    for (const std::string& w : generated.warnings) std::cerr << "warning: " << w << "\n";

    tsi::write_corpus_file(out_dir + "/corpus.jsonl", generated.corpus);
    tsi::write_symbol_vocab(out_dir + "/symbol_vocab.json", generated.corpus.symbol_vocab);
    tsi::write_panel_vocab(out_dir + "/panel_vocab.json", generated.corpus.panel_vocab);

    const tsi::Grammar grammar = tsi::Grammar::builtin(config.lang);
    tsi::write_text_file(out_dir + "/slot_rules.json", grammar.slot_rules.to_json() + "\n");

    std::string oracle;
    for (const auto& o : generated.oracles) {
        json j;
        j["image_id"] = o.image_id;
        j["clusters"] = json::array();
        for (const auto& c : o.clusters)
            j["clusters"].push_back({{"panel_id", c.panel_id}, {"members", c.members}});
        oracle += j.dump();
        oracle += "\n";
    }
    tsi::write_text_file(out_dir + "/oracle.jsonl", oracle);
    std::cout << "wrote " << generated.corpus.scenes.size() << " scenes to " << out_dir
              << "/corpus.jsonl\n";
    return kExitOk;
}

int cmd_split(const std::string& input, double fraction, std::uint64_t seed, double tolerance,
              const std::string& out_dir) {
    ensure_out_dir(out_dir);
    tsi::Corpus corpus = tsi::read_corpus(input);
    tsi::SplitResult split = tsi::split_corpus(corpus, fraction, seed, tolerance);
    for (const std::string& w : split.warnings) std::cerr << "warning: " << w << "\n";
    tsi::write_corpus_file(out_dir + "/train.jsonl", split.train);
    tsi::write_corpus_file(out_dir + "/test.jsonl", split.test);
    std::cout << "split " << corpus.scenes.size() << " scenes into " << split.train.scenes.size()
              << " train / " << split.test.scenes.size() << " test\n";
    return kExitOk;
}

int cmd_perturb(const GlobalOptions& gopts, const std::string& input,
                const std::string& profile_path, const tsi::NoiseProfile& flag_profile,
                bool profile_from_flags, std::uint64_t seed, const std::string& out_dir) {
    ensure_out_dir(out_dir);
    tsi::NoiseProfile profile = flag_profile;
    if (!profile_path.empty()) {
        profile = tsi::NoiseProfile::from_json(tsi::read_text_file(profile_path));
        if (profile_from_flags)
            std::cerr << "warning: --profile overrides individual noise flags\n";
    }
    tsi::Corpus corpus = tsi::read_corpus(input);
    std::vector<std::string> pred_lines(corpus.scenes.size());
    std::vector<std::string> log_lines(corpus.scenes.size());
    parallel_for_scenes(corpus.scenes.size(), gopts.workers, [&](std::size_t i) {
        tsi::PerturbResult r = tsi::perturb_predictions(corpus.scenes[i], profile,
                                                        tsi::mix_seed(seed, i));
        pred_lines[i] = tsi::serialize_scene(r.predictions, /*with_scores=*/true);
        log_lines[i] = r.log.to_json_line();
    });
    std::string preds, logs;
    for (std::size_t i = 0; i < pred_lines.size(); ++i) {
        preds += pred_lines[i];
        preds += "\n";
        logs += log_lines[i];
        logs += "\n";
    }
    tsi::write_text_file(out_dir + "/predictions.jsonl", preds);
    tsi::write_text_file(out_dir + "/perturb_log.jsonl", logs);
    std::cout << "perturbed " << corpus.scenes.size() << " scenes\n";
    return kExitOk;
}

int cmd_interpret(const GlobalOptions& gopts, const std::string& input,
                  const std::string& output, const tsi::Grammar& grammar) {
    tsi::Corpus corpus = tsi::read_corpus(input);
    std::vector<std::string> lines(corpus.scenes.size());
    std::vector<std::string> diags(corpus.scenes.size());
    std::atomic<std::size_t> failed_scenes{0};
    parallel_for_scenes(corpus.scenes.size(), gopts.workers, [&](std::size_t i) {
        tsi::InterpretOutcome outcome = tsi::interpret_scene(corpus.scenes[i], grammar);
        std::vector<tsi::DescriptionEntry> entries;
        for (const auto& d : outcome.descriptions)
            entries.push_back({corpus.scenes[i].image_id, d.panel_id, d.text});
        lines[i] = tsi::descriptions_to_jsonl(entries);
        std::string diag;
        for (const auto& d : outcome.diagnostics) {
            json j;
            j["image_id"] = corpus.scenes[i].image_id;
            j["diagnostic"] = d;
            diag += j.dump();
            diag += "\n";
        }
        diags[i] = diag;
        if (outcome.descriptions.empty() && !outcome.diagnostics.empty()) ++failed_scenes;
    });
    std::string body, diag_body;
    for (const auto& l : lines) body += l;
    for (const auto& d : diags) diag_body += d;
    tsi::write_text_file(output, body);
    if (!diag_body.empty()) {
        tsi::write_text_file(output + ".diag.jsonl", diag_body);
        std::cerr << "diagnostics written to " << output << ".diag.jsonl\n";
    }
    if (!corpus.scenes.empty() && failed_scenes.load() == corpus.scenes.size())
        throw tsi::Error("every scene failed to interpret");
    std::cout << "interpreted " << corpus.scenes.size() << " scenes\n";
    return kExitOk;
}

struct EvalPaths {
    std::string gt;
    std::string pred;
    std::string pred_desc;
    std::string slots;
    std::string json_out;
    std::string text_out;
};

void emit_report(const tsi::FullReport& report, const EvalPaths& paths) {
    std::string text = tsi::report_to_text(report);
    std::cout << text;
    if (!paths.json_out.empty()) tsi::write_text_file(paths.json_out, tsi::report_to_json(report) + "\n");
    if (!paths.text_out.empty()) tsi::write_text_file(paths.text_out, text);
}

tsi::Provenance make_provenance(const GlobalOptions& gopts, const EvalPaths& paths) {
    tsi::Provenance prov;
    prov.tool = std::string("tsikit ") + tsi::kVersion;
    prov.add_input("gt", paths.gt);
    if (!paths.pred.empty()) prov.add_input("pred", paths.pred);
    if (!paths.pred_desc.empty()) prov.add_input("pred_desc", paths.pred_desc);
    if (!paths.slots.empty()) prov.add_input("slots", paths.slots);
    prov.add_option("iou_thresh", tsi::format_fixed6(gopts.iou_thresh));
    prov.add_option("tokenizer", gopts.tokenizer);
    if (gopts.stamp) prov.timestamp = timestamp_now();
    prov.finalize_hash();
    return prov;
}

int cmd_eval_det(const GlobalOptions& gopts, const EvalPaths& paths) {
    tsi::Corpus gt = tsi::read_corpus(paths.gt);
    tsi::Corpus pred = tsi::read_corpus(paths.pred);
    tsi::FullReport report;
    report.has_detection = true;
    report.detection = tsi::evaluate_detection(gt, pred, gopts.iou_thresh);
    report.provenance = make_provenance(gopts, paths);
    emit_report(report, paths);
    return kExitOk;
}

int cmd_eval_rec(const GlobalOptions& gopts, const EvalPaths& paths) {
    tsi::Corpus gt = tsi::read_corpus(paths.gt);
    tsi::Corpus pred = tsi::read_corpus(paths.pred);
    tsi::FullReport report;
    report.has_recognition = true;
    report.recognition = tsi::evaluate_recognition(gt, pred, gopts.iou_thresh);
    report.provenance = make_provenance(gopts, paths);
    emit_report(report, paths);
    return kExitOk;
}

tsi::SlotRules load_slot_rules(const GlobalOptions& gopts, const std::string& slots_path) {
    if (!slots_path.empty())
        return tsi::SlotRules::from_json(tsi::read_text_file(slots_path));
    return tsi::Grammar::builtin(gopts.lang).slot_rules;
}

int cmd_eval_interp(const GlobalOptions& gopts, const EvalPaths& paths) {
    tsi::Corpus gt = tsi::read_corpus(paths.gt);
    auto candidates = tsi::read_descriptions_file(paths.pred_desc);
    tsi::FullReport report;
    report.has_interpretation = true;
    report.interpretation = tsi::evaluate_interpretation(
        gt, candidates, load_slot_rules(gopts, paths.slots), tokenizer_mode(gopts.tokenizer));
    EvalPaths prov_paths = paths;
    report.provenance = make_provenance(gopts, prov_paths);
    emit_report(report, paths);
    return kExitOk;
}

int cmd_report(const GlobalOptions& gopts, const EvalPaths& paths_in,
               const tsi::Grammar& grammar, const std::string& out_dir) {
    ensure_out_dir(out_dir);
    EvalPaths paths = paths_in;
    tsi::Corpus gt = tsi::read_corpus(paths.gt);
    tsi::Corpus pred = tsi::read_corpus(paths.pred);

    std::vector<tsi::DescriptionEntry> candidates;
    if (!paths.pred_desc.empty()) {
        candidates = tsi::read_descriptions_file(paths.pred_desc);
    } else {
        for (const auto& scene : pred.scenes) {
            tsi::InterpretOutcome outcome = tsi::interpret_scene(scene, grammar);
            for (const auto& d : outcome.descriptions)
                candidates.push_back({scene.image_id, d.panel_id, d.text});
        }
    }

    tsi::FullReport report;
    report.has_detection = true;
    report.has_recognition = true;
    report.has_interpretation = true;
    report.detection = tsi::evaluate_detection(gt, pred, gopts.iou_thresh);
    report.recognition = tsi::evaluate_recognition(gt, pred, gopts.iou_thresh);
    report.interpretation = tsi::evaluate_interpretation(
        gt, candidates, load_slot_rules(gopts, paths.slots), tokenizer_mode(gopts.tokenizer));
    report.provenance = make_provenance(gopts, paths);

    paths.json_out = out_dir + "/report.json";
    paths.text_out = out_dir + "/report.txt";
    emit_report(report, paths);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"traffic scene annotation toolkit"};
    app.set_version_flag("--version", std::string("tsikit ") + tsi::kVersion);
    app.require_subcommand(1);

    GlobalOptions gopts;
    GlobalOptionFlags gflags;
    std::string config_flag;
    app.add_option("--config", config_flag, "JSON config file with option defaults");
    gflags.seed = app.add_option("--seed", gopts.seed, "master seed");
    gflags.workers =
        app.add_option("--workers", gopts.workers, "worker threads (never changes output bytes)");
    gflags.tokenizer = app.add_option("--tokenizer", gopts.tokenizer, "auto|cjk|ws");
    gflags.iou_thresh = app.add_option("--iou-thresh", gopts.iou_thresh, "IoU acceptance threshold");
    gflags.lang = app.add_option("--lang", gopts.lang, "language pack (en|zh)");
    app.add_flag("--stamp", gopts.stamp, "embed a timestamp in reports");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic corpus");
    tsi::GeneratorConfig gen_config;
    std::string gen_out;
    gen->add_option("--scenes", gen_config.n_scenes, "number of scenes")->required();
    gen->add_option("-o,--out", gen_out, "output directory")->required();
    gen->add_option("--width", gen_config.width, "image width");
    gen->add_option("--height", gen_config.height, "image height");
    gen->add_option("--panels-min", gen_config.panels_min, "min panels per scene");
    gen->add_option("--panels-max", gen_config.panels_max, "max panels per scene");
    gen->add_option("--members-min", gen_config.members_min, "min members per panel");
    gen->add_option("--members-max", gen_config.members_max, "max members per panel");

    // split
    auto* split = app.add_subcommand("split", "statistics-preserving corpus split");
    std::string split_input, split_out;
    double split_fraction = 0.25, split_tolerance = 0.05;
    split->add_option("-i,--input", split_input, "corpus.jsonl")->required();
    split->add_option("--test-fraction", split_fraction, "test fraction in (0,1)")->required();
    split->add_option("--tolerance", split_tolerance, "per-class frequency gap tolerance");
    split->add_option("-o,--out", split_out, "output directory")->required();

    // perturb
    auto* perturb = app.add_subcommand("perturb", "inject detector/recognizer noise");
    std::string perturb_input, perturb_profile, perturb_out;
    tsi::NoiseProfile flag_profile;
    perturb->add_option("-i,--input", perturb_input, "corpus.jsonl")->required();
    perturb->add_option("--profile", perturb_profile, "noise profile JSON file");
    auto* fdrop = perturb->add_option("--drop-rate", flag_profile.drop_rate);
    auto* fspur = perturb->add_option("--spurious-rate", flag_profile.spurious_rate);
    auto* fjit = perturb->add_option("--jitter-sigma", flag_profile.jitter_sigma);
    auto* fconf = perturb->add_option("--confusion-rate", flag_profile.class_confusion_rate);
    auto* fchar = perturb->add_option("--char-sub-rate", flag_profile.char_sub_rate);
    perturb->add_option("-o,--out", perturb_out, "output directory")->required();

    // interpret
    auto* interpret = app.add_subcommand("interpret", "signs to descriptions");
    std::string interp_input, interp_output;
    std::string tpl_path, actions_path, frames_path, slots_path, symvocab_path, panvocab_path;
    interpret->add_option("-i,--input", interp_input, "corpus or predictions jsonl")->required();
    interpret->add_option("-o,--out", interp_output, "descriptions.jsonl")->required();
    interpret->add_option("--templates", tpl_path, "template file override");
    interpret->add_option("--actions", actions_path, "action table override");
    interpret->add_option("--frames", frames_path, "frame map override");
    interpret->add_option("--slots", slots_path, "slot rules override");
    interpret->add_option("--symbol-vocab", symvocab_path, "symbol vocab override");
    interpret->add_option("--panel-vocab", panvocab_path, "panel vocab override");

    // eval-det / eval-rec / eval-interp / report
    EvalPaths det_paths, rec_paths, interp_paths, report_paths;
    auto* eval_det = app.add_subcommand("eval-det", "detection precision/recall/F");
    eval_det->add_option("--gt", det_paths.gt)->required();
    eval_det->add_option("--pred", det_paths.pred)->required();
    eval_det->add_option("--json", det_paths.json_out, "write JSON report");
    eval_det->add_option("--text", det_paths.text_out, "write text report");

    auto* eval_rec = app.add_subcommand("eval-rec", "recognition accuracy tables");
    eval_rec->add_option("--gt", rec_paths.gt)->required();
    eval_rec->add_option("--pred", rec_paths.pred)->required();
    eval_rec->add_option("--json", rec_paths.json_out, "write JSON report");
    eval_rec->add_option("--text", rec_paths.text_out, "write text report");

    auto* eval_interp = app.add_subcommand("eval-interp", "description metrics (R/B/SA)");
    eval_interp->add_option("--gt", interp_paths.gt)->required();
    eval_interp->add_option("--pred", interp_paths.pred_desc, "descriptions.jsonl")->required();
    eval_interp->add_option("--slots", interp_paths.slots, "slot rules file");
    eval_interp->add_option("--json", interp_paths.json_out, "write JSON report");
    eval_interp->add_option("--text", interp_paths.text_out, "write text report");

    auto* report_cmd = app.add_subcommand("report", "full detection+recognition+interpretation report");
    std::string report_out;
    report_cmd->add_option("--gt", report_paths.gt)->required();
    report_cmd->add_option("--pred", report_paths.pred)->required();
    report_cmd->add_option("--pred-desc", report_paths.pred_desc,
                           "descriptions.jsonl (otherwise interpreted from --pred)");
    report_cmd->add_option("--slots", report_paths.slots, "slot rules file");
    report_cmd->add_option("-o,--out", report_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        app.exit(e);
        return kExitConfig;
    }

    try {
        load_config_defaults(gopts, gflags, config_flag);
        // seeded subcommands demand an explicit seed; runs must be replayable
        if ((gen->parsed() || split->parsed() || perturb->parsed()) &&
            !gflags.seed->count() && !gflags.seed_from_config)
            throw tsi::ConfigError("this subcommand requires --seed (or a config-file seed)");
        if (gen->parsed()) {
            gen_config.seed = gopts.seed;
            gen_config.lang = gopts.lang;
            return cmd_gen(gopts, gen_config, gen_out);
        }
        if (split->parsed())
            return cmd_split(split_input, split_fraction, gopts.seed, split_tolerance, split_out);
        if (perturb->parsed()) {
            bool from_flags = fdrop->count() || fspur->count() || fjit->count() ||
                              fconf->count() || fchar->count();
            return cmd_perturb(gopts, perturb_input, perturb_profile, flag_profile, from_flags,
                               gopts.seed, perturb_out);
        }
        if (interpret->parsed()) {
            tsi::Grammar grammar = tsi::Grammar::load(gopts.lang, tpl_path, actions_path,
                                                      frames_path, slots_path, symvocab_path,
                                                      panvocab_path);
            return cmd_interpret(gopts, interp_input, interp_output, grammar);
        }
        if (eval_det->parsed()) return cmd_eval_det(gopts, det_paths);
        if (eval_rec->parsed()) return cmd_eval_rec(gopts, rec_paths);
        if (eval_interp->parsed()) return cmd_eval_interp(gopts, interp_paths);
        if (report_cmd->parsed()) {
            tsi::Grammar grammar = tsi::Grammar::load(gopts.lang, "", "", "",
                                                      report_paths.slots, "", "");
            return cmd_report(gopts, report_paths, grammar, report_out);
        }
        std::cerr << "no subcommand\n";
        return kExitConfig;
    } catch (const tsi::DataMismatchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMismatch;
    } catch (const tsi::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const tsi::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const tsi::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const tsi::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}
