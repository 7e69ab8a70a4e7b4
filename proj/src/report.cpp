#include "tsi/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tsi/errors.hpp"
#include "tsi/util.hpp"
#include "tsi/version.hpp"

using nlohmann::json;

namespace tsi {

std::vector<DescriptionEntry> read_descriptions_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open descriptions file: " + path);
    std::vector<DescriptionEntry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            json j = json::parse(line);
            DescriptionEntry e;
            e.image_id = j.at("image_id").get<std::string>();
            e.panel_id = j.at("panel_id").get<int>();
            e.text = j.at("text").get<std::string>();
            out.push_back(std::move(e));
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what(), lineno);
        }
    }
    return out;
}

std::string descriptions_to_jsonl(const std::vector<DescriptionEntry>& entries) {
    std::string out;
    for (const auto& e : entries) {
        json j;
        j["image_id"] = e.image_id;
        j["panel_id"] = e.panel_id;
        j["text"] = e.text;
        out += j.dump();
        out += "\n";
    }
    return out;
}

namespace {

void require_same_image_sets(const Corpus& gt, const Corpus& pred) {
    std::set<std::string> gt_ids, pred_ids;
    for (const auto& s : gt.scenes) gt_ids.insert(s.image_id);
    for (const auto& s : pred.scenes) pred_ids.insert(s.image_id);
    if (gt_ids == pred_ids) return;
    for (const auto& id : gt_ids)
        if (!pred_ids.count(id))
            throw DataMismatchError("image_id sets differ: '" + id + "' missing from predictions");
    for (const auto& id : pred_ids)
        if (!gt_ids.count(id))
            throw DataMismatchError("image_id sets differ: '" + id + "' missing from ground truth");
}

const SignKind kKinds[3] = {SignKind::Symbol, SignKind::Text, SignKind::Panel};

} // namespace

DetectionEvaluation evaluate_detection(const Corpus& gt, const Corpus& pred,
                                       double iou_threshold) {
    require_same_image_sets(gt, pred);
    std::map<std::string, const SceneRecord*> pred_by_id;
    for (const auto& s : pred.scenes) pred_by_id[s.image_id] = &s;

    DetectionEvaluation eval;
    for (const SceneRecord& scene : gt.scenes) {
        const SceneRecord& p = *pred_by_id.at(scene.image_id);
        for (SignKind kind : kKinds) {
            auto gt_boxes = gt_boxes_of_kind(scene, kind);
            auto pred_boxes = predictions_of_kind(p, kind);
            eval.counts[kind_name(kind)].accumulate(
                match_detections(gt_boxes, pred_boxes, iou_threshold));
        }
    }
    for (auto& [kind, outcome] : eval.counts) eval.scores[kind] = prf(outcome);
    return eval;
}

RecognitionEvaluation evaluate_recognition(const Corpus& gt, const Corpus& pred,
                                           double iou_threshold) {
    require_same_image_sets(gt, pred);
    std::map<std::string, const SceneRecord*> pred_by_id;
    for (const auto& s : pred.scenes) pred_by_id[s.image_id] = &s;

    RecognitionEvaluation eval;
    for (const SceneRecord& scene : gt.scenes) {
        const SceneRecord& p = *pred_by_id.at(scene.image_id);
        for (SignKind kind : kKinds) {
            auto gt_boxes = gt_boxes_of_kind(scene, kind);
            auto pred_boxes = predictions_of_kind(p, kind);
            eval.per_kind[kind_name(kind)].accumulate(
                recognition_accuracy(gt_boxes, pred_boxes, kind, iou_threshold));
        }
    }
    return eval;
}

MetricScores evaluate_interpretation(const Corpus& gt,
                                     const std::vector<DescriptionEntry>& candidates,
                                     const SlotRules& rules, TokenMode mode) {
    std::set<std::string> gt_ids;
    for (const auto& s : gt.scenes) gt_ids.insert(s.image_id);
    for (const auto& c : candidates)
        if (!gt_ids.count(c.image_id))
            throw DataMismatchError("descriptions name unknown image_id '" + c.image_id + "'");

    // queue per (image_id, panel_id); first unconsumed candidate wins
    std::map<std::pair<std::string, int>, std::vector<std::size_t>> by_key;
    for (std::size_t i = candidates.size(); i > 0; --i)
        by_key[{candidates[i - 1].image_id, candidates[i - 1].panel_id}].push_back(i - 1);

    std::vector<std::string> cand_texts, ref_texts;
    std::vector<bool> consumed(candidates.size(), false);
    for (const SceneRecord& scene : gt.scenes) {
        for (const DescriptionAnnotation& ref : scene.descriptions) {
            std::string cand;
            auto it = by_key.find({scene.image_id, ref.panel_id});
            if (it != by_key.end() && !it->second.empty()) {
                std::size_t idx = it->second.back();
                it->second.pop_back();
                cand = candidates[idx].text;
                consumed[idx] = true;
            }
            ref_texts.push_back(ref.text);
            cand_texts.push_back(std::move(cand));
        }
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (consumed[i]) continue;
        // spurious description: no reference to meet
        cand_texts.push_back(candidates[i].text);
        ref_texts.push_back(std::string());
    }
    return evaluate_descriptions(cand_texts, ref_texts, rules, mode);
}

void Provenance::add_input(const std::string& name, const std::string& path) {
    inputs[name] = {path, fnv1a64_hex(read_text_file(path))};
}

void Provenance::add_option(const std::string& key, const std::string& value) {
    options[key] = value;
}

void Provenance::finalize_hash() {
    std::string blob = tool;
    for (const auto& [name, pv] : inputs) blob += "|" + name + "=" + pv.first + ":" + pv.second;
    for (const auto& [k, v] : options) blob += "|" + k + "=" + v;
    config_hash = fnv1a64_hex(blob);
}

namespace {

double pct(double fraction) { return std::round(fraction * 10000.0) / 100.0; }

json prf_to_json(const PRF& p) {
    return {{"precision", pct(p.precision)},
            {"recall", pct(p.recall)},
            {"f_measure", pct(p.f_measure)}};
}

json recognition_to_json(const RecognitionResult& r, bool text_kind) {
    json j;
    j["overall"] = {{"correct", r.overall.correct},
                    {"total", r.overall.total},
                    {"accuracy", pct(r.overall.accuracy())}};
    if (text_kind) {
        j["char_overall"] = {{"correct", r.char_overall.correct},
                             {"total", r.char_overall.total},
                             {"accuracy", pct(r.char_overall.accuracy())}};
        j["char_classes"] = json::object();
        for (const auto& [cls, acc] : r.char_classes)
            j["char_classes"][cls] = {{"correct", acc.correct},
                                      {"total", acc.total},
                                      {"accuracy", pct(acc.accuracy())}};
    } else {
        j["per_class"] = json::object();
        for (const auto& [cls, acc] : r.per_class)
            j["per_class"][cls] = {{"correct", acc.correct},
                                   {"total", acc.total},
                                   {"accuracy", pct(acc.accuracy())}};
    }
    return j;
}

} // namespace

std::string report_to_json(const FullReport& report) {
    json j;
    json prov;
    prov["tool"] = report.provenance.tool.empty() ? std::string("tsikit ") + kVersion
                                                  : report.provenance.tool;
    prov["inputs"] = json::object();
    for (const auto& [name, pv] : report.provenance.inputs)
        prov["inputs"][name] = {{"path", pv.first}, {"fnv64", pv.second}};
    prov["options"] = json::object();
    for (const auto& [k, v] : report.provenance.options) prov["options"][k] = v;
    prov["config_hash"] = report.provenance.config_hash;
    if (!report.provenance.timestamp.empty()) prov["timestamp"] = report.provenance.timestamp;
    j["provenance"] = prov;

    if (report.has_detection) {
        json det;
        for (const auto& [kind, score] : report.detection.scores) {
            det[kind] = prf_to_json(score);
            const MatchOutcome& c = report.detection.counts.at(kind);
            det[kind]["tp"] = c.tp;
            det[kind]["fp"] = c.fp;
            det[kind]["fn"] = c.fn;
            det[kind]["ignored_matches"] = c.ignored_matches;
        }
        j["detection"] = det;
    }
    if (report.has_recognition) {
        json rec;
        for (const auto& [kind, result] : report.recognition.per_kind)
            rec[kind] = recognition_to_json(result, kind == "text");
        j["recognition"] = rec;
    }
    if (report.has_interpretation) {
        const MetricScores& m = report.interpretation;
        j["interpretation"] = {{"R1", pct(m.rouge1)},
                               {"R2", pct(m.rouge2)},
                               {"Rl", pct(m.rougeL)},
                               {"B4", pct(m.bleu4)},
                               {"SA", pct(m.soft_accuracy)}};
    }
    return j.dump(2);
}

namespace {

void line(std::string& out, const char* fmt, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), fmt, args...);
    out += buf;
    out += "\n";
}

} // namespace

std::string report_to_text(const FullReport& report) {
    std::string out;
    if (report.has_detection) {
        out += "detection (percent)\n";
        line(out, "  %-8s %10s %10s %10s", "kind", "Precision", "Recall", "F-measure");
        for (const char* kind : {"symbol", "text", "panel"}) {
            auto it = report.detection.scores.find(kind);
            if (it == report.detection.scores.end()) continue;
            line(out, "  %-8s %10.2f %10.2f %10.2f", kind, it->second.precision * 100.0,
                 it->second.recall * 100.0, it->second.f_measure * 100.0);
        }
        out += "\n";
    }
    if (report.has_recognition) {
        out += "recognition accuracy (percent)\n";
        for (const char* kind : {"symbol", "panel"}) {
            auto it = report.recognition.per_kind.find(kind);
            if (it == report.recognition.per_kind.end()) continue;
            out += "  " + std::string(kind) + ":";
            for (const auto& [cls, acc] : it->second.per_class) {
                char buf[64];
                std::snprintf(buf, sizeof(buf), " %s=%.2f", cls.c_str(), acc.accuracy() * 100.0);
                out += buf;
            }
            char buf[64];
            std::snprintf(buf, sizeof(buf), " OA=%.2f\n", it->second.overall.accuracy() * 100.0);
            out += buf;
        }
        auto it = report.recognition.per_kind.find("text");
        if (it != report.recognition.per_kind.end()) {
            out += "  text:";
            for (const char* cls : {"N", "C", "E", "other"}) {
                auto cit = it->second.char_classes.find(cls);
                if (cit == it->second.char_classes.end()) continue;
                char buf[64];
                std::snprintf(buf, sizeof(buf), " %s=%.2f", cls, cit->second.accuracy() * 100.0);
                out += buf;
            }
            char buf[96];
            std::snprintf(buf, sizeof(buf), " OA=%.2f exact=%.2f\n",
                          it->second.char_overall.accuracy() * 100.0,
                          it->second.overall.accuracy() * 100.0);
            out += buf;
        }
        out += "\n";
    }
    if (report.has_interpretation) {
        const MetricScores& m = report.interpretation;
        out += "interpretation (percent)\n";
        line(out, "  %8s %8s %8s %8s %8s", "R-1", "R-2", "R-l", "B-4", "SA");
        line(out, "  %8.2f %8.2f %8.2f %8.2f %8.2f", m.rouge1 * 100.0, m.rouge2 * 100.0,
             m.rougeL * 100.0, m.bleu4 * 100.0, m.soft_accuracy * 100.0);
    }
    return out;
}

} // namespace tsi
