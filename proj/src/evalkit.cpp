#include "oneshot/evalkit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "oneshot/errors.hpp"
#include "oneshot/recognizer.hpp"

namespace oneshot {

double iou(const BBox& a, const BBox& b) {
    if (a.area() <= 0.0 || b.area() <= 0.0) throw DegenerateBox("iou of a zero-area box");
    const double ix = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
    const double iy = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
    const double inter = ix * iy;
    return inter / (a.area() + b.area() - inter);
}

MatchResult match_detections(const std::vector<Detection>& dets,
                             const std::vector<GroundTruthRecord>& gts, double iou_threshold) {
    std::vector<int> rank(dets.size());
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](int a, int b) {
        return dets[a].confidence > dets[b].confidence;
    });

    MatchResult m;
    std::vector<char> gt_taken(gts.size(), 0);
    for (int di : rank) {
        int best_gt = -1;
        double best_iou = 0.0;
        for (std::size_t gi = 0; gi < gts.size(); ++gi) {
            if (gt_taken[gi] || gts[gi].frame_index != dets[di].frame_index) continue;
            const double v = iou(dets[di].bbox, gts[gi].bbox);
            if (v >= iou_threshold && v > best_iou) {
                best_iou = v;
                best_gt = static_cast<int>(gi);
            }
        }
        const bool hit = best_gt >= 0;
        if (hit) {
            gt_taken[best_gt] = 1;
            m.pairs.emplace_back(di, best_gt);
            ++m.tp;
        } else {
            ++m.fp;
        }
        m.tp_by_rank.push_back(hit ? 1 : 0);
        m.det_index_by_rank.push_back(di);
    }
    m.fn = static_cast<int>(gts.size()) - m.tp;
    return m;
}

PrecisionRecall precision_recall_f1(const MatchResult& m) {
    PrecisionRecall out;
    if (m.tp + m.fp == 0) {
        out.precision = 0.0;
        out.precision_defined = false;
    } else {
        out.precision = static_cast<double>(m.tp) / (m.tp + m.fp);
    }
    if (m.tp + m.fn == 0) {
        out.recall = 0.0;
        out.recall_defined = false;
    } else {
        out.recall = static_cast<double>(m.tp) / (m.tp + m.fn);
    }
    out.f1 = (out.precision + out.recall) > 0.0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

double average_precision(const std::vector<Detection>& dets,
                         const std::vector<GroundTruthRecord>& gts, double iou_threshold,
                         bool eleven_point) {
    if (gts.empty()) throw NoGroundTruth("average precision needs at least one ground-truth box");
    const MatchResult m = match_detections(dets, gts, iou_threshold);

    const std::size_t n = m.tp_by_rank.size();
    std::vector<double> prec(n), rec(n);
    int cum_tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cum_tp += m.tp_by_rank[i];
        prec[i] = static_cast<double>(cum_tp) / static_cast<double>(i + 1);
        rec[i] = static_cast<double>(cum_tp) / static_cast<double>(gts.size());
    }
    // Precision envelope: env[i] = max precision at rank >= i.
    std::vector<double> env(prec);
    for (std::size_t i = n; i-- > 1;) env[i - 1] = std::max(env[i - 1], env[i]);

    if (eleven_point) {
        double sum = 0.0;
        for (int k = 0; k <= 10; ++k) {
            const double r = k / 10.0;
            double best = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (rec[i] >= r - 1e-12) {
                    best = env[i];
                    break;
                }
            sum += best;
        }
        return sum / 11.0;
    }

    double ap = 0.0;
    double prev_rec = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (m.tp_by_rank[i]) {
            ap += (rec[i] - prev_rec) * env[i];
            prev_rec = rec[i];
        }
    }
    return ap;
}

int char_match_count(const std::string& predicted, const std::string& truth) {
    const std::size_t n = std::min(predicted.size(), truth.size());
    int matches = 0;
    for (std::size_t i = 0; i < n; ++i) matches += (predicted[i] == truth[i]);
    return matches;
}

std::string normalize_plate(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '-' || std::isspace(static_cast<unsigned char>(c))) continue;
        out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    return out;
}

double recognition_accuracy(const std::vector<InstancePlate>& predictions,
                            const std::vector<std::pair<int, std::string>>& truth_by_instance,
                            int min_chars) {
    if (truth_by_instance.empty())
        throw NoGroundTruth("recognition accuracy needs at least one ground-truth instance");
    std::map<int, std::string> pred;
    for (const InstancePlate& p : predictions)
        if (p.plate) pred[p.instance_id] = normalize_plate(*p.plate);

    int correct = 0;
    for (const auto& [inst, truth] : truth_by_instance) {
        const auto it = pred.find(inst);
        if (it == pred.end()) continue;
        if (char_match_count(it->second, normalize_plate(truth)) >= min_chars) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(truth_by_instance.size());
}

EvalReport evaluate(const std::vector<Detection>& dets, const std::vector<GroundTruthRecord>& gts,
                    double iou_threshold, bool eleven_point_ap) {
    EvalReport r;
    const MatchResult m = match_detections(dets, gts, iou_threshold);
    r.pr = precision_recall_f1(m);
    r.ap = average_precision(dets, gts, iou_threshold, eleven_point_ap);
    r.num_tp = m.tp;
    r.num_fp = m.fp;
    r.num_fn = m.fn;
    r.num_gt = static_cast<int>(gts.size());

    // Truth plate per instance (constant across a sequence; first record wins).
    std::vector<std::pair<int, std::string>> truth_by_instance;
    for (const GroundTruthRecord& g : gts) {
        const auto seen = std::find_if(truth_by_instance.begin(), truth_by_instance.end(),
                                       [&](const auto& p) { return p.first == g.instance_id; });
        if (seen == truth_by_instance.end()) truth_by_instance.emplace_back(g.instance_id, g.plate);
    }
    r.num_instances = static_cast<int>(truth_by_instance.size());

    // Aggregate per-frame detection plates into one prediction per instance.
    std::map<int, std::vector<PlateVote>> votes;
    for (const Detection& d : dets)
        if (d.plate) votes[d.instance_id].push_back({normalize_plate(*d.plate), d.confidence});
    std::vector<InstancePlate> preds;
    for (auto& [inst, v] : votes) preds.push_back({inst, majority_plate(v)});

    r.acc6 = recognition_accuracy(preds, truth_by_instance, 6);
    r.acc7 = recognition_accuracy(preds, truth_by_instance, 7);
    for (const auto& [inst, truth] : truth_by_instance) {
        const auto it = std::find_if(preds.begin(), preds.end(),
                                     [&](const InstancePlate& p) { return p.instance_id == inst; });
        if (it == preds.end() || !it->plate) continue;
        const int mc = char_match_count(normalize_plate(*it->plate), normalize_plate(truth));
        if (mc >= 6) ++r.rec_correct6;
        if (mc >= 7) ++r.rec_correct7;
    }
    return r;
}

std::string format_report_table(const EvalReport& r) {
    std::ostringstream out;
    char line[96];
    out << "metric              value\n";
    out << "------------------  -----------------------------\n";
    auto row = [&](const char* name, double v, const std::string& note = "") {
        std::snprintf(line, sizeof(line), "%-18s  %8.4f%s%s\n", name, v,
                      note.empty() ? "" : "  ", note.c_str());
        out << line;
    };
    row("precision", r.pr.precision,
        r.pr.precision_defined ? "(tp " + std::to_string(r.num_tp) + ", fp " + std::to_string(r.num_fp) + ")"
                               : "(undefined: no detections)");
    row("recall", r.pr.recall,
        r.pr.recall_defined ? "(fn " + std::to_string(r.num_fn) + ")" : "(undefined: no ground truth)");
    row("f1", r.pr.f1);
    row("ap", r.ap);
    row("acc>=6", r.acc6,
        "(" + std::to_string(r.rec_correct6) + "/" + std::to_string(r.num_instances) + ")");
    row("acc>=7", r.acc7,
        "(" + std::to_string(r.rec_correct7) + "/" + std::to_string(r.num_instances) + ")");
    std::snprintf(line, sizeof(line), "%-18s  %d boxes, %d instances\n", "ground truth",
                  r.num_gt, r.num_instances);
    out << line;
    return out.str();
}

}  // namespace oneshot
