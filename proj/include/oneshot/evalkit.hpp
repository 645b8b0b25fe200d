#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oneshot/geometry.hpp"
#include "oneshot/videoio.hpp"

namespace oneshot {

// Outcome of greedy detection/ground-truth matching.
struct MatchResult {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    // (detection index, ground-truth index) pairs, in match order.
    std::vector<std::pair<int, int>> pairs;
    // Per detection, in descending-confidence rank order: was it a true positive,
    // and which original detection index sits at that rank. Feeds the AP sweep.
    std::vector<char> tp_by_rank;
    std::vector<int> det_index_by_rank;
};

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Zero-division cases report 0 with the matching flag cleared.
    bool precision_defined = true;
    bool recall_defined = true;
};

struct EvalReport {
    PrecisionRecall pr;
    double ap = 0.0;
    double acc6 = 0.0;  // recognition accuracy, >= 6 positional char matches
    double acc7 = 0.0;  // recognition accuracy, >= 7 positional char matches
    int num_tp = 0;     // detection true positives
    int num_fp = 0;
    int num_fn = 0;
    int num_gt = 0;         // ground-truth boxes
    int num_instances = 0;  // ground-truth instances (recognition denominator)
    int rec_correct6 = 0;
    int rec_correct7 = 0;
};

// Intersection-over-union of two boxes; 0 when disjoint. Throws DegenerateBox
// if either box has zero area.
double iou(const BBox& a, const BBox& b);

// Greedy matcher: detections are taken in descending confidence order (stable
// on ties) and each one claims the not-yet-matched ground-truth box of highest
// IoU >= threshold within the same frame. Equal IoU resolves to the earliest
// ground-truth record.
MatchResult match_detections(const std::vector<Detection>& dets,
                             const std::vector<GroundTruthRecord>& gts,
                             double iou_threshold);

// precision = TP/(TP+FP), recall = TP/(TP+FN), F1 = 2PR/(P+R); F1 is 0
// whenever TP is 0.
PrecisionRecall precision_recall_f1(const MatchResult& m);

// Average precision over the greedy-matched, confidence-ranked detection list.
// Default is all-point interpolation (area under the precision envelope);
// `eleven_point` switches to the mean of the envelope at recalls 0.0..1.0 in
// steps of 0.1. Throws NoGroundTruth when gts is empty.
double average_precision(const std::vector<Detection>& dets,
                         const std::vector<GroundTruthRecord>& gts, double iou_threshold,
                         bool eleven_point = false);

// Number of positions where the two strings agree; positions beyond the
// shorter string count as mismatches (i.e. they simply never match).
int char_match_count(const std::string& predicted, const std::string& truth);

// Uppercases and strips hyphens/whitespace. Applied to both sides before any
// plate-string comparison.
std::string normalize_plate(const std::string& s);

// Fraction of ground-truth instances whose predicted plate matches the truth
// in at least `min_chars` positions. Instances without a prediction fail.
// Inputs are normalized internally.
double recognition_accuracy(const std::vector<InstancePlate>& predictions,
                            const std::vector<std::pair<int, std::string>>& truth_by_instance,
                            int min_chars);

// Full report: detection metrics over the files' box records plus recognition
// accuracy computed from per-frame detection plates aggregated by majority
// vote (confidence breaks ties), compared against per-instance truth plates.
EvalReport evaluate(const std::vector<Detection>& dets,
                    const std::vector<GroundTruthRecord>& gts, double iou_threshold,
                    bool eleven_point_ap = false);

std::string format_report_table(const EvalReport& r);

}  // namespace oneshot
