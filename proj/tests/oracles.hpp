#pragma once

// Independent reference implementations the tests compare the library
// against. Everything here is deliberately written the slow, obvious way and
// shares no code with the implementations under test.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oneshot/geometry.hpp"
#include "oneshot/image.hpp"
#include "oneshot/videoio.hpp"

namespace oracle {

// ---- segmentation ----

// 8-connected region of pixels with exactly the color at (sx, sy). On scenes
// made of solid-color shapes this is what a correct similarity grower must
// return.
inline oneshot::Mask exact_color_region(const oneshot::Image& img, int sx, int sy) {
    oneshot::Mask mask = oneshot::Mask::blank(img.width, img.height);
    const std::uint8_t* want = img.px(sx, sy);
    std::vector<std::pair<int, int>> stack{{sx, sy}};
    mask.set(sx, sy, true);
    while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = x + dx, ny = y + dy;
                if (!img.in_bounds(nx, ny) || mask.at(nx, ny)) continue;
                const std::uint8_t* p = img.px(nx, ny);
                if (p[0] == want[0] && p[1] == want[1] && p[2] == want[2]) {
                    mask.set(nx, ny, true);
                    stack.emplace_back(nx, ny);
                }
            }
    }
    return mask;
}

// ---- detection metrics ----

inline double box_iou(const oneshot::BBox& a, const oneshot::BBox& b) {
    const double ix = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const double iy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    const double area_a = (a.x1 - a.x0) * (a.y1 - a.y0);
    const double area_b = (b.x1 - b.x0) * (b.y1 - b.y0);
    return inter / (area_a + area_b - inter);
}

struct MatchCounts {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    std::vector<char> tp_by_rank;  // one flag per detection, confidence order
};

// Greedy confidence-ordered matching, re-derived from its verbal contract:
// walk detections from the most to the least confident (original order breaks
// confidence ties), give each the not-yet-taken same-frame ground truth of
// highest IoU at or above the threshold, earliest ground truth on IoU ties.
inline MatchCounts match(const std::vector<oneshot::Detection>& dets,
                         const std::vector<oneshot::GroundTruthRecord>& gts, double threshold) {
    std::vector<int> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return dets[a].confidence > dets[b].confidence; });

    MatchCounts out;
    std::vector<char> taken(gts.size(), 0);
    for (const int d : order) {
        int best_gt = -1;
        double best_iou = -1.0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (taken[g] || gts[g].frame_index != dets[d].frame_index) continue;
            const double v = box_iou(dets[d].bbox, gts[g].bbox);
            if (v >= threshold && v > best_iou) {
                best_iou = v;
                best_gt = static_cast<int>(g);
            }
        }
        if (best_gt >= 0) {
            taken[best_gt] = 1;
            ++out.tp;
            out.tp_by_rank.push_back(1);
        } else {
            out.tp_by_rank.push_back(0);
        }
    }
    out.fp = static_cast<int>(dets.size()) - out.tp;
    out.fn = static_cast<int>(gts.size()) - out.tp;
    return out;
}

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline Prf prf(const MatchCounts& m) {
    Prf out;
    if (m.tp + m.fp > 0) out.precision = static_cast<double>(m.tp) / (m.tp + m.fp);
    if (m.tp + m.fn > 0) out.recall = static_cast<double>(m.tp) / (m.tp + m.fn);
    if (out.precision + out.recall > 0.0)
        out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

// All-point interpolated AP, straight from the definition: at every rank
// where recall increases, add (recall step) times the best precision at any
// rank with recall at least this large. Quadratic scan, no envelope trick.
inline double average_precision(const MatchCounts& m, int num_gt) {
    const int n = static_cast<int>(m.tp_by_rank.size());
    std::vector<double> prec(n), rec(n);
    int cum_tp = 0;
    for (int i = 0; i < n; ++i) {
        cum_tp += m.tp_by_rank[i];
        prec[i] = static_cast<double>(cum_tp) / (i + 1);
        rec[i] = static_cast<double>(cum_tp) / num_gt;
    }
    double ap = 0.0, prev_rec = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!m.tp_by_rank[i]) continue;
        double best = 0.0;
        for (int j = 0; j < n; ++j)
            if (rec[j] >= rec[i]) best = std::max(best, prec[j]);
        ap += (rec[i] - prev_rec) * best;
        prev_rec = rec[i];
    }
    return ap;
}

// ---- clustering ----

// Minimum k-medoids cost over every size-k subset of the points.
inline double best_kmedoids_cost(const std::vector<oneshot::Vec2>& points, int k) {
    const int n = static_cast<int>(points.size());
    std::vector<int> pick(k);
    double best = std::numeric_limits<double>::infinity();

    const auto cost_of = [&] {
        double total = 0.0;
        for (const oneshot::Vec2& p : points) {
            double nearest = std::numeric_limits<double>::infinity();
            for (int m = 0; m < k; ++m) {
                const double dx = p.x - points[pick[m]].x;
                const double dy = p.y - points[pick[m]].y;
                nearest = std::min(nearest, std::sqrt(dx * dx + dy * dy));
            }
            total += nearest;
        }
        return total;
    };

    // Odometer over combinations.
    for (int i = 0; i < k; ++i) pick[i] = i;
    while (true) {
        best = std::min(best, cost_of());
        int i = k - 1;
        while (i >= 0 && pick[i] == n - k + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
    return best;
}

// ---- tracking ----

// NCC over every integer displacement, written directly from the formula.
// Returns the argmax displacement and its score; dead-even maxima resolve to
// the first in row-major (dy, dx) order.
struct NaiveNcc {
    int dx = 0, dy = 0;
    double score = -2.0;
};

inline NaiveNcc naive_ncc_scan(const oneshot::Image& prev, const oneshot::Image& next, int cx,
                               int cy, int patch_radius, int search_radius) {
    const int side = 2 * patch_radius + 1;
    const auto patch_mean = [&](const oneshot::Image& img, int px, int py) {
        double sum = 0.0;
        for (int y = -patch_radius; y <= patch_radius; ++y)
            for (int x = -patch_radius; x <= patch_radius; ++x)
                sum += oneshot::luma_at(img, px + x, py + y);
        return sum / (side * side);
    };

    NaiveNcc best;
    for (int dy = -search_radius; dy <= search_radius; ++dy) {
        for (int dx = -search_radius; dx <= search_radius; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx - patch_radius < 0 || nx + patch_radius >= next.width ||
                ny - patch_radius < 0 || ny + patch_radius >= next.height)
                continue;
            const double ma = patch_mean(prev, cx, cy);
            const double mb = patch_mean(next, nx, ny);
            double dot = 0.0, sa = 0.0, sb = 0.0;
            for (int y = -patch_radius; y <= patch_radius; ++y)
                for (int x = -patch_radius; x <= patch_radius; ++x) {
                    const double a = oneshot::luma_at(prev, cx + x, cy + y) - ma;
                    const double b = oneshot::luma_at(next, nx + x, ny + y) - mb;
                    dot += a * b;
                    sa += a * a;
                    sb += b * b;
                }
            const double score = (sa <= 0.0 || sb <= 0.0) ? -1.0 : dot / std::sqrt(sa * sb);
            if (score > best.score) {
                best.score = score;
                best.dx = dx;
                best.dy = dy;
            }
        }
    }
    return best;
}

}  // namespace oracle
