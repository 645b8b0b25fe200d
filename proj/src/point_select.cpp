#include "oneshot/point_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "oneshot/errors.hpp"
#include "oneshot/rng.hpp"

namespace oneshot {

SelectStrategy select_strategy_from_string(const std::string& name) {
    if (name == "single") return SelectStrategy::Single;
    if (name == "crosshairs") return SelectStrategy::Crosshairs;
    if (name == "random") return SelectStrategy::Random;
    if (name == "kmedoids") return SelectStrategy::KMedoids;
    throw ConfigError("unknown select strategy \"" + name + "\"");
}

std::string to_string(SelectStrategy s) {
    switch (s) {
        case SelectStrategy::Single: return "single";
        case SelectStrategy::Crosshairs: return "crosshairs";
        case SelectStrategy::Random: return "random";
        case SelectStrategy::KMedoids: return "kmedoids";
    }
    return "?";
}

PointSet select_single(const Vec2& q, int instance_id) {
    return {instance_id, SelectStrategy::Single, {q}};
}

PointSet select_crosshairs(const Vec2& q, double offset_px, int per_arm, int frame_width,
                           int frame_height, int instance_id) {
    if (offset_px <= 0.0) throw InvalidOffset("crosshairs offset must be positive");
    if (per_arm < 1) throw InvalidOffset("crosshairs needs at least one point per arm");

    PointSet set{instance_id, SelectStrategy::Crosshairs, {}};
    auto clamped = [&](double x, double y) -> Vec2 {
        return {std::clamp(x, 0.0, static_cast<double>(frame_width - 1)),
                std::clamp(y, 0.0, static_cast<double>(frame_height - 1))};
    };
    set.points.push_back(clamped(q.x, q.y));
    for (int ring = 1; ring <= per_arm; ++ring) {
        const double d = ring * offset_px;
        set.points.push_back(clamped(q.x - d, q.y));
        set.points.push_back(clamped(q.x + d, q.y));
        set.points.push_back(clamped(q.x, q.y - d));
        set.points.push_back(clamped(q.x, q.y + d));
    }
    return set;
}

namespace {

std::vector<Vec2> mask_foreground(const Mask& mask) {
    std::vector<Vec2> pts;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) pts.push_back({static_cast<double>(x), static_cast<double>(y)});
    return pts;
}

}  // namespace

std::vector<Vec2> select_random(const Mask& mask, int k, std::uint64_t seed) {
    if (k < 0) throw MaskTooSmall("cannot draw a negative point count");
    std::vector<Vec2> pool = mask_foreground(mask);
    if (static_cast<int>(pool.size()) < k)
        throw MaskTooSmall("mask area " + std::to_string(pool.size()) + " < k=" + std::to_string(k));

    Rng rng(seed);
    std::vector<Vec2> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) {
        const std::size_t j = i + rng.bounded(pool.size() - i);
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

double kmedoids_cost(const std::vector<Vec2>& points, const std::vector<Vec2>& medoids) {
    double cost = 0.0;
    for (const Vec2& p : points) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec2& m : medoids) best = std::min(best, distance(p, m));
        cost += best;
    }
    return cost;
}

std::vector<Vec2> select_kmedoids(const Mask& mask, int k) {
    const std::vector<Vec2> pts = mask_foreground(mask);
    const int n = static_cast<int>(pts.size());
    if (k < 1) throw MaskTooSmall("k must be >= 1");
    if (n < k) throw MaskTooSmall("mask area " + std::to_string(n) + " < k=" + std::to_string(k));

    std::vector<double> dist(static_cast<std::size_t>(n) * n);
    auto d = [&](int i, int j) -> double& { return dist[static_cast<std::size_t>(i) * n + j]; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) = distance(pts[i], pts[j]);

    auto assignment_cost = [&](const std::vector<int>& meds) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int m : meds) best = std::min(best, d(i, m));
            total += best;
        }
        return total;
    };

    // Small point sets are solved exactly: the swap descent below is a local
    // search and can stall one swap away from the optimum (three near-corner
    // clusters on a tiny grid already exhibit this), while enumerating every
    // k-subset is cheap here. Ties keep the first subset in lexicographic
    // point order, so the result stays deterministic.
    const auto subsets_capped = [](int nn, int kk, double cap) {
        double c = 1.0;
        for (int i = 1; i <= kk; ++i) {
            c = c * (nn - kk + i) / i;
            if (c > cap) return cap + 1.0;
        }
        return c;
    };
    if (subsets_capped(n, k, 20000.0) * n <= 2e6) {
        std::vector<int> pick(k);
        std::iota(pick.begin(), pick.end(), 0);
        std::vector<int> best_pick = pick;
        double best_cost = assignment_cost(pick);
        while (true) {
            int i = k - 1;
            while (i >= 0 && pick[i] == n - k + i) --i;
            if (i < 0) break;
            ++pick[i];
            for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
            const double c = assignment_cost(pick);
            if (c < best_cost - 1e-12) {
                best_cost = c;
                best_pick = pick;
            }
        }
        std::vector<Vec2> out;
        out.reserve(k);
        for (int m : best_pick) out.push_back(pts[m]);
        return out;
    }

    // Seeding: v_j = sum_i d(i,j) / sum_l d(i,l); take the k smallest. Points
    // central to dense areas get small v.
    std::vector<double> row_sum(n, 0.0);
    for (int i = 0; i < n; ++i) row_sum[i] = std::accumulate(&d(i, 0), &d(i, 0) + n, 0.0);
    std::vector<double> v(n, 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) v[j] += row_sum[i] > 0.0 ? d(i, j) / row_sum[i] : 0.0;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
    std::vector<int> medoids(order.begin(), order.begin() + k);
    std::sort(medoids.begin(), medoids.end());

    // Alternate assignment and per-cluster medoid update until stable.
    for (int iter = 0; iter < 1000; ++iter) {
        std::vector<int> owner(n, 0);
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int mi = 0; mi < k; ++mi)
                if (d(i, medoids[mi]) < best) {
                    best = d(i, medoids[mi]);
                    owner[i] = mi;
                }
        }
        std::vector<int> next(medoids);
        for (int mi = 0; mi < k; ++mi) {
            double best_cost = std::numeric_limits<double>::infinity();
            int best_idx = medoids[mi];
            for (int cand = 0; cand < n; ++cand) {
                if (owner[cand] != mi) continue;
                double c = 0.0;
                for (int i = 0; i < n; ++i)
                    if (owner[i] == mi) c += d(cand, i);
                if (c < best_cost - 1e-12) {
                    best_cost = c;
                    best_idx = cand;
                }
            }
            next[mi] = best_idx;
        }
        std::sort(next.begin(), next.end());
        if (next == medoids) break;
        medoids = std::move(next);
    }

    // Single-swap descent: accept any (medoid, non-medoid) exchange that
    // strictly lowers total cost, until none exists. The fixed point is the
    // local-optimality guarantee callers rely on.
    double cost = assignment_cost(medoids);
    bool improved = true;
    while (improved) {
        improved = false;
        for (int mi = 0; mi < k && !improved; ++mi) {
            for (int cand = 0; cand < n && !improved; ++cand) {
                if (std::find(medoids.begin(), medoids.end(), cand) != medoids.end()) continue;
                std::vector<int> trial(medoids);
                trial[mi] = cand;
                const double c = assignment_cost(trial);
                if (c < cost - 1e-9) {
                    std::sort(trial.begin(), trial.end());
                    medoids = std::move(trial);
                    cost = c;
                    improved = true;
                }
            }
        }
    }

    std::vector<Vec2> out;
    out.reserve(k);
    for (int m : medoids) out.push_back(pts[m]);
    return out;
}

Mask bootstrap_mask(const Image& frame0, const Vec2& q, SegmenterBackend& segmenter) {
    try {
        Mask m = segmenter.segment(frame0, {q});
        if (m.area() == 0) throw EmptyMask("segmenter returned an empty mask at the query point");
        return m;
    } catch (const AreaCapExceeded& e) {
        throw EmptyMask(std::string("no usable region at the query point: ") + e.what());
    }
}

PointSet build_point_set(SelectStrategy strategy, const Vec2& q, const Image& frame0,
                         SegmenterBackend& segmenter, double offset_px, int per_arm, int k,
                         std::uint64_t seed, int instance_id) {
    switch (strategy) {
        case SelectStrategy::Single:
            return select_single(q, instance_id);
        case SelectStrategy::Crosshairs:
            return select_crosshairs(q, offset_px, per_arm, frame0.width, frame0.height,
                                     instance_id);
        case SelectStrategy::Random: {
            if (k < 1) throw MaskTooSmall("random strategy needs k >= 1");
            Mask mask = bootstrap_mask(frame0, q, segmenter);
            // k counts the query point; draw the rest from the mask minus the
            // query pixel so the set holds k distinct positions.
            const int qx = std::clamp(static_cast<int>(std::lround(q.x)), 0, mask.width - 1);
            const int qy = std::clamp(static_cast<int>(std::lround(q.y)), 0, mask.height - 1);
            if (mask.at(qx, qy)) mask.set(qx, qy, false);
            PointSet set{instance_id, SelectStrategy::Random, {q}};
            for (const Vec2& p : select_random(mask, k - 1, seed)) set.points.push_back(p);
            return set;
        }
        case SelectStrategy::KMedoids: {
            const Mask mask = bootstrap_mask(frame0, q, segmenter);
            return {instance_id, SelectStrategy::KMedoids, select_kmedoids(mask, k)};
        }
    }
    throw ConfigError("unhandled select strategy");
}

}  // namespace oneshot
