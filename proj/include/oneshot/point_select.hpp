#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oneshot/geometry.hpp"
#include "oneshot/image.hpp"
#include "oneshot/segmenter.hpp"

namespace oneshot {

enum class SelectStrategy { Single, Crosshairs, Random, KMedoids };

SelectStrategy select_strategy_from_string(const std::string& name);
std::string to_string(SelectStrategy s);

struct PointSet {
    int instance_id = 0;
    SelectStrategy strategy = SelectStrategy::Single;
    std::vector<Vec2> points;
};

// ---- strategies ----

// Just the annotated point.
PointSet select_single(const Vec2& q, int instance_id = 0);

// Center point plus per_arm points along each of the four axis directions at
// multiples of offset_px, in order (center, then per ring: left, right, up,
// down). Exactly 1 + 4*per_arm points; points falling outside the frame are
// clamped to its bounds, not dropped. Throws InvalidOffset for offset <= 0
// and InvalidOffset for per_arm < 1.
PointSet select_crosshairs(const Vec2& q, double offset_px, int per_arm, int frame_width,
                           int frame_height, int instance_id = 0);

// k distinct foreground pixels drawn uniformly without replacement; the draw
// is a partial Fisher-Yates over row-major foreground order, deterministic
// per seed. Throws MaskTooSmall when the mask has fewer than k pixels.
// Note: the pipeline-level "random" strategy treats its k as a total count
// that always includes the query point, so it calls this with k-1 and the
// query pixel removed from the pool (see build_point_set).
std::vector<Vec2> select_random(const Mask& mask, int k, std::uint64_t seed);

// k medoids of the foreground pixels under euclidean distance, deterministic.
// Small point sets (where the k-subset count is tiny) are solved exactly by
// enumeration, so the cost equals the brute-force optimum there. Larger masks
// use seeding on the k smallest normalized distance sums, assignment/update
// alternation to a fixed point, then single-swap descent; the result is
// always at least single-swap optimal (no medoid/non-medoid exchange lowers
// total cost). Throws MaskTooSmall when mask area < k.
std::vector<Vec2> select_kmedoids(const Mask& mask, int k);

// Segments frame 0 at the query point to get the sampling mask used by the
// Random and KMedoids strategies. Any segmentation failure (including area
// cap) surfaces as EmptyMask here: without a mask those strategies cannot run.
Mask bootstrap_mask(const Image& frame0, const Vec2& q, SegmenterBackend& segmenter);

// Strategy dispatch used by the pipeline. `k` is the total point count for
// Random (query point included) and KMedoids (medoids only).
PointSet build_point_set(SelectStrategy strategy, const Vec2& q, const Image& frame0,
                         SegmenterBackend& segmenter, double offset_px, int per_arm, int k,
                         std::uint64_t seed, int instance_id);

// Total within-cluster cost (sum of distances to the nearest medoid); the
// objective both select_kmedoids and its tests speak about.
double kmedoids_cost(const std::vector<Vec2>& points, const std::vector<Vec2>& medoids);

}  // namespace oneshot
