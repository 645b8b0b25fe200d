#pragma once

#include <memory>
#include <vector>

#include "oneshot/geometry.hpp"
#include "oneshot/image.hpp"
#include "oneshot/point_select.hpp"

namespace oneshot {

enum class TrackDirection { Forward, Backward };

// Per-point track through a sequence. positions/visible are indexed by
// absolute frame index regardless of tracking direction; the seed frame
// (0 forward, last backward) is always visible.
struct Trajectory {
    int instance_id = 0;
    int point_index = 0;
    std::vector<Vec2> positions;
    std::vector<char> visible;

    int visible_count() const {
        int n = 0;
        for (char v : visible) n += (v != 0);
        return n;
    }
};

struct TrackStep {
    Vec2 pos;
    double score;
};

// Point tracking backend. Forward tracking takes seeds at frame 0; backward
// takes seeds at the last frame and walks the sequence in reverse.
class TrackerBackend {
public:
    virtual ~TrackerBackend() = default;
    virtual std::vector<Trajectory> track(const VideoSequence& video, const PointSet& seeds,
                                          TrackDirection direction) = 0;
    virtual bool supports_backward() const = 0;
};

// Single-step template match: the grayscale patch of radius `patch_radius`
// around `pos` in `prev` (center clamped so the window fits) is scanned over
// integer displacements within `search_radius` in `next`, scored by
// normalized cross-correlation, and the winning displacement is refined to
// sub-pixel by a parabolic fit through the neighboring scores (skipped when
// the peak is already a perfect match). Flat candidate windows score -1;
// a flat reference patch throws DegeneratePatch.
TrackStep ncc_track_point(const Image& prev, const Image& next, const Vec2& pos,
                          int patch_radius, int search_radius);

struct NccTrackerOptions {
    int patch_radius = 7;
    int search_radius = 20;
    double min_score = 0.5;  // below this counts toward the lost streak
    int lost_after = 3;      // consecutive low-score frames before a point is lost
};

// Built-in tracker: ncc_track_point per frame transition, with a lost rule.
// Once `lost_after` consecutive steps score under `min_score`, the point
// turns invisible for the rest of the pass and its position freezes at the
// last confident estimate (no extrapolation).
class NccTracker : public TrackerBackend {
public:
    explicit NccTracker(const NccTrackerOptions& opt = {}) : opt_(opt) {}

    std::vector<Trajectory> track(const VideoSequence& video, const PointSet& seeds,
                                  TrackDirection direction) override;
    bool supports_backward() const override { return true; }

    const NccTrackerOptions& options() const { return opt_; }

private:
    NccTrackerOptions opt_;
};

// Distance between the forward trajectory's frame-0 position (the seed) and
// the backward pass's frame-0 endpoint. Throws LengthMismatch when the two
// trajectories cover different frame counts.
double round_trip_error(const Trajectory& forward, const Trajectory& backward);

// Runs a backward pass seeded at each forward trajectory's last-frame
// position and merges: per frame, the mean of the two positions where both
// are visible, otherwise whichever one is visible. Points whose round-trip
// error exceeds `drop_threshold_px` are dropped (invisible everywhere).
// Merging never adds trajectories; it can only drop them.
std::vector<Trajectory> backward_refine(const VideoSequence& video,
                                        const std::vector<Trajectory>& forward,
                                        TrackerBackend& backend, double drop_threshold_px);

}  // namespace oneshot
