#include "oneshot/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "oneshot/errors.hpp"

namespace oneshot {

namespace {

// Luma patch with precomputed mean; zero-variance patches surface as
// norm == 0.
struct LumaPatch {
    std::vector<double> v;  // mean-subtracted
    double norm = 0.0;      // sqrt(sum of squares)
    int side = 0;
};

LumaPatch extract_patch(const Image& img, int cx, int cy, int r) {
    LumaPatch p;
    p.side = 2 * r + 1;
    p.v.resize(static_cast<std::size_t>(p.side) * p.side);
    double sum = 0.0;
    std::size_t i = 0;
    for (int y = cy - r; y <= cy + r; ++y)
        for (int x = cx - r; x <= cx + r; ++x) sum += (p.v[i++] = luma_at(img, x, y));
    const double mean = sum / static_cast<double>(p.v.size());
    double sq = 0.0;
    for (double& val : p.v) {
        val -= mean;
        sq += val * val;
    }
    p.norm = std::sqrt(sq);
    return p;
}

// NCC of the reference patch against the window centered at (cx, cy).
// Returns -1 for flat windows, which therefore never win the search.
double ncc_at(const LumaPatch& ref, const Image& img, int cx, int cy, int r) {
    const int side = 2 * r + 1;
    double sum = 0.0;
    std::vector<double> w(static_cast<std::size_t>(side) * side);
    std::size_t i = 0;
    for (int y = cy - r; y <= cy + r; ++y)
        for (int x = cx - r; x <= cx + r; ++x) sum += (w[i++] = luma_at(img, x, y));
    const double mean = sum / static_cast<double>(w.size());
    double dot = 0.0, sq = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double c = w[j] - mean;
        dot += ref.v[j] * c;
        sq += c * c;
    }
    if (sq <= 0.0) return -1.0;
    return dot / (ref.norm * std::sqrt(sq));
}

// Parabola vertex through (-1, sm), (0, s0), (1, sp), clamped to [-0.5, 0.5].
double parabolic_offset(double sm, double s0, double sp) {
    const double denom = sm - 2.0 * s0 + sp;
    if (std::abs(denom) < 1e-12) return 0.0;
    return std::clamp(0.5 * (sm - sp) / denom, -0.5, 0.5);
}

}  // namespace

TrackStep ncc_track_point(const Image& prev, const Image& next, const Vec2& pos,
                          int patch_radius, int search_radius) {
    const int r = patch_radius;
    if (prev.width < 2 * r + 1 || prev.height < 2 * r + 1)
        throw OutOfBounds("frame smaller than the tracking patch");
    if (prev.width != next.width || prev.height != next.height)
        throw DimensionMismatch("tracking across frames of different sizes");

    const int cx = std::clamp(static_cast<int>(std::lround(pos.x)), r, prev.width - 1 - r);
    const int cy = std::clamp(static_cast<int>(std::lround(pos.y)), r, prev.height - 1 - r);

    const LumaPatch ref = extract_patch(prev, cx, cy, r);
    if (ref.norm <= 0.0) throw DegeneratePatch("reference patch has zero variance");

    // Valid displacement range keeps the candidate window inside `next`.
    const int dx_lo = std::max(-search_radius, r - cx);
    const int dx_hi = std::min(search_radius, next.width - 1 - r - cx);
    const int dy_lo = std::max(-search_radius, r - cy);
    const int dy_hi = std::min(search_radius, next.height - 1 - r - cy);

    const int sw = dx_hi - dx_lo + 1;
    const int sh = dy_hi - dy_lo + 1;
    std::vector<double> score(static_cast<std::size_t>(sw) * sh);
    double best = -2.0;
    int bdx = 0, bdy = 0;
    for (int dy = dy_lo; dy <= dy_hi; ++dy) {
        for (int dx = dx_lo; dx <= dx_hi; ++dx) {
            const double s = ncc_at(ref, next, cx + dx, cy + dy, r);
            score[static_cast<std::size_t>(dy - dy_lo) * sw + (dx - dx_lo)] = s;
            if (s > best) {
                best = s;
                bdx = dx;
                bdy = dy;
            }
        }
    }

    // Sub-pixel refinement; a perfect integer match needs none.
    double off_x = 0.0, off_y = 0.0;
    if (best < 1.0 - 1e-9) {
        auto at = [&](int dx, int dy) {
            return score[static_cast<std::size_t>(dy - dy_lo) * sw + (dx - dx_lo)];
        };
        if (bdx > dx_lo && bdx < dx_hi)
            off_x = parabolic_offset(at(bdx - 1, bdy), best, at(bdx + 1, bdy));
        if (bdy > dy_lo && bdy < dy_hi)
            off_y = parabolic_offset(at(bdx, bdy - 1), best, at(bdx, bdy + 1));
    }

    return {{cx + bdx + off_x, cy + bdy + off_y}, best};
}

std::vector<Trajectory> NccTracker::track(const VideoSequence& video, const PointSet& seeds,
                                          TrackDirection direction) {
    if (video.empty()) throw OutOfBounds("cannot track an empty sequence");
    if (seeds.points.empty()) throw OutOfBounds("cannot track an empty point set");
    for (const Vec2& s : seeds.points)
        if (s.x < 0 || s.y < 0 || s.x >= video.width() || s.y >= video.height())
            throw OutOfBounds("seed point (" + std::to_string(s.x) + ", " + std::to_string(s.y) +
                              ") outside the frame");

    const int n_frames = static_cast<int>(video.size());
    const int seed_frame = direction == TrackDirection::Forward ? 0 : n_frames - 1;
    const int step = direction == TrackDirection::Forward ? 1 : -1;

    std::vector<Trajectory> out;
    for (std::size_t pi = 0; pi < seeds.points.size(); ++pi) {
        Trajectory traj;
        traj.instance_id = seeds.instance_id;
        traj.point_index = static_cast<int>(pi);
        traj.positions.assign(n_frames, seeds.points[pi]);
        traj.visible.assign(n_frames, 0);
        traj.visible[seed_frame] = 1;

        Vec2 cur = seeds.points[pi];
        Vec2 last_confident = cur;
        int low_streak = 0;
        bool lost = false;
        for (int t = seed_frame; t != seed_frame + step * (n_frames - 1); t += step) {
            const int nt = t + step;
            if (lost) {
                traj.positions[nt] = last_confident;
                continue;
            }
            double score = -1.0;
            Vec2 npos = cur;
            try {
                const TrackStep s = ncc_track_point(video.frames[t].image,
                                                    video.frames[nt].image, cur,
                                                    opt_.patch_radius, opt_.search_radius);
                score = s.score;
                npos = s.pos;
            } catch (const DegeneratePatch&) {
                // A flat patch cannot be localized; scores as a lost step.
            }
            if (score >= opt_.min_score) {
                low_streak = 0;
                cur = npos;
                last_confident = npos;
                traj.positions[nt] = npos;
                traj.visible[nt] = 1;
            } else {
                ++low_streak;
                if (low_streak >= opt_.lost_after) {
                    lost = true;
                    traj.positions[nt] = last_confident;
                } else {
                    cur = npos;
                    traj.positions[nt] = npos;
                    traj.visible[nt] = 1;
                }
            }
        }
        out.push_back(std::move(traj));
    }
    return out;
}

double round_trip_error(const Trajectory& forward, const Trajectory& backward) {
    if (forward.positions.size() != backward.positions.size())
        throw LengthMismatch("trajectories cover different frame counts");
    return distance(forward.positions.front(), backward.positions.front());
}

std::vector<Trajectory> backward_refine(const VideoSequence& video,
                                        const std::vector<Trajectory>& forward,
                                        TrackerBackend& backend, double drop_threshold_px) {
    if (forward.empty()) return {};
    if (!backend.supports_backward())
        throw BackendFailure("tracker backend cannot run a backward pass");

    PointSet back_seeds;
    back_seeds.instance_id = forward.front().instance_id;
    for (const Trajectory& f : forward) back_seeds.points.push_back(f.positions.back());
    const std::vector<Trajectory> backward =
        backend.track(video, back_seeds, TrackDirection::Backward);

    std::vector<Trajectory> refined;
    for (std::size_t pi = 0; pi < forward.size(); ++pi) {
        const Trajectory& f = forward[pi];
        const Trajectory& b = backward[pi];
        Trajectory r = f;
        if (round_trip_error(f, b) > drop_threshold_px) {
            std::fill(r.visible.begin(), r.visible.end(), 0);
            refined.push_back(std::move(r));
            continue;
        }
        for (std::size_t t = 0; t < f.positions.size(); ++t) {
            const bool fv = f.visible[t], bv = b.visible[t];
            if (fv && bv)
                r.positions[t] = (f.positions[t] + b.positions[t]) * 0.5;
            else if (bv)
                r.positions[t] = b.positions[t];
            r.visible[t] = (fv || bv) ? 1 : 0;
        }
        refined.push_back(std::move(r));
    }
    return refined;
}

}  // namespace oneshot
