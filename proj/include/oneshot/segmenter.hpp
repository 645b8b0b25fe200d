#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "oneshot/geometry.hpp"
#include "oneshot/image.hpp"
#include "oneshot/videoio.hpp"

namespace oneshot {

/// Promptable segmentation backend: a set of point prompts on one frame in,
/// a single binary mask out. Implementations must be safe to call from
/// several threads unless max_concurrency() says otherwise.
class SegmenterBackend {
public:
    virtual ~SegmenterBackend() = default;

    /// Returns the mask for the object under `prompts`. Throws EmptyMask when
    /// no admissible region exists and AreaCapExceeded when every candidate
    /// region is background bleed.
    virtual Mask segment(const Image& frame, const std::vector<Vec2>& prompts) = 0;

    /// 0 means "any number of concurrent calls"; 1 requests serialized access.
    virtual int max_concurrency() const { return 0; }
};

/// Color-similarity region grower:
///  - one 8-connected BFS region per distinct prompt pixel, admitting a pixel
///    when the RGB euclidean distance to the running region mean is < tau;
///  - regions larger than area_cap * frame pixels are treated as background
///    bleed and dropped (AreaCapExceeded if that removes every region);
///  - the result is the connected component of the union that holds the most
///    prompt points (majority), largest area breaking ties;
///  - mask.score is the fraction of prompt points inside the final mask.
/// Deterministic and invariant to prompt order.
class RegionGrowSegmenter : public SegmenterBackend {
public:
    explicit RegionGrowSegmenter(double tau = 30.0, double area_cap = 0.25)
        : tau_(tau), area_cap_(area_cap) {}

    Mask segment(const Image& frame, const std::vector<Vec2>& prompts) override;

    double tau() const { return tau_; }
    double area_cap() const { return area_cap_; }

private:
    double tau_;
    double area_cap_;
};

/// Tight half-open bounding box of the mask's foreground.
/// Throws EmptyMask on an all-background mask.
BBox mask_to_bbox(const Mask& mask);

/// Segments one frame from the trajectory points visible there and converts
/// the mask to a detection. Segmentation misses (EmptyMask, AreaCapExceeded)
/// come back as nullopt: a per-frame miss, never a pipeline abort. Transport
/// errors from external backends propagate.
std::optional<Detection> detect_frame(const Frame& frame, const std::vector<Vec2>& prompts,
                                      SegmenterBackend& backend, int instance_id,
                                      Mask* mask_out = nullptr);

}  // namespace oneshot
