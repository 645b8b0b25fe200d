#include "oneshot/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "oneshot/errors.hpp"

namespace oneshot {

namespace {

struct Pix {
    int x, y;
    bool operator<(const Pix& o) const { return y != o.y ? y < o.y : x < o.x; }
    bool operator==(const Pix& o) const { return x == o.x && y == o.y; }
};

constexpr int kNeighbors8[8][2] = {{0, -1}, {0, 1},  {-1, 0}, {1, 0},
                                   {-1, -1}, {1, -1}, {-1, 1}, {1, 1}};

Pix clamp_prompt(const Image& frame, const Vec2& p) {
    const int x = std::clamp(static_cast<int>(std::lround(p.x)), 0, frame.width - 1);
    const int y = std::clamp(static_cast<int>(std::lround(p.y)), 0, frame.height - 1);
    return {x, y};
}

// BFS region growth from one seed. Admission compares the candidate color to
// the running mean of everything admitted so far. Growth stops (and reports
// bleed) as soon as the region exceeds `cap` pixels.
bool grow_region(const Image& frame, Pix seed, double tau, std::size_t cap,
                 std::vector<std::uint8_t>& out) {
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(frame.width) * frame.height, 0);
    std::deque<Pix> queue;
    std::vector<Pix> admitted;
    double mean[3];
    const std::uint8_t* sp = frame.px(seed.x, seed.y);
    for (int c = 0; c < 3; ++c) mean[c] = sp[c];

    queue.push_back(seed);
    seen[static_cast<std::size_t>(seed.y) * frame.width + seed.x] = 1;
    admitted.push_back(seed);

    while (!queue.empty()) {
        if (admitted.size() > cap) return false;
        const Pix p = queue.front();
        queue.pop_front();
        for (const auto& d : kNeighbors8) {
            const int nx = p.x + d[0];
            const int ny = p.y + d[1];
            if (!frame.in_bounds(nx, ny)) continue;
            std::uint8_t& mark = seen[static_cast<std::size_t>(ny) * frame.width + nx];
            if (mark) continue;
            mark = 1;
            const std::uint8_t* q = frame.px(nx, ny);
            const double dr = q[0] - mean[0];
            const double dg = q[1] - mean[1];
            const double db = q[2] - mean[2];
            if (std::sqrt(dr * dr + dg * dg + db * db) >= tau) continue;
            const double n = static_cast<double>(admitted.size());
            for (int c = 0; c < 3; ++c) mean[c] = (mean[c] * n + q[c]) / (n + 1.0);
            admitted.push_back({nx, ny});
            queue.push_back({nx, ny});
        }
    }
    if (admitted.size() > cap) return false;
    for (const Pix& p : admitted) out[static_cast<std::size_t>(p.y) * frame.width + p.x] = 1;
    return true;
}

}  // namespace

Mask RegionGrowSegmenter::segment(const Image& frame, const std::vector<Vec2>& prompts) {
    if (prompts.empty()) throw EmptyMask("no prompt points");
    const std::size_t cap = static_cast<std::size_t>(
        area_cap_ * static_cast<double>(frame.width) * frame.height);

    // Distinct prompt pixels, grown independently so the union cannot depend
    // on prompt order.
    std::set<Pix> seeds;
    for (const Vec2& p : prompts) seeds.insert(clamp_prompt(frame, p));

    std::vector<std::uint8_t> unioned(static_cast<std::size_t>(frame.width) * frame.height, 0);
    int kept_regions = 0;
    for (const Pix& seed : seeds)
        kept_regions += grow_region(frame, seed, tau_, cap, unioned) ? 1 : 0;
    if (kept_regions == 0)
        throw AreaCapExceeded("every prompt region exceeds " + std::to_string(area_cap_) +
                              " of the frame");

    // Connected components of the union; pick by (prompt hits, area), with the
    // top-left-most pixel as the final deterministic tie break.
    std::vector<int> label(unioned.size(), -1);
    struct Comp {
        int prompt_hits = 0;
        int area = 0;
        Pix first{0, 0};
    };
    std::vector<Comp> comps;
    std::deque<Pix> queue;
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * frame.width + x;
            if (!unioned[i] || label[i] >= 0) continue;
            const int id = static_cast<int>(comps.size());
            comps.push_back({0, 0, {x, y}});
            label[i] = id;
            queue.push_back({x, y});
            while (!queue.empty()) {
                const Pix p = queue.front();
                queue.pop_front();
                ++comps[id].area;
                for (const auto& d : kNeighbors8) {
                    const int nx = p.x + d[0];
                    const int ny = p.y + d[1];
                    if (nx < 0 || nx >= frame.width || ny < 0 || ny >= frame.height) continue;
                    const std::size_t ni = static_cast<std::size_t>(ny) * frame.width + nx;
                    if (!unioned[ni] || label[ni] >= 0) continue;
                    label[ni] = id;
                    queue.push_back({nx, ny});
                }
            }
        }
    }

    for (const Vec2& p : prompts) {
        const Pix px = clamp_prompt(frame, p);
        const std::size_t i = static_cast<std::size_t>(px.y) * frame.width + px.x;
        if (unioned[i]) ++comps[label[i]].prompt_hits;
    }

    int best = 0;
    for (int id = 1; id < static_cast<int>(comps.size()); ++id) {
        const Comp& a = comps[id];
        const Comp& b = comps[best];
        if (a.prompt_hits != b.prompt_hits ? a.prompt_hits > b.prompt_hits
                                           : (a.area != b.area ? a.area > b.area
                                                               : a.first < b.first))
            best = id;
    }

    Mask mask = Mask::blank(frame.width, frame.height);
    for (std::size_t i = 0; i < unioned.size(); ++i) mask.fg[i] = (label[i] == best) ? 1 : 0;

    int hits = 0;
    for (const Vec2& p : prompts) {
        const Pix px = clamp_prompt(frame, p);
        hits += mask.at(px.x, px.y) ? 1 : 0;
    }
    mask.score = static_cast<double>(hits) / static_cast<double>(prompts.size());
    return mask;
}

BBox mask_to_bbox(const Mask& mask) {
    int x0 = mask.width, y0 = mask.height, x1 = -1, y1 = -1;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) throw EmptyMask("mask has no foreground");
    return {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x1 + 1),
            static_cast<double>(y1 + 1)};
}

std::optional<Detection> detect_frame(const Frame& frame, const std::vector<Vec2>& prompts,
                                      SegmenterBackend& backend, int instance_id, Mask* mask_out) {
    if (prompts.empty()) return std::nullopt;
    Mask mask;
    try {
        mask = backend.segment(frame.image, prompts);
    } catch (const EmptyMask&) {
        return std::nullopt;
    } catch (const AreaCapExceeded&) {
        return std::nullopt;
    }
    if (mask.area() == 0) return std::nullopt;

    Detection det;
    det.frame_index = frame.index;
    det.instance_id = instance_id;
    det.bbox = mask_to_bbox(mask);
    det.confidence = mask.score;
    if (mask_out) *mask_out = std::move(mask);
    return det;
}

}  // namespace oneshot
