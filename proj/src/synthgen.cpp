#include "oneshot/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "oneshot/font5x7.hpp"
#include "oneshot/rng.hpp"

namespace oneshot {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Text block geometry at integer scale s: glyph cells are 5s x 7s with a
// one-base-column (s px) gap between cells.
int text_width(std::size_t n, int s) { return static_cast<int>(6 * n - 1) * s; }

struct IRect {
    int x0, y0, x1, y1;  // half-open
    bool overlaps(const IRect& o) const {
        return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
    }
    IRect expanded(int m) const { return {x0 - m, y0 - m, x1 + m, y1 + m}; }
};

Vec2 motion_offset(const Motion& motion, int t) {
    if (const auto* lin = std::get_if<LinearMotion>(&motion))
        return {lin->vx * t, lin->vy * t};
    const auto& sin_m = std::get<SinusoidalMotion>(motion);
    if (sin_m.period <= 0.0) throw InvalidSceneConfig("sinusoidal period must be positive");
    return {sin_m.amplitude * std::sin(2.0 * kPi * t / sin_m.period), 0.0};
}

double color_dist(const std::uint8_t* a, const std::uint8_t* b) {
    const double dr = double(a[0]) - b[0];
    const double dg = double(a[1]) - b[1];
    const double db = double(a[2]) - b[2];
    return std::sqrt(dr * dr + dg * dg + db * db);
}

}  // namespace

int plate_glyph_scale(std::size_t text_len, int plate_width, int plate_height) {
    if (text_len == 0) return 0;
    // One glyph cell of padding on each side: (6n-1)s text + 2s pad <= width,
    // 7s glyph + 2s pad <= height.
    const int s_w = plate_width / static_cast<int>(6 * text_len + 1);
    const int s_h = plate_height / 9;
    return std::max(0, std::min(s_w, s_h));
}

Image render_plate(const std::string& text, int plate_width, int plate_height) {
    if (text.empty()) throw EmptyString("plate string must be non-empty");
    for (char c : text) font_glyph(c);  // throws UnknownGlyph

    const int s = plate_glyph_scale(text.size(), plate_width, plate_height);
    if (7 * s < 8)
        throw StringTooLong("\"" + text + "\" does not fit " + std::to_string(plate_width) + "x" +
                            std::to_string(plate_height) + " at a readable glyph size");

    Image plate = Image::filled(plate_width, plate_height, kPlateFace[0], kPlateFace[1], kPlateFace[2]);
    const int tw = text_width(text.size(), s);
    const int x0 = (plate_width - tw) / 2;
    const int y0 = (plate_height - 7 * s) / 2;
    for (std::size_t i = 0; i < text.size(); ++i) {
        draw_glyph(plate, font_glyph(text[i]), x0 + static_cast<int>(i) * 6 * s, y0, s,
                   kPlateGlyph[0], kPlateGlyph[1], kPlateGlyph[2]);
    }
    return plate;
}

SyntheticScene generate_scene(const SceneConfig& cfg) {
    if (cfg.frames < 1) throw InvalidSceneConfig("frames must be >= 1");
    if (cfg.frame_width < 8 || cfg.frame_height < 8)
        throw InvalidSceneConfig("frame dimensions too small");
    if (cfg.plate_width > cfg.frame_width || cfg.plate_height > cfg.frame_height)
        throw InvalidSceneConfig("plate larger than frame");
    if (cfg.noise_sigma < 0.0) throw InvalidSceneConfig("noise sigma must be >= 0");
    if (cfg.max_step_px <= 0.0) throw InvalidSceneConfig("max step must be positive");

    const Image plate = render_plate(cfg.plate_string, cfg.plate_width, cfg.plate_height);

    // Nominal center path, then start selection so the whole sweep fits.
    std::vector<Vec2> offsets(cfg.frames);
    for (int t = 0; t < cfg.frames; ++t) offsets[t] = motion_offset(cfg.motion, t);

    Vec2 start;
    if (cfg.start) {
        start = *cfg.start;
    } else {
        double min_ox = 0, max_ox = 0, min_oy = 0, max_oy = 0;
        for (const Vec2& o : offsets) {
            min_ox = std::min(min_ox, o.x);
            max_ox = std::max(max_ox, o.x);
            min_oy = std::min(min_oy, o.y);
            max_oy = std::max(max_oy, o.y);
        }
        start = {cfg.frame_width / 2.0 - (min_ox + max_ox) / 2.0,
                 cfg.frame_height / 2.0 - (min_oy + max_oy) / 2.0};
    }

    // Integer paste positions and exact per-frame truth.
    std::vector<IRect> plate_rects(cfg.frames);
    SyntheticScene scene;
    scene.plate_string = cfg.plate_string;
    for (int t = 0; t < cfg.frames; ++t) {
        const Vec2 c = start + offsets[t];
        const int left = static_cast<int>(std::lround(c.x - cfg.plate_width / 2.0));
        const int top = static_cast<int>(std::lround(c.y - cfg.plate_height / 2.0));
        if (left < 0 || top < 0 || left + cfg.plate_width > cfg.frame_width ||
            top + cfg.plate_height > cfg.frame_height)
            throw PlateOutOfBounds("plate leaves the frame at frame " + std::to_string(t));
        plate_rects[t] = {left, top, left + cfg.plate_width, top + cfg.plate_height};
        scene.true_center.push_back({left + cfg.plate_width / 2.0, top + cfg.plate_height / 2.0});
    }
    for (int t = 1; t < cfg.frames; ++t) {
        if (distance(scene.true_center[t], scene.true_center[t - 1]) > cfg.max_step_px)
            throw InvalidSceneConfig("per-frame plate displacement exceeds max step at frame " +
                                     std::to_string(t));
    }

    // Static background, shared by all frames.
    const auto [base_r, base_g, base_b] = std::visit(
        [](const auto& bg) { return std::tuple{bg.r, bg.g, bg.b}; }, cfg.background);
    Image background = Image::filled(cfg.frame_width, cfg.frame_height, base_r, base_g, base_b);

    if (const auto* clutter = std::get_if<ClutterBackground>(&cfg.background)) {
        Rng rng(cfg.seed);
        const std::uint8_t base[3] = {base_r, base_g, base_b};
        for (int i = 0; i < clutter->distractors; ++i) {
            for (int attempt = 0; attempt < 1000; ++attempt) {
                const int w = 20 + static_cast<int>(rng.bounded(61));
                const int h = 20 + static_cast<int>(rng.bounded(61));
                if (w >= cfg.frame_width || h >= cfg.frame_height) continue;
                const int x = static_cast<int>(rng.bounded(cfg.frame_width - w));
                const int y = static_cast<int>(rng.bounded(cfg.frame_height - h));
                const std::uint8_t col[3] = {static_cast<std::uint8_t>(rng.bounded(256)),
                                             static_cast<std::uint8_t>(rng.bounded(256)),
                                             static_cast<std::uint8_t>(rng.bounded(256))};
                // Distractors must stay visually distinct from the plate face
                // (so segmentation cannot bleed into them) and from the base.
                if (color_dist(col, kPlateFace) < 80.0 || color_dist(col, base) < 40.0) continue;
                const IRect rect{x, y, x + w, y + h};
                bool clear = true;
                for (const IRect& pr : plate_rects)
                    if (rect.overlaps(pr.expanded(2))) {
                        clear = false;
                        break;
                    }
                if (!clear) continue;
                for (int yy = y; yy < y + h; ++yy)
                    for (int xx = x; xx < x + w; ++xx)
                        background.set(xx, yy, col[0], col[1], col[2]);
                break;
            }
        }
    }

    // Composite, then noise. One sequential noise stream makes every byte a
    // pure function of (seed, frame count, dimensions).
    Rng noise_rng(cfg.seed ^ 0x6E6F697365ULL);
    for (int t = 0; t < cfg.frames; ++t) {
        Frame f;
        f.index = t;
        f.image = background;
        const IRect& r = plate_rects[t];
        for (int y = 0; y < cfg.plate_height; ++y)
            for (int x = 0; x < cfg.plate_width; ++x) {
                const std::uint8_t* p = plate.px(x, y);
                f.image.set(r.x0 + x, r.y0 + y, p[0], p[1], p[2]);
            }
        if (cfg.noise_sigma > 0.0) {
            for (std::uint8_t& v : f.image.rgb) {
                const long nv = std::lround(v + cfg.noise_sigma * noise_rng.gaussian());
                v = static_cast<std::uint8_t>(std::clamp(nv, 0L, 255L));
            }
        }
        scene.video.frames.push_back(std::move(f));

        GroundTruthRecord gt;
        gt.frame_index = t;
        gt.instance_id = 0;
        gt.bbox = {double(r.x0), double(r.y0), double(r.x1), double(r.y1)};
        gt.plate = cfg.plate_string;
        scene.truth.push_back(std::move(gt));
    }
    return scene;
}

void write_scene(const std::filesystem::path& dir, const SyntheticScene& scene) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    save_sequence(dir / "frames", scene.video);
    save_annotations(dir / "annotations.json",
                     {QueryAnnotation{0, scene.true_center.front()}});
    save_ground_truth(dir / "groundtruth.jsonl", scene.truth);
}

}  // namespace oneshot
