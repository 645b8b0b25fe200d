#include "oneshot/synthgen.hpp"

#include <cmath>

#include <doctest.h>

#include "oneshot/errors.hpp"
#include "oneshot/videoio.hpp"
#include "test_helpers.hpp"

using namespace oneshot;
using testutil::TempDir;

namespace {

Image crop(const Image& src, int x0, int y0, int w, int h) {
    Image out = Image::filled(w, h, 0, 0, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::uint8_t* p = src.px(x0 + x, y0 + y);
            out.set(x, y, p[0], p[1], p[2]);
        }
    return out;
}

}  // namespace

TEST_CASE("glyph scale picks the largest fit") {
    // 7 glyphs cost 6*7+1 = 43 columns of cells; height costs 9 cells.
    CHECK(plate_glyph_scale(7, 120, 40) == 2);
    CHECK(plate_glyph_scale(7, 43, 40) == 1);
    CHECK(plate_glyph_scale(7, 42, 40) == 0);
    CHECK(plate_glyph_scale(3, 120, 40) == 4);  // width would allow 6, height caps at 40/9
    CHECK(plate_glyph_scale(1, 700, 90) == 10);
}

TEST_CASE("render_plate validates its input") {
    CHECK_THROWS_AS(render_plate("", 120, 40), EmptyString);
    CHECK_THROWS_AS(render_plate("abc", 120, 40), UnknownGlyph);  // lowercase not in the font
    CHECK_THROWS_AS(render_plate("ABCDEFGHIJKLMNOPQRST", 120, 40), StringTooLong);
    // scale 1 means 7 px glyphs, under the 8 px floor
    CHECK_THROWS_AS(render_plate("ABC1234", 50, 40), StringTooLong);
    try {
        render_plate("AB?12", 120, 40);
        FAIL("expected UnknownGlyph");
    } catch (const UnknownGlyph& e) {
        CHECK(e.glyph == '?');
    }
}

TEST_CASE("render_plate is deterministic and uses the plate palette") {
    const Image a = render_plate("AB-1234", 120, 40);
    const Image b = render_plate("AB-1234", 120, 40);
    CHECK(a == b);
    CHECK(a.width == 120);
    CHECK(a.height == 40);

    bool saw_face = false, saw_glyph = false, saw_other = false;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            const std::uint8_t* p = a.px(x, y);
            if (p[0] == kPlateFace[0] && p[1] == kPlateFace[1] && p[2] == kPlateFace[2])
                saw_face = true;
            else if (p[0] == kPlateGlyph[0] && p[1] == kPlateGlyph[1] && p[2] == kPlateGlyph[2])
                saw_glyph = true;
            else
                saw_other = true;
        }
    CHECK(saw_face);
    CHECK(saw_glyph);
    CHECK_FALSE(saw_other);
}

TEST_CASE("linear motion produces the arithmetic center sequence") {
    SceneConfig cfg = testutil::small_scene(1, 30);
    cfg.plate_string = "AB1";
    cfg.plate_width = 40;
    cfg.plate_height = 20;
    cfg.motion = LinearMotion{2.0, 0.0};
    cfg.start = Vec2{50.0, 60.0};

    const SyntheticScene scene = generate_scene(cfg);
    REQUIRE(scene.truth.size() == 30);
    for (int t = 0; t < 30; ++t) {
        CHECK(scene.true_center[t].x == 50.0 + 2.0 * t);  // 50, 52, ..., 108
        CHECK(scene.true_center[t].y == 60.0);
        CHECK(scene.truth[t].bbox.center().x == scene.true_center[t].x);
        CHECK(scene.truth[t].frame_index == t);
        CHECK(scene.truth[t].plate == "AB1");
    }
}

TEST_CASE("noiseless frames carry the rendered plate byte for byte") {
    SceneConfig cfg = testutil::small_scene(3, 8);
    const SyntheticScene scene = generate_scene(cfg);
    const Image plate = render_plate(cfg.plate_string, cfg.plate_width, cfg.plate_height);
    const UniformBackground bg;

    for (int t = 0; t < cfg.frames; ++t) {
        const Image& frame = scene.video.frames[t].image;
        const BBox& box = scene.truth[t].bbox;
        const int x0 = static_cast<int>(box.x0), y0 = static_cast<int>(box.y0);
        CHECK(crop(frame, x0, y0, cfg.plate_width, cfg.plate_height) == plate);

        // everything outside the box is untouched background
        int off_plate_mismatches = 0;
        for (int y = 0; y < frame.height; ++y)
            for (int x = 0; x < frame.width; ++x) {
                if (box.contains({static_cast<double>(x), static_cast<double>(y)})) continue;
                const std::uint8_t* p = frame.px(x, y);
                if (p[0] != bg.r || p[1] != bg.g || p[2] != bg.b) ++off_plate_mismatches;
            }
        CHECK(off_plate_mismatches == 0);
    }
}

TEST_CASE("generation is deterministic in the seed") {
    SceneConfig cfg = testutil::small_scene(11, 6, 4.0);
    cfg.background = ClutterBackground{3};
    const SyntheticScene a = generate_scene(cfg);
    const SyntheticScene b = generate_scene(cfg);
    REQUIRE(a.video.size() == b.video.size());
    for (std::size_t t = 0; t < a.video.size(); ++t)
        CHECK(a.video.frames[t].image == b.video.frames[t].image);

    cfg.seed = 12;
    const SyntheticScene c = generate_scene(cfg);
    bool any_diff = false;
    for (std::size_t t = 0; t < a.video.size(); ++t)
        any_diff = any_diff || !(a.video.frames[t].image == c.video.frames[t].image);
    CHECK(any_diff);
}

TEST_CASE("sinusoidal motion follows the rounded sine sweep") {
    SceneConfig cfg = testutil::small_scene(5, 16);
    cfg.motion = SinusoidalMotion{12.0, 16.0};
    cfg.start = Vec2{120.0, 60.0};
    const SyntheticScene scene = generate_scene(cfg);
    for (int t = 0; t < cfg.frames; ++t) {
        // the paste snaps to the pixel grid, so the recorded center is the
        // continuous sine position rounded to the nearest integer
        const double cx = 120.0 + 12.0 * std::sin(2.0 * 3.14159265358979323846 * t / 16.0);
        const double half_w = cfg.plate_width / 2.0;
        const double expect_x = std::lround(cx - half_w) + half_w;
        CHECK(scene.true_center[t].x == expect_x);
    }
    // the sweep actually moves
    CHECK(scene.true_center[4].x > scene.true_center[0].x);
    CHECK(scene.true_center[12].x < scene.true_center[0].x);
}

TEST_CASE("scene validation rejects impossible configs") {
    SUBCASE("plate leaves the frame") {
        SceneConfig cfg = testutil::small_scene(1, 30);
        cfg.start = Vec2{60.0, 60.0};  // plate is 90 wide; x sweep exits on the left edge
        cfg.motion = LinearMotion{-3.0, 0.0};
        CHECK_THROWS_AS(generate_scene(cfg), PlateOutOfBounds);
    }
    SUBCASE("no start can fit an over-wide sweep") {
        SceneConfig cfg = testutil::small_scene(1, 200);
        cfg.motion = LinearMotion{3.0, 0.0};  // 600 px of travel in a 240 px frame
        CHECK_THROWS_AS(generate_scene(cfg), PlateOutOfBounds);
    }
    SUBCASE("per-frame step above the bound") {
        SceneConfig cfg = testutil::small_scene(1, 4);
        cfg.motion = LinearMotion{25.0, 0.0};
        CHECK_THROWS_AS(generate_scene(cfg), InvalidSceneConfig);
    }
    SUBCASE("zero frames") {
        SceneConfig cfg = testutil::small_scene(1, 0);
        CHECK_THROWS_AS(generate_scene(cfg), InvalidSceneConfig);
    }
    SUBCASE("plate larger than the frame") {
        SceneConfig cfg = testutil::small_scene(1, 4);
        cfg.plate_width = 500;
        CHECK_THROWS_AS(generate_scene(cfg), InvalidSceneConfig);
    }
}

TEST_CASE("clutter never touches the plate sweep") {
    SceneConfig cfg = testutil::small_scene(21, 10);
    cfg.background = ClutterBackground{5};
    const SyntheticScene scene = generate_scene(cfg);
    const Image plate = render_plate(cfg.plate_string, cfg.plate_width, cfg.plate_height);

    bool saw_distractor = false;
    const ClutterBackground bg = std::get<ClutterBackground>(cfg.background);
    for (int t = 0; t < cfg.frames; ++t) {
        const Image& frame = scene.video.frames[t].image;
        const BBox& box = scene.truth[t].bbox;
        // plate area identical to the clean render in every frame: no
        // distractor ever painted into the sweep
        CHECK(crop(frame, static_cast<int>(box.x0), static_cast<int>(box.y0), cfg.plate_width,
                   cfg.plate_height) == plate);
        for (int y = 0; y < frame.height && !saw_distractor; ++y)
            for (int x = 0; x < frame.width; ++x) {
                if (box.contains({static_cast<double>(x), static_cast<double>(y)})) continue;
                const std::uint8_t* p = frame.px(x, y);
                if (p[0] != bg.r || p[1] != bg.g || p[2] != bg.b) {
                    saw_distractor = true;
                    break;
                }
            }
    }
    CHECK(saw_distractor);
}

TEST_CASE("noise changes bytes but keeps the scene deterministic") {
    SceneConfig clean_cfg = testutil::small_scene(31, 4);
    SceneConfig noisy_cfg = clean_cfg;
    noisy_cfg.noise_sigma = 4.0;
    const SyntheticScene clean = generate_scene(clean_cfg);
    const SyntheticScene noisy = generate_scene(noisy_cfg);
    CHECK_FALSE(clean.video.frames[0].image == noisy.video.frames[0].image);
    // truth is noise-independent
    for (int t = 0; t < 4; ++t) CHECK(clean.truth[t].bbox == noisy.truth[t].bbox);
}

TEST_CASE("write_scene lays out frames, annotations, and ground truth") {
    TempDir dir;
    SceneConfig cfg = testutil::small_scene(41, 5);
    const SyntheticScene scene = generate_scene(cfg);
    write_scene(dir.path(), scene);

    const VideoSequence video = load_sequence(dir.path() / "frames");
    REQUIRE(video.size() == 5);
    for (int t = 0; t < 5; ++t) CHECK(video.frames[t].image == scene.video.frames[t].image);

    const auto annos = load_annotations(dir.path() / "annotations.json");
    REQUIRE(annos.size() == 1);
    CHECK(annos[0].point == scene.true_center[0]);

    const auto gts = load_ground_truth(dir.path() / "groundtruth.jsonl");
    REQUIRE(gts.size() == 5);
    CHECK(gts[0].plate == cfg.plate_string);
    CHECK(gts[4].bbox == scene.truth[4].bbox);
}
