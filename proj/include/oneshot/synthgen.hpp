#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "oneshot/geometry.hpp"
#include "oneshot/image.hpp"
#include "oneshot/videoio.hpp"

// Deterministic synthetic plate scenes with exact ground truth. Given the same
// SceneConfig, generated frames are byte-identical on every platform: all
// randomness comes from the SplitMix64 stream in rng.hpp and noise uses an
// Irwin-Hall gaussian, so no libm rounding differences can leak into pixels.

namespace oneshot {

struct LinearMotion {
    double vx = 0.0;  // plate-center displacement per frame, px
    double vy = 0.0;
};

// Horizontal sweep: center x offset = amplitude * sin(2*pi*t / period).
struct SinusoidalMotion {
    double amplitude = 0.0;  // px
    double period = 30.0;    // frames
};

using Motion = std::variant<LinearMotion, SinusoidalMotion>;

struct UniformBackground {
    std::uint8_t r = 90, g = 110, b = 130;
};

// Uniform base fill plus solid distractor rectangles. Distractors are static,
// never overlap (or touch) the plate at any frame, and keep their colors away
// from the plate face so they cannot merge with it.
struct ClutterBackground {
    int distractors = 4;
    std::uint8_t r = 90, g = 110, b = 130;
};

using Background = std::variant<UniformBackground, ClutterBackground>;

struct SceneConfig {
    std::uint64_t seed = 1;
    int frames = 30;
    int frame_width = 640;
    int frame_height = 360;
    std::string plate_string = "ABC1234";
    int plate_width = 120;
    int plate_height = 40;
    Motion motion = LinearMotion{2.0, 0.0};
    // Plate-center position at frame 0; picked automatically (so the whole
    // sweep stays inside the frame) when unset.
    std::optional<Vec2> start;
    double noise_sigma = 0.0;
    Background background = UniformBackground{};
    // Upper bound on per-frame center displacement, validated at generation so
    // scenes stay trackable with the default search radius.
    double max_step_px = 20.0;
};

struct SyntheticScene {
    VideoSequence video;
    std::vector<GroundTruthRecord> truth;  // one record per frame, instance 0
    std::vector<Vec2> true_center;         // exact pasted plate center per frame
    std::string plate_string;
};

// Plate face and glyph colors (light face, dark glyphs).
inline constexpr std::uint8_t kPlateFace[3] = {210, 210, 210};
inline constexpr std::uint8_t kPlateGlyph[3] = {30, 30, 30};

// Renders `text` centered on a plate_width x plate_height face. Glyphs use the
// largest integer scale that fits with one glyph-cell of padding; the scale
// must give at least 8 px glyph height or StringTooLong is thrown.
Image render_plate(const std::string& text, int plate_width, int plate_height);

// Largest usable glyph scale for render_plate, 0 if nothing fits.
int plate_glyph_scale(std::size_t text_len, int plate_width, int plate_height);

SyntheticScene generate_scene(const SceneConfig& cfg);

// Writes frames/, annotations.json (query point = exact frame-0 plate center)
// and groundtruth.jsonl under `dir`.
void write_scene(const std::filesystem::path& dir, const SyntheticScene& scene);

}  // namespace oneshot
