#include "oneshot/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "oneshot/config.hpp"
#include "oneshot/errors.hpp"
#include "oneshot/evalkit.hpp"
#include "oneshot/synthgen.hpp"
#include "oneshot/videoio.hpp"
#include "oneshot/wire.hpp"
#include "test_helpers.hpp"

using namespace oneshot;
namespace fs = std::filesystem;

namespace {

// A clean default-size scene, short enough to keep the suite quick. The
// 640x360 frame matters: center_crop needs room for its window so the
// builtin recognizer sees undistorted glyphs.
SyntheticScene demo_scene() {
    SceneConfig cfg;
    cfg.seed = 404;
    cfg.frames = 12;
    cfg.motion = LinearMotion{3.0, 1.0};
    return generate_scene(cfg);
}

std::vector<QueryAnnotation> seed_annotation(const SyntheticScene& scene, int instance_id) {
    QueryAnnotation ann;
    ann.instance_id = instance_id;
    ann.point = scene.true_center[0];
    return {ann};
}

}  // namespace

TEST_CASE("pipeline refuses to run without input") {
    const SyntheticScene scene = demo_scene();
    Config cfg;
    const PipelineBackends backends = make_backends(cfg, "");
    CHECK_THROWS_AS(run_pipeline(scene.video, {}, cfg, backends), AnnotationsEmpty);
    CHECK_THROWS_AS(run_pipeline(VideoSequence{}, seed_annotation(scene, 0), cfg, backends),
                    MissingFrame);
}

TEST_CASE("pipeline finds and reads the plate on a clean scene") {
    const SyntheticScene scene = demo_scene();
    Config cfg;
    const PipelineBackends backends = make_backends(cfg, "");
    const PipelineOutput out = run_pipeline(scene.video, seed_annotation(scene, 7), cfg, backends);

    // one detection per frame, in frame order, tagged with the query instance
    REQUIRE(out.detections.size() == scene.video.size());
    int good = 0;
    for (std::size_t f = 0; f < out.detections.size(); ++f) {
        const Detection& d = out.detections[f];
        CHECK(d.frame_index == static_cast<int>(f));
        CHECK(d.instance_id == 7);
        CHECK(d.confidence > 0.0);
        if (iou(d.bbox, scene.truth[f].bbox) >= 0.9) ++good;
    }
    CHECK(good >= static_cast<int>(0.95 * scene.video.size()));

    // every detection got a caption and the parsed plate travelled back
    REQUIRE(out.recognitions.size() == out.detections.size());
    for (std::size_t i = 0; i < out.recognitions.size(); ++i) {
        const RecognitionRecord& r = out.recognitions[i];
        CHECK(r.frame_index == out.detections[i].frame_index);
        CHECK(r.instance_id == 7);
        CHECK(r.prompt == "P6");
        CHECK(!r.caption.empty());
        CHECK(r.plate == out.detections[i].plate);
    }

    REQUIRE(out.plates.size() == 1);
    CHECK(out.plates[0].instance_id == 7);
    REQUIRE(out.plates[0].plate.has_value());
    CHECK(*out.plates[0].plate == scene.plate_string);
}

TEST_CASE("disabling recognition still yields detections") {
    const SyntheticScene scene = demo_scene();
    Config cfg;
    cfg.set("recog.enabled", "false");
    const PipelineBackends backends = make_backends(cfg, "");
    CHECK(backends.recognizer == nullptr);

    const PipelineOutput out = run_pipeline(scene.video, seed_annotation(scene, 0), cfg, backends);
    CHECK(out.detections.size() == scene.video.size());
    CHECK(out.recognitions.empty());
    CHECK(out.plates.empty());
    for (const Detection& d : out.detections) CHECK(!d.plate.has_value());

    std::vector<std::string> stages;
    for (const StageTiming& t : out.timing) stages.push_back(t.stage);
    CHECK(stages == std::vector<std::string>{"select", "track", "segment", "total"});
}

TEST_CASE("stage timings cover the whole run") {
    const SyntheticScene scene = demo_scene();
    Config cfg;
    const PipelineBackends backends = make_backends(cfg, "");
    const PipelineOutput out = run_pipeline(scene.video, seed_annotation(scene, 0), cfg, backends);

    std::vector<std::string> stages;
    for (const StageTiming& t : out.timing) {
        stages.push_back(t.stage);
        CHECK(t.millis >= 0.0);
    }
    CHECK(stages == std::vector<std::string>{"select", "track", "segment", "recognize",
                                             "aggregate", "total"});
}

TEST_CASE("results do not depend on the worker count") {
    const SyntheticScene scene = demo_scene();
    Config serial;
    serial.set("pipeline.workers", "1");
    Config wide;
    wide.set("pipeline.workers", "8");

    const auto a =
        run_pipeline(scene.video, seed_annotation(scene, 3), serial, make_backends(serial, ""));
    const auto b =
        run_pipeline(scene.video, seed_annotation(scene, 3), wide, make_backends(wide, ""));
    CHECK(a.detections == b.detections);
    CHECK(a.recognitions == b.recognitions);
    CHECK(a.plates == b.plates);
}

TEST_CASE("repeated runs are identical") {
    const SyntheticScene scene = demo_scene();
    Config cfg;
    const PipelineBackends backends = make_backends(cfg, "");
    const auto ann = seed_annotation(scene, 0);
    const auto a = run_pipeline(scene.video, ann, cfg, backends);
    const auto b = run_pipeline(scene.video, ann, cfg, backends);
    CHECK(a.detections == b.detections);
    CHECK(a.recognitions == b.recognitions);
    CHECK(a.plates == b.plates);
}

TEST_CASE("mask and patch dumps land on disk") {
    const SyntheticScene scene = demo_scene();
    Config cfg;
    const PipelineBackends backends = make_backends(cfg, "");
    testutil::TempDir dir;

    PipelineOptions opts;
    opts.dump_masks_dir = (dir.path() / "masks").string();
    opts.dump_patches_dir = (dir.path() / "patches").string();
    const PipelineOutput out =
        run_pipeline(scene.video, seed_annotation(scene, 2), cfg, backends, opts);

    std::size_t masks = 0;
    std::size_t patches = 0;
    for (const auto& e : fs::directory_iterator(opts.dump_masks_dir)) {
        (void)e;
        ++masks;
    }
    for (const auto& e : fs::directory_iterator(opts.dump_patches_dir)) {
        (void)e;
        ++patches;
    }
    CHECK(masks == out.detections.size());
    CHECK(patches == out.detections.size());

    // spot check one of each: the mask matches the frame size, the patch is
    // the fixed recognizer input size
    const Mask m = decode_pgm(read_file(fs::path(opts.dump_masks_dir) / "mask_00000_i2.pgm"));
    CHECK(m.width == scene.video.width());
    CHECK(m.height == scene.video.height());
    const Image p = decode_ppm(read_file(fs::path(opts.dump_patches_dir) / "patch_00000_i2.ppm"));
    CHECK(p.width == kPatchSize);
    CHECK(p.height == kPatchSize);
}

TEST_CASE("pipeline output lands in the standard files") {
    const SyntheticScene scene = demo_scene();
    Config cfg;
    const PipelineBackends backends = make_backends(cfg, "");
    const PipelineOutput out = run_pipeline(scene.video, seed_annotation(scene, 0), cfg, backends);

    testutil::TempDir dir;
    const std::string out_dir = (dir.path() / "out").string();
    save_pipeline_output(out, out_dir);

    CHECK(fs::exists(fs::path(out_dir) / "detections.jsonl"));
    CHECK(fs::exists(fs::path(out_dir) / "recognitions.jsonl"));
    CHECK(fs::exists(fs::path(out_dir) / "plates.json"));
    CHECK(fs::exists(fs::path(out_dir) / "timing.json"));

    // round-trip: the saved detections load back unchanged
    const auto dets = load_detections(fs::path(out_dir) / "detections.jsonl");
    CHECK(dets == out.detections);

    const auto timing = nlohmann::json::parse(read_file(fs::path(out_dir) / "timing.json"));
    REQUIRE(timing.contains("stages"));
    CHECK(timing["stages"].size() == out.timing.size());
}

TEST_CASE("backend specs pick builtin or external implementations") {
    Config cfg;
    SUBCASE("defaults are all builtin") {
        const PipelineBackends b = make_backends(cfg, "");
        CHECK(dynamic_cast<NccTracker*>(b.tracker.get()) != nullptr);
        CHECK(dynamic_cast<RegionGrowSegmenter*>(b.segmenter.get()) != nullptr);
        CHECK(dynamic_cast<BuiltinOcrRecognizer*>(b.recognizer.get()) != nullptr);
    }
    SUBCASE("external specs build wire clients without contacting them") {
        cfg.set("track.backend", "external:http://127.0.0.1:9");
        cfg.set("segment.backend", "external:http://127.0.0.1:9");
        cfg.set("recog.backend", "external:http://127.0.0.1:9");
        const PipelineBackends b = make_backends(cfg, "/tmp/frames");
        CHECK(dynamic_cast<ExternalTracker*>(b.tracker.get()) != nullptr);
        CHECK(dynamic_cast<ExternalSegmenter*>(b.segmenter.get()) != nullptr);
        CHECK(dynamic_cast<ExternalRecognizer*>(b.recognizer.get()) != nullptr);
    }
}

TEST_CASE("parallel_for runs every index exactly once and rethrows") {
    std::vector<std::atomic<int>> hits(100);
    for (auto& h : hits) h = 0;
    parallel_for(100, 8, [&](int i) { ++hits[i]; });
    for (const auto& h : hits) CHECK(h == 1);

    parallel_for(0, 4, [](int) { FAIL("no work expected"); });

    CHECK_THROWS_WITH_AS(
        parallel_for(50, 8, [](int i) {
            if (i == 17) throw Error("boom");
        }),
        "boom", Error);
}
