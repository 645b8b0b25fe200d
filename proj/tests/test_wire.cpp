#include "oneshot/wire.hpp"

#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include <doctest.h>
#include <httplib.h>

#include "oneshot/errors.hpp"
#include "oneshot/rng.hpp"
#include "oneshot/stub_backend.hpp"
#include "oneshot/synthgen.hpp"
#include "oneshot/videoio.hpp"
#include "test_helpers.hpp"

using namespace oneshot;

TEST_CASE("base64 encodes the rfc test vectors") {
    const auto enc = [](const std::string& s) { return base64_encode(s); };
    CHECK(enc("") == "");
    CHECK(enc("f") == "Zg==");
    CHECK(enc("fo") == "Zm8=");
    CHECK(enc("foo") == "Zm9v");
    CHECK(enc("foob") == "Zm9vYg==");
    CHECK(enc("fooba") == "Zm9vYmE=");
    CHECK(enc("foobar") == "Zm9vYmFy");
}

TEST_CASE("base64 decodes its own output for random payloads") {
    Rng rng(8080);
    for (int round = 0; round < 50; ++round) {
        std::vector<std::uint8_t> payload(rng.bounded(200));
        for (auto& b : payload) b = static_cast<std::uint8_t>(rng.bounded(256));
        const std::string text = base64_encode(payload.data(), payload.size());
        CHECK(base64_decode(text) == payload);
    }
}

TEST_CASE("base64 rejects malformed input") {
    CHECK_THROWS_AS(base64_decode("Zg="), ParseError);      // bad length
    CHECK_THROWS_AS(base64_decode("Z===" ), ParseError);    // stray padding
    CHECK_THROWS_AS(base64_decode("Zm9v!A=="), ParseError); // bad character
    CHECK_THROWS_AS(base64_decode("=Zm9v"), ParseError);    // padding up front
    CHECK(base64_decode("").empty());
}

TEST_CASE("images and masks survive the b64 leg byte for byte") {
    const SyntheticScene scene = generate_scene(testutil::small_scene(77, 1, 3.0));
    const Image& img = scene.video.frames[0].image;
    CHECK(image_from_b64(image_to_b64(img)) == img);

    Mask m = Mask::blank(33, 21);
    m.set(5, 5, true);
    m.set(32, 20, true);
    m.score = 0.5;  // score does not travel inside the pgm payload
    const Mask back = mask_from_b64(mask_to_b64(m));
    CHECK(back.fg == m.fg);
    CHECK(back.width == 33);
    CHECK(back.height == 21);
}

TEST_CASE("external backends round-trip through the bundled stub") {
    StubBackendServer server;
    REQUIRE(server.start() > 0);
    const std::string url = server.url();

    const SyntheticScene scene = generate_scene(testutil::small_scene(88, 4));
    const Image& frame0 = scene.video.frames[0].image;

    SUBCASE("recognizer parity with the builtin") {
        BuiltinOcrRecognizer builtin;
        ExternalRecognizer external(url);
        const Image plate = render_plate("KLM0007", 120, 40);
        const std::string prompt = get_prompt("P6").text;
        CHECK(external.recognize(plate, prompt) == builtin.recognize(plate, prompt));
        CHECK(external.recognize(plate, prompt) == "The license plate reads KLM0007.");
    }

    SUBCASE("segmenter parity with the builtin") {
        RegionGrowSegmenter builtin;
        ExternalSegmenter external(url);
        const BBox& box = scene.truth[0].bbox;
        const std::vector<Vec2> prompts{{box.x0 + 1.0, box.y0 + 1.0}};
        const Mask local = builtin.segment(frame0, prompts);
        const Mask remote = external.segment(frame0, prompts);
        CHECK(remote.fg == local.fg);
        CHECK(remote.score == local.score);
    }

    SUBCASE("tracker parity with the builtin") {
        testutil::TempDir dir;
        save_sequence(dir.path() / "frames", scene.video);

        NccTracker builtin;
        ExternalTracker external(url, (dir.path() / "frames").string());
        PointSet seeds;
        seeds.instance_id = 2;
        seeds.points = {scene.true_center[0]};

        const auto local = builtin.track(scene.video, seeds, TrackDirection::Forward);
        const auto remote = external.track(scene.video, seeds, TrackDirection::Forward);
        REQUIRE(remote.size() == local.size());
        for (std::size_t i = 0; i < local.size(); ++i) {
            CHECK(remote[i].instance_id == local[i].instance_id);
            CHECK(remote[i].point_index == local[i].point_index);
            CHECK(remote[i].positions == local[i].positions);
            CHECK(remote[i].visible == local[i].visible);
        }

        // backward direction also crosses the wire
        PointSet back_seeds;
        back_seeds.points = {scene.true_center.back()};
        const auto local_b = builtin.track(scene.video, back_seeds, TrackDirection::Backward);
        const auto remote_b = external.track(scene.video, back_seeds, TrackDirection::Backward);
        CHECK(remote_b[0].positions == local_b[0].positions);
    }

    server.stop();
}

TEST_CASE("slow backends hit the request deadline") {
    StubBackendServer server;
    StubBehavior slow;
    slow.reply_delay_ms = 400;
    server.set_behavior(slow);
    REQUIRE(server.start() > 0);
    const std::string url = server.url();

    WireOptions opts;
    opts.timeout_ms = 60;
    ExternalRecognizer rec(url, opts);
    const Image plate = render_plate("ABC1234", 120, 40);
    const auto before = std::chrono::steady_clock::now();
    CHECK_THROWS_AS(rec.recognize(plate, "p"), BackendTimeout);
    const auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - before);
    CHECK(elapsed.count() < 5000);  // gave up near the deadline, not after the full delay
    server.stop();
}

TEST_CASE("http error statuses carry through") {
    StubBackendServer server;
    StubBehavior broken;
    broken.force_status = 500;
    server.set_behavior(broken);
    REQUIRE(server.start() > 0);
    const std::string url = server.url();

    ExternalRecognizer rec(url);
    const Image plate = render_plate("ABC1234", 120, 40);
    try {
        rec.recognize(plate, "p");
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(e.status == 500);
    }

    ExternalSegmenter seg(url);
    try {
        seg.segment(plate, {{1, 1}});
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(e.status == 500);
    }
    server.stop();
}

TEST_CASE("unreachable endpoints time out") {
    WireOptions opts;
    opts.timeout_ms = 300;
    // nothing listens on this port
    ExternalRecognizer rec("http://127.0.0.1:1", opts);
    const Image plate = render_plate("ABC1234", 120, 40);
    CHECK_THROWS_AS(rec.recognize(plate, "p"), BackendTimeout);
}

TEST_CASE("segment errors on the stub map to client-side failures") {
    StubBackendServer server;
    REQUIRE(server.start() > 0);
    const std::string url = server.url();
    ExternalSegmenter seg(url);
    // uniform frame: the stub's segmenter rejects it (area cap), replying
    // with a non-2xx status the client surfaces as BackendError
    const Image flat = Image::filled(64, 64, 90, 110, 130);
    CHECK_THROWS_AS(seg.segment(flat, {{32, 32}}), BackendError);
    server.stop();
}

TEST_CASE("a 2xx reply with a garbage body is a backend error") {
    // A service that answers but does not speak the protocol should not look
    // like a timeout, and must not crash the client.
    httplib::Server raw;
    raw.Post("/recognize", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("certainly not json", "text/plain");
    });
    raw.Post("/segment", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"score\": 0.5}", "application/json");  // missing mask field
    });
    const int port = raw.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread worker([&raw] { raw.listen_after_bind(); });
    raw.wait_until_ready();

    const std::string url = "http://127.0.0.1:" + std::to_string(port);
    const Image plate = render_plate("ABC1234", 120, 40);
    ExternalRecognizer rec(url);
    CHECK_THROWS_AS(rec.recognize(plate, "p"), BackendError);
    ExternalSegmenter seg(url);
    CHECK_THROWS_AS(seg.segment(plate, {{2, 2}}), BackendError);

    raw.stop();
    worker.join();
}
