#include "oneshot/config.hpp"

#include <doctest.h>

#include "oneshot/errors.hpp"
#include "oneshot/videoio.hpp"
#include "test_helpers.hpp"

using namespace oneshot;

TEST_CASE("defaults cover the whole key surface") {
    const Config cfg;
    const auto& defs = Config::defaults();
    CHECK(defs.size() == 24);

    CHECK(cfg.get("select.strategy") == "crosshairs");
    CHECK(cfg.get_double("select.offset_px") == 8.0);
    CHECK(cfg.get_int("select.per_arm") == 1);
    CHECK(cfg.get_int("select.k") == 5);
    CHECK(cfg.get_int("select.seed") == 1);

    CHECK(cfg.get("track.backend") == "builtin");
    CHECK(cfg.get_int("track.patch_radius") == 7);
    CHECK(cfg.get_int("track.search_radius") == 20);
    CHECK(cfg.get_double("track.min_score") == 0.5);
    CHECK(cfg.get_int("track.lost_after") == 3);
    CHECK(cfg.get_double("track.drop_threshold_px") == 8.0);
    CHECK(cfg.get_bool("track.backward_refine"));

    CHECK(cfg.get("segment.backend") == "builtin");
    CHECK(cfg.get_double("segment.tau") == 30.0);
    CHECK(cfg.get_double("segment.area_cap") == 0.25);

    CHECK(cfg.get_bool("recog.enabled"));
    CHECK(cfg.get("recog.backend") == "builtin");
    CHECK(cfg.get("recog.strategy") == "center_crop");
    CHECK(cfg.get("recog.prompt") == "P6");
    CHECK(cfg.get("recog.pattern") == "[A-Z]{3}-?[0-9]{4}");
    CHECK(cfg.get_int("recog.max_inflight") == 4);
    CHECK(cfg.get_int("recog.timeout_ms") == 30000);

    CHECK(cfg.get_double("eval.iou") == 0.5);
    CHECK(cfg.get_int("pipeline.workers") == 0);
}

TEST_CASE("text parsing trims, skips comments, and keeps values verbatim") {
    const Config cfg = Config::from_text(
        "# a comment line\n"
        "\n"
        "  select.strategy =  random  \n"
        "recog.pattern = [A-Z]{2} ?[0-9]{3}\n"
        "   # indented comment\n"
        "track.search_radius=25\n");
    CHECK(cfg.get("select.strategy") == "random");
    // value runs to end of line: regex with spaces and no quoting survives
    CHECK(cfg.get("recog.pattern") == "[A-Z]{2} ?[0-9]{3}");
    CHECK(cfg.get_int("track.search_radius") == 25);
    // untouched keys keep defaults
    CHECK(cfg.get_int("select.per_arm") == 1);
}

TEST_CASE("unknown keys are named in the error") {
    try {
        Config::from_text("select.strategy = single\nselect.stratgy = single\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("select.stratgy") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
    }
}

TEST_CASE("malformed lines report their line number") {
    try {
        Config::from_text("select.k = 5\n\njust some words\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("file loading wraps errors with the path") {
    testutil::TempDir dir;
    SUBCASE("missing file") {
        CHECK_THROWS_AS(Config::load_file(dir.file("nope.cfg")), IoError);
    }
    SUBCASE("good file") {
        write_file(dir.file("run.cfg"), "select.k = 9\n");
        const Config cfg = Config::load_file(dir.file("run.cfg"));
        CHECK(cfg.get_int("select.k") == 9);
    }
    SUBCASE("bad file names the path") {
        write_file(dir.file("bad.cfg"), "wat = 1\n");
        try {
            Config::load_file(dir.file("bad.cfg"));
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("bad.cfg") != std::string::npos);
        }
    }
}

TEST_CASE("set_pair applies cli-style overrides") {
    Config cfg;
    cfg.set_pair("select.strategy=kmedoids");
    CHECK(cfg.get("select.strategy") == "kmedoids");
    cfg.set_pair("recog.pattern=[0-9]+=?");  // value may itself contain '='
    CHECK(cfg.get("recog.pattern") == "[0-9]+=?");
    CHECK_THROWS_AS(cfg.set_pair("no-equals-sign"), ConfigError);
    CHECK_THROWS_AS(cfg.set_pair("unknown.key=1"), ConfigError);
    CHECK_THROWS_AS(cfg.set("", "x"), ConfigError);
}

TEST_CASE("typed getters reject junk") {
    Config cfg;
    cfg.set("select.k", "12x");
    CHECK_THROWS_AS(cfg.get_int("select.k"), ConfigError);
    cfg.set("segment.tau", "fast");
    CHECK_THROWS_AS(cfg.get_double("segment.tau"), ConfigError);
    cfg.set("recog.enabled", "maybe");
    CHECK_THROWS_AS(cfg.get_bool("recog.enabled"), ConfigError);
    CHECK_THROWS_AS(cfg.get("definitely.not.a.key"), ConfigError);
}

TEST_CASE("booleans accept the usual spellings") {
    Config cfg;
    for (const char* yes : {"true", "1", "yes", "on", "TRUE", "Yes", "ON"}) {
        cfg.set("recog.enabled", yes);
        CHECK(cfg.get_bool("recog.enabled"));
    }
    for (const char* no : {"false", "0", "no", "off", "False", "OFF"}) {
        cfg.set("recog.enabled", no);
        CHECK_FALSE(cfg.get_bool("recog.enabled"));
    }
}

TEST_CASE("backend specs are builtin or external with a url") {
    const BackendSpec b = parse_backend_spec("builtin");
    CHECK(b.builtin);
    CHECK(b.endpoint.empty());

    const BackendSpec e = parse_backend_spec("external:http://127.0.0.1:8750");
    CHECK_FALSE(e.builtin);
    CHECK(e.endpoint == "http://127.0.0.1:8750");

    CHECK_THROWS_AS(parse_backend_spec("external:"), ConfigError);
    CHECK_THROWS_AS(parse_backend_spec("remote"), ConfigError);
    CHECK_THROWS_AS(parse_backend_spec(""), ConfigError);
}
