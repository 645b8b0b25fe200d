#include "oneshot/stub_backend.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "oneshot/errors.hpp"
#include "oneshot/point_select.hpp"
#include "oneshot/recognizer.hpp"
#include "oneshot/segmenter.hpp"
#include "oneshot/tracker.hpp"
#include "oneshot/videoio.hpp"
#include "oneshot/wire.hpp"

namespace oneshot {

using nlohmann::json;

struct StubBackendServer::Impl {
    httplib::Server server;
    std::thread worker;
    std::string host;
    int port = 0;

    std::mutex behavior_mu;
    StubBehavior behavior;

    StubBehavior current_behavior() {
        std::lock_guard lock(behavior_mu);
        return behavior;
    }
};

namespace {

void reply_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

// Wraps a handler with the shared knobs (delay, forced status) and maps
// handler exceptions onto HTTP statuses: bad requests parse-fail to 400,
// domain failures (EmptyMask, NoGlyphs, ...) to 422.
template <typename Fn>
httplib::Server::Handler guarded(StubBackendServer::Impl* impl, Fn fn) {
    return [impl, fn](const httplib::Request& req, httplib::Response& res) {
        const StubBehavior behavior = impl->current_behavior();
        if (behavior.reply_delay_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(behavior.reply_delay_ms));
        if (behavior.force_status != 0) {
            reply_json(res, behavior.force_status, {{"error", "forced status"}});
            return;
        }
        try {
            reply_json(res, 200, fn(json::parse(req.body)));
        } catch (const json::exception& e) {
            reply_json(res, 400, {{"error", std::string("bad request JSON: ") + e.what()}});
        } catch (const ParseError& e) {
            reply_json(res, 400, {{"error", e.what()}});
        } catch (const Error& e) {
            reply_json(res, 422, {{"error", e.what()}});
        }
    };
}

json handle_recognize(const json& body) {
    const Image patch = image_from_b64(body.at("image_ppm_b64").get<std::string>());
    BuiltinOcrRecognizer ocr;
    return {{"text", ocr.recognize(patch, body.at("prompt").get<std::string>())}};
}

json handle_segment(const json& body) {
    const Image image = image_from_b64(body.at("image_ppm_b64").get<std::string>());
    std::vector<Vec2> prompts;
    for (const json& p : body.at("prompts")) prompts.push_back({p.at(0), p.at(1)});
    RegionGrowSegmenter segmenter;
    const Mask mask = segmenter.segment(image, prompts);
    return {{"mask_pgm_b64", mask_to_b64(mask)}, {"score", mask.score}};
}

json handle_track(const json& body) {
    const VideoSequence video = load_sequence(body.at("frames_ref").get<std::string>());
    const std::string dir_name = body.at("direction").get<std::string>();
    if (dir_name != "forward" && dir_name != "backward")
        throw ParseError("direction must be forward or backward");
    const TrackDirection direction =
        dir_name == "forward" ? TrackDirection::Forward : TrackDirection::Backward;

    PointSet seeds;
    seeds.strategy = SelectStrategy::Single;
    for (const json& s : body.at("seeds")) {
        seeds.instance_id = s.at("instance").get<int>();
        seeds.points.push_back({s.at("x").get<double>(), s.at("y").get<double>()});
    }

    NccTracker tracker;
    const std::vector<Trajectory> trajectories = tracker.track(video, seeds, direction);

    json out = json::array();
    for (const Trajectory& t : trajectories) {
        json positions = json::array();
        for (const Vec2& p : t.positions) positions.push_back({p.x, p.y});
        json visible = json::array();
        for (char v : t.visible) visible.push_back(v ? 1 : 0);
        out.push_back({{"instance", t.instance_id},
                       {"point_index", t.point_index},
                       {"positions", positions},
                       {"visible", visible}});
    }
    return {{"trajectories", out}};
}

}  // namespace

StubBackendServer::StubBackendServer() : impl_(std::make_unique<Impl>()) {
    Impl* impl = impl_.get();
    impl->server.Post("/recognize", guarded(impl, handle_recognize));
    impl->server.Post("/segment", guarded(impl, handle_segment));
    impl->server.Post("/track", guarded(impl, handle_track));
}

StubBackendServer::~StubBackendServer() { stop(); }

int StubBackendServer::start(const std::string& host) {
    impl_->host = host;
    impl_->port = impl_->server.bind_to_any_port(host);
    if (impl_->port <= 0) throw IoError("stub server failed to bind on " + host);
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

bool StubBackendServer::serve(const std::string& host, int port) {
    impl_->host = host;
    impl_->port = port;
    return impl_->server.listen(host, port);
}

void StubBackendServer::stop() {
    impl_->server.stop();
    if (impl_->worker.joinable()) impl_->worker.join();
}

std::string StubBackendServer::url() const {
    return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

void StubBackendServer::set_behavior(const StubBehavior& behavior) {
    std::lock_guard lock(impl_->behavior_mu);
    impl_->behavior = behavior;
}

}  // namespace oneshot
