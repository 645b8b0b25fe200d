#include "oneshot/wire.hpp"

#include <condition_variable>
#include <mutex>

#include <httplib.h>
#include <json.hpp>

#include "oneshot/errors.hpp"

namespace oneshot {

using nlohmann::json;

// ---- base64 ----

namespace {
constexpr char kB64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}
}  // namespace

std::string base64_encode(const std::uint8_t* data, std::size_t size) {
    std::string out;
    out.reserve((size + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= size; i += 3) {
        const unsigned v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back(kB64Alphabet[v & 63]);
    }
    const std::size_t rest = size - i;
    if (rest == 1) {
        const unsigned v = data[i] << 16;
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.append("==");
    } else if (rest == 2) {
        const unsigned v = (data[i] << 16) | (data[i + 1] << 8);
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::string base64_encode(const std::string& bytes) {
    return base64_encode(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size());
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0) throw ParseError("base64 length not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=') {
                // Padding may only appear in the last two slots of the final
                // quad, and nothing may follow it.
                if (i + 4 != text.size() || k < 2) throw ParseError("stray base64 padding");
                vals[k] = 0;
                ++pad;
            } else {
                if (pad > 0) throw ParseError("stray base64 padding");
                vals[k] = b64_value(c);
                if (vals[k] < 0) throw ParseError(std::string("bad base64 character '") + c + "'");
            }
        }
        const unsigned v = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
        out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    }
    return out;
}

std::string image_to_b64(const Image& image) { return base64_encode(encode_ppm(image)); }

Image image_from_b64(const std::string& text) {
    const std::vector<std::uint8_t> bytes = base64_decode(text);
    return decode_ppm(std::string(bytes.begin(), bytes.end()));
}

std::string mask_to_b64(const Mask& mask) { return base64_encode(encode_pgm(mask)); }

Mask mask_from_b64(const std::string& text) {
    const std::vector<std::uint8_t> bytes = base64_decode(text);
    return decode_pgm(std::string(bytes.begin(), bytes.end()));
}

// ---- HTTP client plumbing ----

namespace {

// Bounded counter so at most `limit` requests are on the wire per endpoint.
class InflightGate {
public:
    explicit InflightGate(int limit) : limit_(limit < 1 ? 1 : limit) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return active_ < limit_; });
        ++active_;
    }
    void release() {
        {
            std::lock_guard lock(mu_);
            --active_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int limit_;
    int active_ = 0;
};

struct GateHold {
    InflightGate& gate;
    explicit GateHold(InflightGate& g) : gate(g) { gate.acquire(); }
    ~GateHold() { gate.release(); }
};

}  // namespace

class HttpEndpoint {
public:
    HttpEndpoint(std::string base_url, const WireOptions& opts)
        : base_url_(std::move(base_url)), opts_(opts), gate_(opts.max_inflight) {}

    // POSTs JSON, returns the parsed JSON reply. Transport failures (no HTTP
    // reply within the deadline, unreachable host) surface as BackendTimeout;
    // a reply with a non-2xx status surfaces as BackendError.
    json post(const std::string& path, const json& body) {
        GateHold hold(gate_);
        httplib::Client client(base_url_);
        const auto secs = std::chrono::milliseconds(opts_.timeout_ms);
        client.set_connection_timeout(secs);
        client.set_read_timeout(secs);
        client.set_write_timeout(secs);
        httplib::Result res = client.Post(path, body.dump(), "application/json");
        if (!res) {
            throw BackendTimeout("no reply from " + base_url_ + path + " (" +
                                 httplib::to_string(res.error()) + ")");
        }
        if (res->status < 200 || res->status >= 300) {
            throw BackendError("backend replied " + std::to_string(res->status) + " for " + path +
                                   ": " + res->body,
                               res->status);
        }
        json reply;
        try {
            reply = json::parse(res->body);
        } catch (const json::exception& e) {
            throw BackendError("backend reply for " + path + " is not JSON: " + e.what(),
                               res->status);
        }
        return reply;
    }

    int max_inflight() const { return opts_.max_inflight; }

private:
    std::string base_url_;
    WireOptions opts_;
    InflightGate gate_;
};

namespace {

const json& require_field(const json& reply, const char* key, const char* path) {
    const auto it = reply.find(key);
    if (it == reply.end())
        throw BackendError(std::string("backend reply for ") + path + " lacks \"" + key + "\"");
    return *it;
}

}  // namespace

// ---- recognizer client ----

ExternalRecognizer::ExternalRecognizer(const std::string& base_url, const WireOptions& opts)
    : endpoint_(std::make_unique<HttpEndpoint>(base_url, opts)) {}

ExternalRecognizer::~ExternalRecognizer() = default;

std::string ExternalRecognizer::recognize(const Image& patch, const std::string& prompt) {
    const json body = {{"image_ppm_b64", image_to_b64(patch)}, {"prompt", prompt}};
    const json reply = endpoint_->post("/recognize", body);
    const json& text = require_field(reply, "text", "/recognize");
    if (!text.is_string()) throw BackendError("/recognize \"text\" is not a string");
    return text.get<std::string>();
}

int ExternalRecognizer::max_concurrency() const { return endpoint_->max_inflight(); }

// ---- segmenter client ----

ExternalSegmenter::ExternalSegmenter(const std::string& base_url, const WireOptions& opts)
    : endpoint_(std::make_unique<HttpEndpoint>(base_url, opts)) {}

ExternalSegmenter::~ExternalSegmenter() = default;

Mask ExternalSegmenter::segment(const Image& image, const std::vector<Vec2>& prompts) {
    json points = json::array();
    for (const Vec2& p : prompts) points.push_back({p.x, p.y});
    const json body = {{"image_ppm_b64", image_to_b64(image)}, {"prompts", points}};
    const json reply = endpoint_->post("/segment", body);
    Mask mask = mask_from_b64(
        require_field(reply, "mask_pgm_b64", "/segment").get<std::string>());
    mask.score = require_field(reply, "score", "/segment").get<double>();
    return mask;
}

int ExternalSegmenter::max_concurrency() const { return endpoint_->max_inflight(); }

// ---- tracker client ----

ExternalTracker::ExternalTracker(const std::string& base_url, const std::string& frames_ref,
                                 const WireOptions& opts)
    : endpoint_(std::make_unique<HttpEndpoint>(base_url, opts)), frames_ref_(frames_ref) {}

ExternalTracker::~ExternalTracker() = default;

std::vector<Trajectory> ExternalTracker::track(const VideoSequence& video, const PointSet& seeds,
                                               TrackDirection direction) {
    json seed_list = json::array();
    for (const Vec2& p : seeds.points)
        seed_list.push_back({{"instance", seeds.instance_id},
                             {"point_index", static_cast<int>(seed_list.size())},
                             {"x", p.x},
                             {"y", p.y}});
    const json body = {{"frames_ref", frames_ref_},
                       {"seeds", seed_list},
                       {"direction", direction == TrackDirection::Forward ? "forward" : "backward"}};
    const json reply = endpoint_->post("/track", body);
    const json& trajs = require_field(reply, "trajectories", "/track");

    std::vector<Trajectory> out;
    for (const json& jt : trajs) {
        Trajectory t;
        t.instance_id = require_field(jt, "instance", "/track").get<int>();
        t.point_index = require_field(jt, "point_index", "/track").get<int>();
        for (const json& pos : require_field(jt, "positions", "/track"))
            t.positions.push_back({pos.at(0).get<double>(), pos.at(1).get<double>()});
        for (const json& v : require_field(jt, "visible", "/track"))
            t.visible.push_back(v.get<int>() != 0 ? 1 : 0);
        if (t.positions.size() != video.size() || t.visible.size() != video.size())
            throw BackendError("/track trajectory length does not match the sequence");
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace oneshot
