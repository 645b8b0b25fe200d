#pragma once

// HTTP transport for external backends, plus the payload encoding helpers
// shared with the bundled stub server.
//
// All three endpoints speak JSON over HTTP POST:
//
//   POST /recognize  {"image_ppm_b64": "...", "prompt": "..."}
//                 -> {"text": "..."}
//   POST /segment    {"image_ppm_b64": "...", "prompts": [[x,y], ...]}
//                 -> {"mask_pgm_b64": "...", "score": 0.8}
//   POST /track      {"frames_ref": "<path>", "seeds": [...], "direction": "forward"}
//                 -> {"trajectories": [...]}
//
// Images travel as base64 of the exact P6/P5 bytes, so an external backend
// sees pixel-identical input to the built-in one. A reply with a non-2xx
// status raises BackendError carrying the status; transport failures with no
// reply at all (unreachable host, elapsed deadline) raise BackendTimeout.
//
// /track seed objects are {"instance": int, "point_index": int, "x": f, "y": f};
// trajectory objects are {"instance": int, "point_index": int,
// "positions": [[x,y], ...], "visible": [0|1, ...]}. Frames are passed by
// directory path ("frames_ref") rather than inline, mirroring how tracking
// services typically mount the sequence.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "oneshot/image.hpp"
#include "oneshot/recognizer.hpp"
#include "oneshot/segmenter.hpp"
#include "oneshot/tracker.hpp"

namespace oneshot {

std::string base64_encode(const std::uint8_t* data, std::size_t size);
std::string base64_encode(const std::string& bytes);
// Throws ParseError on characters outside the alphabet or bad padding.
std::vector<std::uint8_t> base64_decode(const std::string& text);

std::string image_to_b64(const Image& image);
Image image_from_b64(const std::string& text);
std::string mask_to_b64(const Mask& mask);
Mask mask_from_b64(const std::string& text);

struct WireOptions {
    int timeout_ms = 30000;  // per-request deadline
    int max_inflight = 4;    // concurrent requests per endpoint
};

// Shared client guts (URL handling, in-flight limiting, error mapping).
class HttpEndpoint;

class ExternalRecognizer : public RecognizerBackend {
public:
    explicit ExternalRecognizer(const std::string& base_url, const WireOptions& opts = {});
    ~ExternalRecognizer() override;

    std::string recognize(const Image& patch, const std::string& prompt) override;
    int max_concurrency() const override;

private:
    std::unique_ptr<HttpEndpoint> endpoint_;
};

class ExternalSegmenter : public SegmenterBackend {
public:
    explicit ExternalSegmenter(const std::string& base_url, const WireOptions& opts = {});
    ~ExternalSegmenter() override;

    Mask segment(const Image& image, const std::vector<Vec2>& prompts) override;
    int max_concurrency() const override;

private:
    std::unique_ptr<HttpEndpoint> endpoint_;
};

// The tracker ships the frame directory by reference, so it must be
// constructed with the path the service should read.
class ExternalTracker : public TrackerBackend {
public:
    ExternalTracker(const std::string& base_url, const std::string& frames_ref,
                    const WireOptions& opts = {});
    ~ExternalTracker() override;

    std::vector<Trajectory> track(const VideoSequence& video, const PointSet& points,
                                  TrackDirection direction) override;
    bool supports_backward() const override { return true; }

private:
    std::unique_ptr<HttpEndpoint> endpoint_;
    std::string frames_ref_;
};

}  // namespace oneshot
