#pragma once

// Reference server side of the wire protocol in wire.hpp, backed by the
// built-in tracker, segmenter, and OCR recognizer. The bundled stub tool runs
// it as a process; protocol tests run it in-process on an ephemeral port.

#include <memory>
#include <string>

namespace oneshot {

struct StubBehavior {
    int reply_delay_ms = 0;  // sleep before answering, to exercise deadlines
    int force_status = 0;    // when non-zero, every reply uses this HTTP status
};

class StubBackendServer {
public:
    StubBackendServer();
    ~StubBackendServer();

    StubBackendServer(const StubBackendServer&) = delete;
    StubBackendServer& operator=(const StubBackendServer&) = delete;

    // Binds an ephemeral port on `host` and serves from a background thread.
    // Returns the bound port.
    int start(const std::string& host = "127.0.0.1");
    // Binds a fixed port and serves on the calling thread until stop().
    bool serve(const std::string& host, int port);
    void stop();

    std::string url() const;  // http://host:port, valid after start()

    void set_behavior(const StubBehavior& behavior);

    struct Impl;  // exposed for the handler plumbing in the .cpp

private:
    std::unique_ptr<Impl> impl_;
};

}  // namespace oneshot
