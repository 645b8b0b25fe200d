// Serves the built-in tracker, segmenter, and OCR recognizer behind the
// external-backend wire protocol. Handy as a protocol reference and for
// running the pipeline with `--set recog.backend=external:http://...`
// against a process that behaves exactly like the built-ins.

#include <iostream>

#include <CLI11.hpp>

#include "oneshot/stub_backend.hpp"

int main(int argc, char** argv) {
    CLI::App app{"built-in backends behind the external wire protocol"};
    std::string host = "127.0.0.1";
    int port = 8750;
    int delay_ms = 0;
    int force_status = 0;
    app.add_option("--host", host, "bind address");
    app.add_option("--port", port, "bind port");
    app.add_option("--delay-ms", delay_ms, "sleep before each reply (deadline testing)");
    app.add_option("--force-status", force_status, "answer everything with this HTTP status");
    CLI11_PARSE(app, argc, argv);

    oneshot::StubBackendServer server;
    server.set_behavior({delay_ms, force_status});
    std::cout << "serving /recognize /segment /track on http://" << host << ":" << port
              << std::endl;
    if (!server.serve(host, port)) {
        std::cerr << "failed to bind " << host << ":" << port << "\n";
        return 1;
    }
    return 0;
}
