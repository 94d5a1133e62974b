#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

namespace bloomseg {

struct ServiceConfig {
    std::size_t max_upload_bytes = std::size_t{64} << 20;
    std::chrono::seconds session_ttl{3600};
    /// Monte Carlo seed given to every new session.
    std::uint64_t seed = 0;
    /// Threads per refinement.
    int workers = 1;
};

/// HTTP front end for scribble annotation and interactive tau0 tuning.
///
///   POST   /sessions                 image body -> 201 {id, width, height}
///   POST   /sessions/{id}/strokes    {strokes: [{label: fg|bg|erase, radius, points: [[x, y], ...]}]}
///   POST   /sessions/{id}/scoremap   bsgs body with raw full-image scores, or JSON {scorer: "hsv", ...}
///   POST   /sessions/{id}/refine     optional {mode: scribbles|scoremap, tau0, tau_b, mc_runs, theta, seed_fraction, seed}
///   PATCH  /sessions/{id}/params     {tau0}
///   GET    /sessions/{id}/export     mask PNG
///   DELETE /sessions/{id}
///   GET    /healthz
class AnnotationServer {
public:
    explicit AnnotationServer(ServiceConfig config = {});
    ~AnnotationServer();
    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    /// Binds without serving; port 0 picks a free port. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    /// Blocks until stop() is called.
    bool listen();
    void stop();
    bool is_running() const;
    void wait_until_ready() const;

    std::size_t session_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace bloomseg
