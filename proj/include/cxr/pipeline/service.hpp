#pragma once

#include <memory>
#include <string>

#include "cxr/pipeline/model.hpp"

namespace cxr::pipeline {

/// Inference-only HTTP front end over an immutable model.
///   POST /classify  multipart `image` (+ optional `mask`) -> classification_json
///   GET  /healthz   {"status":"ok","model_hash":...}
/// Errors: 400 malformed upload, 422 no usable lung region, 500 with an
/// opaque id (details go to stderr).
class ClassifyService {
public:
    explicit ClassifyService(LoadedModel model);
    ~ClassifyService();
    ClassifyService(const ClassifyService&) = delete;
    ClassifyService& operator=(const ClassifyService&) = delete;

    /// Binds `host:port`; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop() is called. Call after bind().
    void listen();
    void stop();
    /// Blocks until the server accepts connections.
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace cxr::pipeline
