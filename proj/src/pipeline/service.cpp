#include "cxr/pipeline/service.hpp"

#include <httplib.h>

#include <atomic>
#include <cstdio>
#include <iostream>
#include <random>

#include "cxr/error.hpp"

namespace cxr::pipeline {

namespace {

std::span<const std::uint8_t> bytes_of(const std::string& s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string error_json(const std::string& message) {
    return nlohmann::json{{"error", message}}.dump();
}

std::string opaque_id() {
    static std::atomic<std::uint64_t> counter{0};
    static const std::uint64_t salt = std::random_device{}();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(salt ^ (++counter * 0x9E3779B97F4A7C15ULL)));
    return buf;
}

} // namespace

struct ClassifyService::Impl {
    explicit Impl(LoadedModel m) : model(std::move(m)) {}

    const LoadedModel model;
    httplib::Server server;
};

ClassifyService::ClassifyService(LoadedModel model) : impl_(std::make_unique<Impl>(std::move(model))) {
    auto& srv = impl_->server;
    const Impl& impl = *impl_;

    srv.Get("/healthz", [&impl](const httplib::Request&, httplib::Response& res) {
        res.set_content(nlohmann::json{{"status", "ok"}, {"model_hash", impl.model.hash}}.dump(), "application/json");
    });

    srv.Post("/classify", [&impl](const httplib::Request& req, httplib::Response& res) {
        if (!req.is_multipart_form_data() || !req.has_file("image")) {
            res.status = 400;
            res.set_content(error_json("expected multipart form data with an 'image' part"), "application/json");
            return;
        }
        const auto image = req.get_file_value("image");
        std::optional<std::string> mask;
        if (req.has_file("mask")) mask = req.get_file_value("mask").content;

        try {
            std::optional<std::span<const std::uint8_t>> mask_bytes;
            if (mask) mask_bytes = bytes_of(*mask);
            const Classification c = classify_bytes(impl.model, bytes_of(image.content), mask_bytes);
            res.set_content(classification_json(c), "application/json");
        } catch (const SegmentationError& e) {
            res.status = 422;
            res.set_content(error_json(std::string("segmentation failed: ") + e.what()), "application/json");
        } catch (const Error& e) {
            res.status = 400;
            res.set_content(error_json(e.what()), "application/json");
        } catch (const std::exception& e) {
            const std::string id = opaque_id();
            std::cerr << "classify error " << id << ": " << e.what() << "\n";
            res.status = 500;
            res.set_content(nlohmann::json{{"error", "internal error"}, {"id", id}}.dump(), "application/json");
        }
    });

    srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        const std::string id = opaque_id();
        try {
            if (ep) std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            std::cerr << "request error " << id << ": " << e.what() << "\n";
        } catch (...) {
            std::cerr << "request error " << id << ": unknown exception\n";
        }
        res.status = 500;
        res.set_content(nlohmann::json{{"error", "internal error"}, {"id", id}}.dump(), "application/json");
    });
}

ClassifyService::~ClassifyService() = default;

int ClassifyService::bind(const std::string& host, int port) {
    auto& srv = impl_->server;
    if (port == 0) {
        const int bound = srv.bind_to_any_port(host);
        if (bound < 0) throw Error("cannot bind " + host);
        return bound;
    }
    if (!srv.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void ClassifyService::listen() { impl_->server.listen_after_bind(); }

void ClassifyService::stop() { impl_->server.stop(); }

void ClassifyService::wait_until_ready() const { impl_->server.wait_until_ready(); }

} // namespace cxr::pipeline
