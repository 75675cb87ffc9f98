// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "iterground/backend.hpp"
#include "iterground/cache.hpp"

namespace iterground {

inline const char* kDefaultPromptTemplate =
    "Query: {query}. Output the coordinate of the described element as (x, y) "
    "normalized to [0,1] relative to THIS image. Output only the coordinate.";

struct RemoteBackendConfig {
    std::string endpoint_url;     // e.g. http://host:8000/v1
    std::string model_name;
    std::string api_key;          // falls back to $ITERGROUND_API_KEY
    std::string prompt_template = kDefaultPromptTemplate; // must contain {query} exactly once
    CoordinateScale coordinate_scale = CoordinateScale::Unit;
    int max_retries = 2;
    int request_timeout_ms = 30000;
    double temperature = 0.0;
    int max_inflight_requests = 4;

    void validate() const;
};

std::string render_prompt(const std::string& prompt_template, const std::string& query);

// OpenAI-compatible chat-completions client with a base64 PNG attachment per
// request, bounded in-flight concurrency, retries, and an optional
// content-addressed response cache.
class RemoteBackend final : public GroundingBackend {
public:
    explicit RemoteBackend(RemoteBackendConfig cfg,
                           std::optional<std::filesystem::path> cache_dir = std::nullopt);
    ~RemoteBackend() override;

    BackendReply predict(const RasterImage& crop, const std::string& query,
                         const IterationContext& ctx) override;
    std::string name() const override { return "remote(" + cfg_.model_name + ")"; }

    long http_requests() const { return http_requests_.load(); }
    long cache_hits() const { return cache_hits_.load(); }

private:
    BackendReply attempt_once(const std::string& body, double* latency_ms);

    RemoteBackendConfig cfg_;
    std::string host_base_;   // scheme://host[:port]
    std::string path_prefix_; // path part of endpoint_url, no trailing slash
    std::unique_ptr<ResponseCache> cache_;
    std::atomic<long> http_requests_{0};
    std::atomic<long> cache_hits_{0};

    // in-flight request gate
    std::mutex gate_mutex_;
    std::condition_variable gate_cv_;
    int gate_available_;
};

} // namespace iterground
