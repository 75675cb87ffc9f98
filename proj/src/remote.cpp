// SPDX-License-Identifier: Apache-2.0
#include "iterground/remote.hpp"

#include <chrono>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "iterground/errors.hpp"

namespace iterground {

void RemoteBackendConfig::validate() const {
    if (endpoint_url.empty())
        throw std::invalid_argument("remote backend: endpoint_url is required");
    auto first = prompt_template.find("{query}");
    if (first == std::string::npos ||
        prompt_template.find("{query}", first + 1) != std::string::npos)
        throw std::invalid_argument(
            "remote backend: prompt_template must contain {query} exactly once");
    if (max_retries < 0) throw std::invalid_argument("remote backend: max_retries must be >= 0");
    if (request_timeout_ms < 1)
        throw std::invalid_argument("remote backend: request_timeout_ms must be positive");
    if (temperature < 0.0)
        throw std::invalid_argument("remote backend: temperature must be non-negative");
    if (max_inflight_requests < 1)
        throw std::invalid_argument("remote backend: max_inflight_requests must be >= 1");
}

std::string render_prompt(const std::string& prompt_template, const std::string& query) {
    auto pos = prompt_template.find("{query}");
    if (pos == std::string::npos)
        throw std::invalid_argument("prompt template is missing the {query} placeholder");
    std::string out = prompt_template;
    out.replace(pos, 7, query);
    return out;
}

namespace {

// splits scheme://authority/path into (scheme://authority, /path)
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw std::invalid_argument("endpoint_url must start with http:// or https://");
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string base = url.substr(0, path_start);
    std::string path = url.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {base, path};
}

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct GateGuard {
    std::mutex& m;
    std::condition_variable& cv;
    int& avail;

    GateGuard(std::mutex& m, std::condition_variable& cv, int& avail)
        : m(m), cv(cv), avail(avail) {
        std::unique_lock<std::mutex> lock(m);
        cv.wait(lock, [&] { return avail > 0; });
        --avail;
    }
    ~GateGuard() {
        {
            std::lock_guard<std::mutex> lock(m);
            ++avail;
        }
        cv.notify_one();
    }
};

} // namespace

RemoteBackend::RemoteBackend(RemoteBackendConfig cfg,
                             std::optional<std::filesystem::path> cache_dir)
    : cfg_(std::move(cfg)), gate_available_(1) {
    if (cfg_.api_key.empty()) {
        if (const char* env = std::getenv("ITERGROUND_API_KEY")) cfg_.api_key = env;
    }
    cfg_.validate();
    gate_available_ = cfg_.max_inflight_requests;
    std::tie(host_base_, path_prefix_) = split_url(cfg_.endpoint_url);
    if (!cache_dir) {
        if (const char* env = std::getenv("ITERGROUND_CACHE_DIR")) cache_dir = env;
    }
    if (cache_dir) cache_ = std::make_unique<ResponseCache>(*cache_dir);
}

RemoteBackend::~RemoteBackend() = default;

BackendReply RemoteBackend::attempt_once(const std::string& body, double* latency_ms) {
    httplib::Client client(host_base_);
    client.set_connection_timeout(0, cfg_.request_timeout_ms * 1000LL);
    client.set_read_timeout(0, cfg_.request_timeout_ms * 1000LL);
    client.set_write_timeout(0, cfg_.request_timeout_ms * 1000LL);

    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

    auto t0 = std::chrono::steady_clock::now();
    auto res = client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
    ++http_requests_;
    *latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();

    if (!res) {
        auto err = res.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
            err == httplib::Error::Write)
            throw Timeout("remote backend: request timed out (" + httplib::to_string(err) + ")");
        throw BackendUnavailable("remote backend: transport error (" + httplib::to_string(err) +
                                 ")");
    }
    if (res->status != 200)
        throw BackendUnavailable("remote backend: HTTP " + std::to_string(res->status));

    std::string content;
    try {
        auto j = nlohmann::json::parse(res->body);
        content = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
        throw UnparseableReply(std::string("remote backend: malformed response body: ") +
                               e.what());
    }
    // parse_point is applied by the caller so sent dims are in scope there
    BackendReply reply;
    reply.raw_text = content;
    reply.latency_ms = *latency_ms;
    return reply;
}

BackendReply RemoteBackend::predict(const RasterImage& crop, const std::string& query,
                                    const IterationContext&) {
    std::string key;
    if (cache_) {
        key = cache_key(crop, query, cfg_.model_name);
        if (auto hit = cache_->lookup(key)) {
            ++cache_hits_;
            return BackendReply{hit->raw_text, hit->parsed_point, 0.0};
        }
    }

    auto png = encode_png(crop);
    nlohmann::json body{
        {"model", cfg_.model_name},
        {"temperature", cfg_.temperature},
        {"messages",
         {{{"role", "user"},
           {"content",
            {{{"type", "image_url"},
              {"image_url",
               {{"url", "data:image/png;base64," + base64_encode(png.data(), png.size())}}}},
             {{"type", "text"}, {"text", render_prompt(cfg_.prompt_template, query)}}}}}}}};
    const std::string body_str = body.dump();

    std::exception_ptr last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        try {
            GateGuard gate(gate_mutex_, gate_cv_, gate_available_);
            double latency = 0.0;
            BackendReply reply = attempt_once(body_str, &latency);
            reply.point = parse_point(reply.raw_text, cfg_.coordinate_scale, crop.dims());
            if (cache_)
                cache_->store(CacheEntry{key, reply.raw_text, reply.point, cfg_.model_name,
                                         utc_timestamp()});
            return reply;
        } catch (const Timeout&) {
            last_error = std::current_exception();
        } catch (const BackendUnavailable&) {
            last_error = std::current_exception();
        } catch (const UnparseableReply&) {
            last_error = std::current_exception();
        }
    }
    std::rethrow_exception(last_error);
}

} // namespace iterground
