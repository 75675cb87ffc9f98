// SPDX-License-Identifier: Apache-2.0
#include "iterground/cache.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "iterground/errors.hpp"

namespace iterground {

namespace {

void update_u32le(EVP_MD_CTX* ctx, std::uint32_t v) {
    std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                         static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
    EVP_DigestUpdate(ctx, b, sizeof(b));
}

void update_sized(EVP_MD_CTX* ctx, const std::string& s) {
    update_u32le(ctx, static_cast<std::uint32_t>(s.size()));
    EVP_DigestUpdate(ctx, s.data(), s.size());
}

} // namespace

std::string cache_key(const RasterImage& image, const std::string& query,
                      const std::string& model_name) {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw Error("cache_key: EVP_MD_CTX_new failed");
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    update_u32le(ctx, static_cast<std::uint32_t>(image.width));
    update_u32le(ctx, static_cast<std::uint32_t>(image.height));
    EVP_DigestUpdate(ctx, image.pixels.data(), image.pixels.size());
    update_sized(ctx, query);
    update_sized(ctx, model_name);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("ResponseCache: cannot create " + dir_.string());
}

std::optional<CacheEntry> ResponseCache::lookup(const std::string& key) const {
    std::ifstream in(dir_ / (key + ".json"));
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        in >> j;
        CacheEntry e;
        e.key = j.at("key").get<std::string>();
        e.raw_text = j.at("raw_text").get<std::string>();
        auto p = j.at("parsed_point");
        e.parsed_point = NormPoint(p.at(0).get<double>(), p.at(1).get<double>());
        e.model_name = j.at("model_name").get<std::string>();
        e.timestamp = j.value("timestamp", "");
        return e;
    } catch (const std::exception&) {
        return std::nullopt; // treat a corrupt entry as a miss
    }
}

void ResponseCache::store(const CacheEntry& entry) {
    nlohmann::json j{{"key", entry.key},
                     {"raw_text", entry.raw_text},
                     {"parsed_point", {entry.parsed_point.x, entry.parsed_point.y}},
                     {"model_name", entry.model_name},
                     {"timestamp", entry.timestamp}};
    std::lock_guard<std::mutex> lock(write_mutex_);
    auto tmp = dir_ / (entry.key + ".json.tmp");
    auto final_path = dir_ / (entry.key + ".json");
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("ResponseCache: cannot write " + tmp.string());
        out << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, final_path);
}

} // namespace iterground
