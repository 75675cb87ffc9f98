// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include "iterground/backend.hpp"
#include "iterground/image.hpp"

namespace iterground {

// Stable content hash over (pixel bytes, query, model name); hex SHA-256.
// Keyed on crop content, not viewport position: identical crops at different
// positions are identical model inputs.
std::string cache_key(const RasterImage& image, const std::string& query,
                      const std::string& model_name);

struct CacheEntry {
    std::string key;
    std::string raw_text;
    NormPoint parsed_point;
    std::string model_name;
    std::string timestamp; // ISO-8601 UTC, informational only
};

// Content-addressed response store: one JSON file per entry under `dir`.
// Reads are lock-free; writes are serialized and land via atomic rename.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<CacheEntry> lookup(const std::string& key) const;
    void store(const CacheEntry& entry);

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::mutex write_mutex_;
};

} // namespace iterground
