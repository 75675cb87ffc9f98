// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "iterground/geometry.hpp"

namespace iterground {

// RGBA8 raster, row-major. Everything that touches pixels goes through this.
struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // 4 bytes per pixel

    static RasterImage filled(int w, int h, std::array<std::uint8_t, 4> rgba);

    bool empty() const { return width == 0 || height == 0; }
    ImageDims dims() const { return ImageDims(width, height); }

    std::uint8_t* at(int x, int y) {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 4;
    }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 4;
    }

    bool operator==(const RasterImage&) const = default;
};

// Exact pixel sub-rectangle; no resampling. Throws ViewportOutOfBounds.
RasterImage crop_image(const RasterImage& image, const Viewport& vp);

RasterImage load_png(const std::filesystem::path& path);
void save_png(const RasterImage& image, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const RasterImage& image);
RasterImage decode_png(const std::uint8_t* data, std::size_t size);

// Reads width/height from a PNG header without decoding the pixel data.
ImageDims read_png_dims(const std::filesystem::path& path);

std::string base64_encode(const std::uint8_t* data, std::size_t size);
std::vector<std::uint8_t> base64_decode(const std::string& text);

} // namespace iterground
