// SPDX-License-Identifier: Apache-2.0
#include "iterground/image.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>

#include "iterground/errors.hpp"

namespace iterground {

RasterImage RasterImage::filled(int w, int h, std::array<std::uint8_t, 4> rgba) {
    if (w < 1 || h < 1)
        throw std::invalid_argument("RasterImage: dimensions must be >= 1");
    RasterImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<std::size_t>(w) * h * 4);
    for (std::size_t i = 0; i < img.pixels.size(); i += 4)
        std::memcpy(&img.pixels[i], rgba.data(), 4);
    return img;
}

RasterImage crop_image(const RasterImage& image, const Viewport& vp) {
    if (!vp.within(image.dims()))
        throw ViewportOutOfBounds("crop_image: viewport [" + std::to_string(vp.origin_x_px) +
                                  "," + std::to_string(vp.origin_y_px) + "," +
                                  std::to_string(vp.width_px) + "," +
                                  std::to_string(vp.height_px) + "] exceeds image " +
                                  std::to_string(image.width) + "x" +
                                  std::to_string(image.height));
    RasterImage out;
    out.width = vp.width_px;
    out.height = vp.height_px;
    out.pixels.resize(static_cast<std::size_t>(out.width) * out.height * 4);
    const std::size_t row_bytes = static_cast<std::size_t>(vp.width_px) * 4;
    for (int y = 0; y < vp.height_px; ++y) {
        std::memcpy(out.at(0, y), image.at(vp.origin_x_px, vp.origin_y_px + y), row_bytes);
    }
    return out;
}

namespace {

struct PngReadCtx {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

void png_mem_read(png_structp png, png_bytep out, png_size_t len) {
    auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
    if (ctx->pos + len > ctx->size)
        png_error(png, "read past end of PNG buffer");
    std::memcpy(out, ctx->data + ctx->pos, len);
    ctx->pos += len;
}

void png_mem_write(png_structp png, png_bytep data, png_size_t len) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + len);
}

void png_mem_flush(png_structp) {}

RasterImage decode_with(png_structp png, png_infop info) {
    png_read_info(png, info);

    // normalize every input layout to RGBA8
    png_set_expand(png);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    int color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
    png_read_update_info(png, info);

    RasterImage img;
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 4);
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y) rows[y] = img.at(0, y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    return img;
}

} // namespace

RasterImage decode_png(const std::uint8_t* data, std::size_t size) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("decode_png: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("decode_png: out of memory");
    }
    PngReadCtx ctx{data, size, 0};
    RasterImage img;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("decode_png: malformed PNG data");
    }
    png_set_read_fn(png, &ctx, png_mem_read);
    img = decode_with(png, info);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

RasterImage load_png(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_png: cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_png(bytes.data(), bytes.size());
}

std::vector<std::uint8_t> encode_png(const RasterImage& image) {
    if (image.empty()) throw IoError("encode_png: empty image");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("encode_png: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("encode_png: out of memory");
    }
    std::vector<std::uint8_t> out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("encode_png: libpng failure");
    }
    png_set_write_fn(png, &out, png_mem_write, png_mem_flush);
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGBA,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y)
        rows[y] = const_cast<png_bytep>(image.at(0, y));
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

void save_png(const RasterImage& image, const std::filesystem::path& path) {
    auto bytes = encode_png(image);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("save_png: cannot open " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("save_png: write failed for " + path.string());
}

ImageDims read_png_dims(const std::filesystem::path& path) {
    // PNG layout: 8-byte signature, 4-byte length, "IHDR", width, height (big-endian)
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_png_dims: cannot open " + path.string());
    std::uint8_t hdr[24];
    in.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (!in || std::memcmp(hdr, sig, 8) != 0 || std::memcmp(hdr + 12, "IHDR", 4) != 0)
        throw IoError("read_png_dims: not a PNG file: " + path.string());
    auto be32 = [&](int off) {
        return (static_cast<std::uint32_t>(hdr[off]) << 24) |
               (static_cast<std::uint32_t>(hdr[off + 1]) << 16) |
               (static_cast<std::uint32_t>(hdr[off + 2]) << 8) |
               static_cast<std::uint32_t>(hdr[off + 3]);
    };
    return ImageDims(static_cast<int>(be32(16)), static_cast<int>(be32(20)));
}

static const char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::uint8_t* data, std::size_t size) {
    std::string out;
    out.reserve((size + 2) / 3 * 4);
    for (std::size_t i = 0; i < size; i += 3) {
        std::uint32_t block = static_cast<std::uint32_t>(data[i]) << 16;
        if (i + 1 < size) block |= static_cast<std::uint32_t>(data[i + 1]) << 8;
        if (i + 2 < size) block |= data[i + 2];
        out.push_back(kB64Alphabet[(block >> 18) & 0x3F]);
        out.push_back(kB64Alphabet[(block >> 12) & 0x3F]);
        out.push_back(i + 1 < size ? kB64Alphabet[(block >> 6) & 0x3F] : '=');
        out.push_back(i + 2 < size ? kB64Alphabet[block & 0x3F] : '=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    int acc = 0, bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        int v = value(c);
        if (v < 0) throw IoError("base64_decode: invalid character");
        acc = (acc << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
        }
    }
    return out;
}

} // namespace iterground
