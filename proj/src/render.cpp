// SPDX-License-Identifier: Apache-2.0
#include "iterground/render.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iterground/errors.hpp"

namespace iterground {

namespace {

void put_pixel(RasterImage& img, int x, int y, const Rgba& c) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    std::uint8_t* p = img.at(x, y);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
    p[3] = c.a;
}

void fill_rect(RasterImage& img, int x0, int y0, int x1, int y1, const Rgba& c) {
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) put_pixel(img, x, y, c);
}

// Unfilled rectangle with the stroke drawn inside the viewport bounds, so the
// drawn box covers exactly the viewport's integer extent.
void draw_box(RasterImage& img, const Viewport& vp, int stroke, const Rgba& c) {
    int x0 = vp.origin_x_px, y0 = vp.origin_y_px;
    int x1 = vp.origin_x_px + vp.width_px, y1 = vp.origin_y_px + vp.height_px;
    stroke = std::min({stroke, vp.width_px, vp.height_px});
    fill_rect(img, x0, y0, x1, y0 + stroke, c);          // top
    fill_rect(img, x0, y1 - stroke, x1, y1, c);          // bottom
    fill_rect(img, x0, y0, x0 + stroke, y1, c);          // left
    fill_rect(img, x1 - stroke, y0, x1, y1, c);          // right
}

void draw_cross(RasterImage& img, int cx, int cy, int size, int stroke, const Rgba& c) {
    int half = size / 2;
    int s0 = stroke / 2;
    int s1 = stroke - s0;
    fill_rect(img, cx - half, cy - s0, cx + half + 1, cy + s1, c); // horizontal arm
    fill_rect(img, cx - s0, cy - half, cx + s1, cy + half + 1, c); // vertical arm
}

// 3x5 bitmap digits, row-major, most significant bit = leftmost column
constexpr std::uint16_t kDigits[10] = {
    0b111101101101111, // 0
    0b010110010010111, // 1
    0b111001111100111, // 2
    0b111001111001111, // 3
    0b101101111001001, // 4
    0b111100111001111, // 5
    0b111100111101111, // 6
    0b111001001001001, // 7
    0b111101111101111, // 8
    0b111101111001111, // 9
};

void draw_digits(RasterImage& img, int x, int y, const std::string& text, int scale,
                 const Rgba& c) {
    for (char ch : text) {
        if (ch >= '0' && ch <= '9') {
            std::uint16_t bits = kDigits[ch - '0'];
            for (int row = 0; row < 5; ++row)
                for (int col = 0; col < 3; ++col)
                    if (bits & (1 << (14 - (row * 3 + col))))
                        fill_rect(img, x + col * scale, y + row * scale, x + (col + 1) * scale,
                                  y + (row + 1) * scale, c);
        }
        x += 4 * scale;
    }
}

void check_dims(const RasterImage& image, const GroundingTrace& trace) {
    if (image.dims() != trace.original_dims)
        throw DimsMismatch("trace belongs to a " +
                           std::to_string(trace.original_dims.width_px) + "x" +
                           std::to_string(trace.original_dims.height_px) + " image, got " +
                           std::to_string(image.width) + "x" + std::to_string(image.height));
}

void annotate_iteration(RasterImage& panel, const IterationRecord& rec, double scale,
                        const RenderStyle& style) {
    // prediction in crop-local coordinates
    double lx = (rec.point_abs.x_px - rec.viewport_before.origin_x_px) * scale;
    double ly = (rec.point_abs.y_px - rec.viewport_before.origin_y_px) * scale;
    int cx = std::clamp(static_cast<int>(std::lround(lx)), 0, panel.width - 1);
    int cy = std::clamp(static_cast<int>(std::lround(ly)), 0, panel.height - 1);
    draw_cross(panel, cx, cy, style.cross_size_px, style.stroke_px, style.cross_color);
    if (style.label_iterations) {
        int digit_scale = std::max(2, style.stroke_px);
        draw_digits(panel, 2 * digit_scale, 2 * digit_scale,
                    std::to_string(rec.iteration_index), digit_scale, style.cross_color);
    }
}

} // namespace

RasterImage render_trace(const RasterImage& image, const GroundingTrace& trace,
                         const RenderStyle& style) {
    check_dims(image, trace);
    RasterImage out = image;
    for (const auto& rec : trace.records)
        if (rec.viewport_after) draw_box(out, *rec.viewport_after, style.stroke_px,
                                         style.box_color);
    // crosses go on top so the final prediction is never occluded
    for (const auto& rec : trace.records) {
        int cx = round_half_away(rec.point_abs.x_px);
        int cy = round_half_away(rec.point_abs.y_px);
        cx = std::clamp(cx, 0, image.width - 1);
        cy = std::clamp(cy, 0, image.height - 1);
        draw_cross(out, cx, cy, style.cross_size_px, style.stroke_px, style.cross_color);
        if (style.label_iterations) {
            int digit_scale = std::max(2, style.stroke_px);
            draw_digits(out, cx + style.cross_size_px / 2 + digit_scale,
                        cy - style.cross_size_px / 2 - 5 * digit_scale,
                        std::to_string(rec.iteration_index), digit_scale, style.cross_color);
        }
    }
    return out;
}

RasterImage render_iteration_strip(const RasterImage& image, const GroundingTrace& trace,
                                   const RenderStyle& style) {
    check_dims(image, trace);
    if (trace.records.empty()) throw DimsMismatch("trace has no records");

    const int gutter = trace.records.size() > 1 ? 4 : 0;
    const int panel_h = trace.records.front().viewport_before.height_px; // largest crop

    struct Panel {
        RasterImage img;
    };
    std::vector<Panel> panels;
    int total_w = 0;
    for (const auto& rec : trace.records) {
        RasterImage crop = crop_image(image, rec.viewport_before);
        double scale = static_cast<double>(panel_h) / crop.height;
        int pw = std::max(1, static_cast<int>(std::lround(crop.width * scale)));
        RasterImage panel;
        if (pw == crop.width && panel_h == crop.height) {
            panel = std::move(crop); // no resampling needed
        } else {
            panel.width = pw;
            panel.height = panel_h;
            panel.pixels.resize(static_cast<std::size_t>(pw) * panel_h * 4);
            for (int y = 0; y < panel_h; ++y) {
                int sy = std::min(crop.height - 1, static_cast<int>(y / scale));
                for (int x = 0; x < pw; ++x) {
                    int sx = std::min(crop.width - 1, static_cast<int>(x / scale));
                    std::copy_n(crop.at(sx, sy), 4, panel.at(x, y));
                }
            }
        }
        annotate_iteration(panel, rec, static_cast<double>(panel_h) / rec.viewport_before.height_px,
                           style);
        total_w += panel.width;
        panels.push_back({std::move(panel)});
    }
    total_w += gutter * static_cast<int>(panels.size() - 1);

    if (panels.size() == 1) return std::move(panels.front().img);

    RasterImage strip = RasterImage::filled(total_w, panel_h, {0, 0, 0, 255});
    int x_off = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
        const RasterImage& p = panels[i].img;
        for (int y = 0; y < p.height; ++y)
            std::copy_n(p.at(0, y), static_cast<std::size_t>(p.width) * 4, strip.at(x_off, y));
        x_off += p.width + gutter;
    }
    return strip;
}

} // namespace iterground
