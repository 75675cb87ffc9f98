// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "iterground/image.hpp"
#include "iterground/pipeline.hpp"

namespace iterground {

struct Rgba {
    std::uint8_t r = 0, g = 0, b = 0, a = 255;
    bool operator==(const Rgba&) const = default;
};

struct RenderStyle {
    Rgba cross_color{220, 30, 30, 255};
    Rgba box_color{220, 30, 30, 255};
    int cross_size_px = 24;
    int stroke_px = 3;
    bool label_iterations = true;
};

// Copy of the original image with, per iteration, a cross at the predicted
// absolute point and (when present) the next window's rectangle. Original
// pixels are untouched elsewhere.
RasterImage render_trace(const RasterImage& image, const GroundingTrace& trace,
                         const RenderStyle& style);

// Horizontal strip of the per-iteration crops, each annotated with that
// iteration's prediction, scaled to a common panel height.
RasterImage render_iteration_strip(const RasterImage& image, const GroundingTrace& trace,
                                   const RenderStyle& style);

} // namespace iterground
