// SPDX-License-Identifier: Apache-2.0
//
// Crop-window arithmetic: orientation, shrink schedule, normalized-to-absolute
// re-projection and border-clamped window centering. All functions are pure.
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace iterground {

struct ImageDims {
    int width_px = 0;
    int height_px = 0;

    ImageDims() = default;
    ImageDims(int w, int h) : width_px(w), height_px(h) {
        if (w < 1 || h < 1)
            throw std::invalid_argument("ImageDims: dimensions must be >= 1");
    }

    bool operator==(const ImageDims&) const = default;
};

enum class Orientation { Landscape, Portrait };

const char* to_string(Orientation o);
Orientation orientation_from_string(const std::string& s);

// Coordinates normalized to the current crop window, in [0,1] x [0,1].
// Construction rejects out-of-range values; clamping is a separate, explicit
// operation.
struct NormPoint {
    double x = 0.0;
    double y = 0.0;

    NormPoint() = default;
    NormPoint(double x, double y) : x(x), y(y) {
        if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
            throw std::invalid_argument("NormPoint: coordinates outside [0,1]");
    }

    static NormPoint clamped(double x, double y);

    bool operator==(const NormPoint&) const = default;
};

// A point in original-image pixel space. Kept as reals; integer conversion
// happens only at crop/window boundaries and final reporting.
struct AbsPoint {
    double x_px = 0.0;
    double y_px = 0.0;

    bool operator==(const AbsPoint&) const = default;
};

// Rectangular crop window in original-image pixel space.
struct Viewport {
    int origin_x_px = 0;
    int origin_y_px = 0;
    int width_px = 0;
    int height_px = 0;

    bool contains(const AbsPoint& p) const {
        return p.x_px >= origin_x_px && p.x_px <= origin_x_px + width_px &&
               p.y_px >= origin_y_px && p.y_px <= origin_y_px + height_px;
    }

    AbsPoint center() const {
        return {origin_x_px + width_px / 2.0, origin_y_px + height_px / 2.0};
    }

    bool within(const ImageDims& img) const {
        return origin_x_px >= 0 && origin_y_px >= 0 && width_px >= 1 && height_px >= 1 &&
               origin_x_px + width_px <= img.width_px &&
               origin_y_px + height_px <= img.height_px;
    }

    bool operator==(const Viewport&) const = default;
};

// Per-orientation shrink factors and the hard floor on window dimensions.
struct ShrinkPolicy {
    double landscape_w_factor = 0.5;
    double landscape_h_factor = 0.5;
    double portrait_w_factor = 1.0 / 1.2;
    double portrait_h_factor = 0.5;
    int min_dim_px = 28;

    std::pair<double, double> factors(Orientation o) const {
        return o == Orientation::Landscape
                   ? std::make_pair(landscape_w_factor, landscape_h_factor)
                   : std::make_pair(portrait_w_factor, portrait_h_factor);
    }

    void validate() const;

    bool operator==(const ShrinkPolicy&) const = default;
};

// Nearest integer, half away from zero.
int round_half_away(double v);

// Landscape iff width >= height (ties are landscape). Computed once from the
// original image and reused every iteration.
Orientation orientation_of(const ImageDims& dims);

// One step of the shrink schedule; each result floored at policy.min_dim_px.
std::pair<int, int> shrink_dims(int w, int h, Orientation orient, const ShrinkPolicy& policy);

// Re-project a window-normalized point into original-image pixel space.
AbsPoint to_absolute(const NormPoint& p, const Viewport& vp);

// A w x h window centered as close to `center` as possible while staying
// fully inside the image. The window is translated at borders, never resized.
Viewport center_window(const AbsPoint& center, int w, int h, const ImageDims& img);

} // namespace iterground
