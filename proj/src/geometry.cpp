// SPDX-License-Identifier: Apache-2.0
#include "iterground/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "iterground/errors.hpp"

namespace iterground {

const char* to_string(Orientation o) {
    return o == Orientation::Landscape ? "landscape" : "portrait";
}

Orientation orientation_from_string(const std::string& s) {
    if (s == "landscape") return Orientation::Landscape;
    if (s == "portrait") return Orientation::Portrait;
    throw std::invalid_argument("unknown orientation: " + s);
}

NormPoint NormPoint::clamped(double x, double y) {
    return NormPoint(std::clamp(x, 0.0, 1.0), std::clamp(y, 0.0, 1.0));
}

void ShrinkPolicy::validate() const {
    auto ok = [](double f) { return f > 0.0 && f <= 1.0; };
    if (!ok(landscape_w_factor) || !ok(landscape_h_factor) || !ok(portrait_w_factor) ||
        !ok(portrait_h_factor))
        throw std::invalid_argument("ShrinkPolicy: factors must be in (0,1]");
    if (min_dim_px < 1)
        throw std::invalid_argument("ShrinkPolicy: min_dim_px must be >= 1");
}

int round_half_away(double v) {
    return static_cast<int>(std::llround(v));
}

Orientation orientation_of(const ImageDims& dims) {
    return dims.width_px >= dims.height_px ? Orientation::Landscape : Orientation::Portrait;
}

std::pair<int, int> shrink_dims(int w, int h, Orientation orient, const ShrinkPolicy& policy) {
    auto [fw, fh] = policy.factors(orient);
    int nw = std::max(policy.min_dim_px, round_half_away(w * fw));
    int nh = std::max(policy.min_dim_px, round_half_away(h * fh));
    return {nw, nh};
}

AbsPoint to_absolute(const NormPoint& p, const Viewport& vp) {
    return {vp.origin_x_px + p.x * vp.width_px, vp.origin_y_px + p.y * vp.height_px};
}

Viewport center_window(const AbsPoint& center, int w, int h, const ImageDims& img) {
    if (w < 1 || h < 1 || w > img.width_px || h > img.height_px)
        throw std::invalid_argument("center_window: window does not fit the image");
    int ox = std::clamp(round_half_away(center.x_px - w / 2.0), 0, img.width_px - w);
    int oy = std::clamp(round_half_away(center.y_px - h / 2.0), 0, img.height_px - h);
    return Viewport{ox, oy, w, h};
}

} // namespace iterground
