// SPDX-License-Identifier: Apache-2.0
#include "iterground/backend.hpp"

#include <algorithm>
#include <cstdio>
#include <regex>

#include "iterground/errors.hpp"
#include "iterground/rng.hpp"

namespace iterground {

const char* to_string(CoordinateScale s) {
    switch (s) {
    case CoordinateScale::Unit: return "unit";
    case CoordinateScale::Percent: return "percent";
    case CoordinateScale::Thousand: return "thousand";
    case CoordinateScale::PixelRelativeToSentImage: return "pixel";
    }
    return "unit";
}

CoordinateScale coordinate_scale_from_string(const std::string& s) {
    if (s == "unit") return CoordinateScale::Unit;
    if (s == "percent") return CoordinateScale::Percent;
    if (s == "thousand") return CoordinateScale::Thousand;
    if (s == "pixel") return CoordinateScale::PixelRelativeToSentImage;
    throw std::invalid_argument("unknown coordinate scale: " + s);
}

NormPoint parse_point(const std::string& raw, CoordinateScale scale, const ImageDims& sent_dims) {
    static const std::regex number(R"([-+]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][-+]?[0-9]+)?)");
    std::vector<double> nums;
    for (auto it = std::sregex_iterator(raw.begin(), raw.end(), number);
         it != std::sregex_iterator(); ++it) {
        nums.push_back(std::stod(it->str()));
        if (nums.size() > 4) break; // only the bbox case needs more than two
    }
    if (nums.size() < 2)
        throw UnparseableReply("parse_point: fewer than two numeric literals in \"" + raw + "\"");

    double x, y;
    if (nums.size() == 4) { // bounding box -> its center
        x = (nums[0] + nums[2]) / 2.0;
        y = (nums[1] + nums[3]) / 2.0;
    } else {
        x = nums[0];
        y = nums[1];
    }

    switch (scale) {
    case CoordinateScale::Unit: break;
    case CoordinateScale::Percent:
        x /= 100.0;
        y /= 100.0;
        break;
    case CoordinateScale::Thousand:
        x /= 1000.0;
        y /= 1000.0;
        break;
    case CoordinateScale::PixelRelativeToSentImage:
        x /= sent_dims.width_px;
        y /= sent_dims.height_px;
        break;
    }
    return NormPoint::clamped(x, y);
}

BackendReply ScriptedBackend::predict(const RasterImage& crop, const std::string&,
                                      const IterationContext& ctx) {
    if (ctx.iteration_index < 1 || static_cast<std::size_t>(ctx.iteration_index) > script_.size())
        throw ScriptExhausted("scripted backend: no reply for iteration " +
                              std::to_string(ctx.iteration_index) + " (script has " +
                              std::to_string(script_.size()) + " entries)");
    const std::string& raw = script_[static_cast<std::size_t>(ctx.iteration_index) - 1];
    return BackendReply{raw, parse_point(raw, scale_, crop.dims()), 0.0};
}

BackendReply oracle_predict(const NoisyOracleModel& model, const IterationContext& ctx) {
    if (!ctx.ground_truth_target)
        throw MissingGroundTruth("oracle backend requires a ground-truth target");

    const Viewport& vp = ctx.viewport;
    const AbsPoint& t = *ctx.ground_truth_target;
    double tx = (t.x_px - vp.origin_x_px) / vp.width_px;
    double ty = (t.y_px - vp.origin_y_px) / vp.height_px;

    SplitMix64 rng(mix_seed({model.seed, static_cast<std::uint64_t>(ctx.iteration_index),
                             static_cast<std::uint64_t>(vp.origin_x_px),
                             static_cast<std::uint64_t>(vp.origin_y_px),
                             static_cast<std::uint64_t>(vp.width_px),
                             static_cast<std::uint64_t>(vp.height_px)}));

    double px, py;
    bool in_view = tx >= 0.0 && tx <= 1.0 && ty >= 0.0 && ty <= 1.0;
    if (in_view) {
        px = tx + model.sigma * rng.gaussian();
        py = ty + model.sigma * rng.gaussian();
    } else if (model.out_of_view_policy == NoisyOracleModel::OutOfViewPolicy::ClampToEdge) {
        px = std::clamp(tx, 0.0, 1.0) + model.sigma * rng.gaussian();
        py = std::clamp(ty, 0.0, 1.0) + model.sigma * rng.gaussian();
    } else {
        px = rng.next_double();
        py = rng.next_double();
    }

    char raw[64];
    std::snprintf(raw, sizeof(raw), "(%.9f, %.9f)", px, py); // pre-clamp values
    return BackendReply{raw, NormPoint::clamped(px, py), 0.0};
}

} // namespace iterground
