// SPDX-License-Identifier: Apache-2.0
#include "iterground/pipeline.hpp"

#include "iterground/errors.hpp"

namespace iterground {

GroundingTrace ground(const RasterImage& image, const std::string& query,
                      GroundingBackend& backend, const GroundingConfig& cfg,
                      std::optional<AbsPoint> ground_truth_target,
                      const std::string& image_ref) {
    if (cfg.iterations_n < 1)
        throw std::invalid_argument("ground: iterations_n must be >= 1");
    cfg.shrink_policy.validate();

    const ImageDims dims = image.dims();
    if (dims.width_px < cfg.shrink_policy.min_dim_px ||
        dims.height_px < cfg.shrink_policy.min_dim_px)
        throw GeometryDegenerate("ground: image " + std::to_string(dims.width_px) + "x" +
                                 std::to_string(dims.height_px) +
                                 " is smaller than min_dim_px=" +
                                 std::to_string(cfg.shrink_policy.min_dim_px));

    // Orientation is fixed from the original image and reused every iteration.
    const Orientation orient = orientation_of(dims);

    GroundingTrace trace;
    trace.query = query;
    trace.image_ref = image_ref;
    trace.original_dims = dims;
    trace.orientation = orient;
    trace.records.reserve(static_cast<std::size_t>(cfg.iterations_n));

    Viewport window{0, 0, dims.width_px, dims.height_px};
    for (int k = 1; k <= cfg.iterations_n; ++k) {
        RasterImage crop = crop_image(image, window);
        IterationContext ctx{k, cfg.iterations_n, window, dims, ground_truth_target};

        BackendReply reply;
        try {
            reply = backend.predict(crop, query, ctx);
        } catch (const Error& e) {
            throw BackendFailure("iteration " + std::to_string(k) + ": " + e.what(), k);
        }

        IterationRecord rec;
        rec.iteration_index = k;
        rec.viewport_before = window;
        rec.reply = reply;
        rec.point_abs = to_absolute(reply.point, window);
        if (cfg.record_crops) rec.crop = std::move(crop);

        if (k < cfg.iterations_n) {
            auto [w, h] = shrink_dims(window.width_px, window.height_px, orient,
                                      cfg.shrink_policy);
            rec.viewport_after = center_window(rec.point_abs, w, h, dims);
            window = *rec.viewport_after;
        }
        trace.records.push_back(std::move(rec));
    }
    trace.final_point = trace.records.back().point_abs;
    return trace;
}

GroundingTrace ground_baseline(const RasterImage& image, const std::string& query,
                               GroundingBackend& backend,
                               std::optional<AbsPoint> ground_truth_target,
                               const std::string& image_ref) {
    GroundingConfig cfg;
    cfg.iterations_n = 1;
    return ground(image, query, backend, cfg, ground_truth_target, image_ref);
}

namespace {

nlohmann::json viewport_to_json(const Viewport& vp) {
    return nlohmann::json::array({vp.origin_x_px, vp.origin_y_px, vp.width_px, vp.height_px});
}

Viewport viewport_from_json(const nlohmann::json& j) {
    return Viewport{j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(),
                    j.at(3).get<int>()};
}

} // namespace

nlohmann::json trace_to_json(const GroundingTrace& trace) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& rec : trace.records) {
        nlohmann::json r{
            {"iteration_index", rec.iteration_index},
            {"viewport_before", viewport_to_json(rec.viewport_before)},
            {"reply",
             {{"raw_text", rec.reply.raw_text},
              {"point", {rec.reply.point.x, rec.reply.point.y}},
              {"latency_ms", rec.reply.latency_ms}}},
            {"point_abs", {rec.point_abs.x_px, rec.point_abs.y_px}},
            {"viewport_after",
             rec.viewport_after ? viewport_to_json(*rec.viewport_after)
                                : nlohmann::json(nullptr)}};
        records.push_back(std::move(r));
    }
    return nlohmann::json{
        {"query", trace.query},
        {"image_ref", trace.image_ref},
        {"original_dims", {trace.original_dims.width_px, trace.original_dims.height_px}},
        {"orientation", to_string(trace.orientation)},
        {"records", std::move(records)},
        {"final_point", {trace.final_point.x_px, trace.final_point.y_px}}};
}

GroundingTrace trace_from_json(const nlohmann::json& j) {
    GroundingTrace trace;
    trace.query = j.at("query").get<std::string>();
    trace.image_ref = j.value("image_ref", "");
    trace.original_dims =
        ImageDims(j.at("original_dims").at(0).get<int>(), j.at("original_dims").at(1).get<int>());
    trace.orientation = orientation_from_string(j.at("orientation").get<std::string>());
    for (const auto& r : j.at("records")) {
        IterationRecord rec;
        rec.iteration_index = r.at("iteration_index").get<int>();
        rec.viewport_before = viewport_from_json(r.at("viewport_before"));
        rec.reply.raw_text = r.at("reply").at("raw_text").get<std::string>();
        rec.reply.point = NormPoint(r.at("reply").at("point").at(0).get<double>(),
                                    r.at("reply").at("point").at(1).get<double>());
        rec.reply.latency_ms = r.at("reply").at("latency_ms").get<double>();
        rec.point_abs = AbsPoint{r.at("point_abs").at(0).get<double>(),
                                 r.at("point_abs").at(1).get<double>()};
        if (!r.at("viewport_after").is_null())
            rec.viewport_after = viewport_from_json(r.at("viewport_after"));
        trace.records.push_back(std::move(rec));
    }
    trace.final_point = AbsPoint{j.at("final_point").at(0).get<double>(),
                                 j.at("final_point").at(1).get<double>()};
    return trace;
}

} // namespace iterground
