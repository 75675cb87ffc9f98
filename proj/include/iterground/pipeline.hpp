// SPDX-License-Identifier: Apache-2.0
//
// The iterative narrowing loop: crop, query the backend, re-project, shrink
// and re-center the window around the prediction, repeat.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iterground/backend.hpp"
#include "iterground/geometry.hpp"
#include "iterground/image.hpp"

namespace iterground {

struct GroundingConfig {
    int iterations_n = 3; // n = 1 degenerates to the single-shot baseline
    ShrinkPolicy shrink_policy{};
    bool record_crops = false; // keep per-iteration crop images on the trace
};

struct IterationRecord {
    int iteration_index = 1;
    Viewport viewport_before;              // window the crop was taken from
    BackendReply reply;
    AbsPoint point_abs;                    // reply.point re-projected through viewport_before
    std::optional<Viewport> viewport_after; // absent on the final iteration
    std::optional<RasterImage> crop;       // populated when record_crops is set
};

struct GroundingTrace {
    std::string query;
    std::string image_ref; // path or content digest, informational
    ImageDims original_dims;
    Orientation orientation = Orientation::Landscape;
    std::vector<IterationRecord> records;
    AbsPoint final_point;
};

// Runs the full loop. `ground_truth_target` is plumbed into the iteration
// context for oracle backends; other backends ignore it. Backend errors are
// rethrown as BackendFailure annotated with the failing iteration.
GroundingTrace ground(const RasterImage& image, const std::string& query,
                      GroundingBackend& backend, const GroundingConfig& cfg,
                      std::optional<AbsPoint> ground_truth_target = std::nullopt,
                      const std::string& image_ref = "");

// Single-shot baseline: exactly ground() with iterations_n = 1.
GroundingTrace ground_baseline(const RasterImage& image, const std::string& query,
                               GroundingBackend& backend,
                               std::optional<AbsPoint> ground_truth_target = std::nullopt,
                               const std::string& image_ref = "");

// Trace serialization: points as [x, y] reals, viewports as [ox, oy, w, h]
// integers. Crop images are never serialized.
nlohmann::json trace_to_json(const GroundingTrace& trace);
GroundingTrace trace_from_json(const nlohmann::json& j);

} // namespace iterground
