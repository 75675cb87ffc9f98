// SPDX-License-Identifier: Apache-2.0
//
// Grounding backends: anything that maps (crop, query) -> normalized point.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iterground/geometry.hpp"
#include "iterground/image.hpp"

namespace iterground {

// Coordinate convention a model family emits. Unit divides by 1, Percent by
// 100, Thousand by 1000, PixelRelativeToSentImage by the sent crop dims.
enum class CoordinateScale { Unit, Percent, Thousand, PixelRelativeToSentImage };

const char* to_string(CoordinateScale s);
CoordinateScale coordinate_scale_from_string(const std::string& s);

struct IterationContext {
    int iteration_index = 1; // 1-based
    int total_iterations = 1;
    Viewport viewport;       // window the crop was taken from
    ImageDims original_dims;
    std::optional<AbsPoint> ground_truth_target; // oracle backends only
};

struct BackendReply {
    std::string raw_text;   // verbatim model output (pre-clamp evidence)
    NormPoint point;        // parsed and clamped to [0,1]^2
    double latency_ms = 0.0;
};

// Extracts the first two numeric literals (exactly four are read as a
// bounding box and reduced to its center), applies the scale, clamps to
// [0,1]^2. Throws UnparseableReply when fewer than two numbers are found.
NormPoint parse_point(const std::string& raw, CoordinateScale scale, const ImageDims& sent_dims);

class GroundingBackend {
public:
    virtual ~GroundingBackend() = default;
    virtual BackendReply predict(const RasterImage& crop, const std::string& query,
                                 const IterationContext& ctx) = 0;
    virtual std::string name() const = 0;
};

// Fixed list of raw replies indexed by iteration; golden-trace testing.
class ScriptedBackend final : public GroundingBackend {
public:
    explicit ScriptedBackend(std::vector<std::string> script,
                             CoordinateScale scale = CoordinateScale::Unit)
        : script_(std::move(script)), scale_(scale) {}

    BackendReply predict(const RasterImage& crop, const std::string& query,
                         const IterationContext& ctx) override;
    std::string name() const override { return "scripted"; }

private:
    std::vector<std::string> script_;
    CoordinateScale scale_;
};

// Synthetic backend whose error is Gaussian in viewport-normalized units,
// i.e. proportional to the visible extent. Deterministic given (seed, ctx).
struct NoisyOracleModel {
    enum class OutOfViewPolicy { ClampToEdge, UniformRandom };

    double sigma = 0.0;
    std::uint64_t seed = 0;
    OutOfViewPolicy out_of_view_policy = OutOfViewPolicy::ClampToEdge;
};

BackendReply oracle_predict(const NoisyOracleModel& model, const IterationContext& ctx);

class OracleBackend final : public GroundingBackend {
public:
    explicit OracleBackend(NoisyOracleModel model) : model_(model) {}

    BackendReply predict(const RasterImage&, const std::string&,
                         const IterationContext& ctx) override {
        return oracle_predict(model_, ctx);
    }
    std::string name() const override { return "oracle"; }

private:
    NoisyOracleModel model_;
};

} // namespace iterground
