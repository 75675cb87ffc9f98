// SPDX-License-Identifier: Apache-2.0
//
// ScreenSpot-style benchmark: JSONL manifest ingestion, click-in-box scoring,
// and baseline-vs-ours reporting shaped like the paper's tables.
#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iterground/backend.hpp"
#include "iterground/pipeline.hpp"

namespace iterground {

struct BBox {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    AbsPoint center() const { return {(x1 + x2) / 2.0, (y1 + y2) / 2.0}; }
    bool operator==(const BBox&) const = default;
};

enum class BBoxConvention { XYXY, XYWH };

enum class Platform { Mobile, Desktop, Web };
enum class ElementType { Text, Icon };

const char* to_string(Platform p);
const char* to_string(ElementType t);
Platform platform_from_string(const std::string& s);
ElementType element_type_from_string(const std::string& s);

struct BenchExample {
    std::string example_id;
    std::filesystem::path image_path;
    std::string instruction;
    BBox bbox; // XYXY, original-image pixels
    Platform platform = Platform::Mobile;
    ElementType element_type = ElementType::Text;
};

// Parses a JSONL manifest ({"id","image","instruction","bbox","platform",
// "element_type"} per line; ScreenSpot's published field names are accepted
// as synonyms). Bboxes are normalized to XYXY and clamped to image bounds.
std::vector<BenchExample> load_dataset(const std::filesystem::path& manifest_path,
                                       BBoxConvention convention);

// Click accuracy criterion: true iff the point is inside the box, boundaries
// closed.
bool score_point(const AbsPoint& p, const BBox& box);

struct EvalOutcome {
    std::string example_id;
    std::optional<GroundingTrace> trace; // absent if the trace aborted
    bool hit = false;
    std::optional<AbsPoint> final_point;
    std::string error; // failure message when the trace aborted
};

nlohmann::json outcome_to_json(const EvalOutcome& outcome);

struct CellStats {
    int hits = 0;
    int total = 0;

    std::optional<double> accuracy() const {
        if (total == 0) return std::nullopt;
        return static_cast<double>(hits) / total;
    }
    bool operator==(const CellStats&) const = default;
};

struct MethodOverall {
    int hits = 0;
    int total = 0;
    double micro = 0.0; // pooled over all examples
    double macro = 0.0; // mean over populated cells
    bool operator==(const MethodOverall&) const = default;
};

struct BenchReport {
    std::string label; // row name in the tables (model/config)
    bool has_baseline = true;
    // cells[platform][element_type][method]; method 0 = baseline, 1 = ours
    std::array<std::array<std::array<CellStats, 2>, 2>, 3> cells{};
    MethodOverall overall_baseline;
    MethodOverall overall_ours;
    nlohmann::json config_snapshot;

    CellStats& cell(Platform p, ElementType t, bool ours) {
        return cells[static_cast<int>(p)][static_cast<int>(t)][ours ? 1 : 0];
    }
    const CellStats& cell(Platform p, ElementType t, bool ours) const {
        return cells[static_cast<int>(p)][static_cast<int>(t)][ours ? 1 : 0];
    }

    bool operator==(const BenchReport&) const = default;
};

struct BenchOptions {
    GroundingConfig ours{};
    bool run_baseline = true;
    int workers = 4;
    std::string label = "";
};

struct BenchRun {
    BenchReport report;
    std::vector<EvalOutcome> outcomes_baseline; // empty when baseline off
    std::vector<EvalOutcome> outcomes_ours;     // input order
};

// Evaluates every example with bounded concurrency. Ground-truth bbox centers
// are supplied to the backend context (oracle backends use them). Failed
// traces count as misses.
BenchRun run_benchmark(const std::vector<BenchExample>& examples, GroundingBackend& backend,
                       const BenchOptions& options);

enum class ReportFormat { Json, MarkdownTable, Csv };

std::string emit_report(const BenchReport& report, ReportFormat format);
BenchReport report_from_json(const nlohmann::json& j);

} // namespace iterground
