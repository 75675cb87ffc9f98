// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale verification of the narrowing mechanism: synthetic screens, the
// accuracy-vs-n sweep under viewport-proportional error, and the context-loss
// failure scenario. Everything here is deterministic given the seeds.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iterground/backend.hpp"
#include "iterground/harness.hpp"
#include "iterground/image.hpp"

namespace iterground {

struct SyntheticScreenSpec {
    ImageDims dims{1024, 512};
    int grid_rows = 8;
    int grid_cols = 16;
    int element_size_px = 32;
    int target_index = 0;
    std::uint64_t seed = 1;
};

struct GeneratedScreen {
    RasterImage image;
    BBox target;
    std::vector<BBox> distractors; // every element except the target, by index
};

// Element bboxes of the grid layout, row-major; shared by generate_screen and
// the sweep. Throws ElementsDontFit when an element exceeds its grid cell.
std::vector<BBox> element_boxes(const SyntheticScreenSpec& spec);

// Deterministic screen: grid of visually distinct rectangles on a flat
// background. Same spec, same bytes.
GeneratedScreen generate_screen(const SyntheticScreenSpec& spec);

struct SweepSpec {
    std::vector<int> n_values{1, 2, 3};
    std::vector<double> sigma_values{0.05};
    int trials_per_cell = 2000;
    // hit criterion: target bbox containment unless a radius is given
    std::optional<double> hit_radius_px;
    std::uint64_t base_seed = 1;
    int workers = 1;
    NoisyOracleModel::OutOfViewPolicy out_of_view_policy =
        NoisyOracleModel::OutOfViewPolicy::ClampToEdge;
};

struct SweepCell {
    int n = 1;
    double sigma = 0.0;
    int trials = 0;
    double accuracy = 0.0;
    double stderr_acc = 0.0;       // binomial standard error of `accuracy`
    double mean_error_px = 0.0;    // mean Euclidean distance, all trials
    double lost_target_rate = 0.0; // target left the viewport at some iteration
    // in-view-throughout subset, for the error-scaling law
    int inview_trials = 0;
    double mean_inview_error_px = 0.0;
    double rms_inview_error_x_px = 0.0;
    double rms_inview_error_y_px = 0.0;
};

struct SweepResult {
    SyntheticScreenSpec screen;
    ShrinkPolicy policy;
    SweepSpec spec;
    std::vector<SweepCell> cells; // ordered by (n index, sigma index)

    const SweepCell& cell(int n, double sigma) const;
};

// For each (n, sigma) cell runs trials_per_cell ground() calls with the noisy
// oracle over randomized target elements. Per-trial seeds are derived from
// (base_seed, n, sigma, trial), so results are schedule-independent.
SweepResult run_sweep(const SyntheticScreenSpec& screen_template, const SweepSpec& sweep,
                      const ShrinkPolicy& policy);

std::string sweep_to_csv(const SweepResult& result);
nlohmann::json sweep_to_json(const SweepResult& result);

// -------------------------------------------------------------------------
// Context-loss scenario: a column of identical buttons, each tied to a
// distant row label. The scenario oracle answers correctly only while the
// target's label is fully inside the viewport; once the label is cropped
// away it picks uniformly among the identical buttons still in view.

struct ContextLossSpec {
    ImageDims dims{1200, 600};
    int rows = 8;
    double button_x = 1100.0;
    double button_size_px = 24.0;
    double label_center_x = 80.0;
    double label_w_px = 120.0;
    double label_h_px = 24.0;
    std::vector<double> row_centers_y; // empty: rows evenly spaced
    std::vector<int> n_values{1, 2, 3, 4, 5};
};

struct ContextLossRow {
    int n = 1;
    double hit_rate = 0.0;
    double miss_rate = 0.0;
};

struct ContextLossReport {
    ContextLossSpec spec;
    std::vector<ContextLossRow> rows;
    // first iteration whose viewport no longer contains the label, per target
    // row (0 = never exits within max n)
    std::vector<int> label_exit_iteration;
};

// Exact computation: enumerates target rows and propagates the uniform
// button-choice distribution through the deterministic window geometry.
// No sampling, so the miss rates are exact.
ContextLossReport run_context_loss_scenario(const ShrinkPolicy& policy,
                                            const ContextLossSpec& spec = {});

nlohmann::json context_loss_to_json(const ContextLossReport& report);

// Scene image for the scenario (buttons, labels), for rendering demos.
RasterImage render_context_scene(const ContextLossSpec& spec);

} // namespace iterground
