// SPDX-License-Identifier: Apache-2.0
#include "iterground/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include "iterground/errors.hpp"
#include "iterground/parallel.hpp"
#include "iterground/pipeline.hpp"
#include "iterground/rng.hpp"

namespace iterground {

std::vector<BBox> element_boxes(const SyntheticScreenSpec& spec) {
    if (spec.grid_rows < 1 || spec.grid_cols < 1 || spec.element_size_px < 1)
        throw std::invalid_argument("SyntheticScreenSpec: grid and element size must be >= 1");
    const double cell_w = static_cast<double>(spec.dims.width_px) / spec.grid_cols;
    const double cell_h = static_cast<double>(spec.dims.height_px) / spec.grid_rows;
    if (spec.element_size_px > cell_w || spec.element_size_px > cell_h)
        throw ElementsDontFit("element_size_px=" + std::to_string(spec.element_size_px) +
                              " exceeds grid cell " + std::to_string(cell_w) + "x" +
                              std::to_string(cell_h));
    std::vector<BBox> boxes;
    boxes.reserve(static_cast<std::size_t>(spec.grid_rows) * spec.grid_cols);
    const double half = spec.element_size_px / 2.0;
    for (int r = 0; r < spec.grid_rows; ++r) {
        for (int c = 0; c < spec.grid_cols; ++c) {
            double cx = (c + 0.5) * cell_w;
            double cy = (r + 0.5) * cell_h;
            boxes.push_back(BBox{cx - half, cy - half, cx + half, cy + half});
        }
    }
    return boxes;
}

namespace {

void fill_box(RasterImage& img, const BBox& box, std::array<std::uint8_t, 4> rgba) {
    int x0 = std::max(0, round_half_away(box.x1));
    int y0 = std::max(0, round_half_away(box.y1));
    int x1 = std::min(img.width, round_half_away(box.x2));
    int y1 = std::min(img.height, round_half_away(box.y2));
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            std::uint8_t* p = img.at(x, y);
            p[0] = rgba[0];
            p[1] = rgba[1];
            p[2] = rgba[2];
            p[3] = rgba[3];
        }
}

std::array<std::uint8_t, 4> element_color(std::uint64_t seed, int index) {
    SplitMix64 rng(mix_seed({seed, static_cast<std::uint64_t>(index)}));
    auto channel = [&] { return static_cast<std::uint8_t>(40 + rng.next() % 176); };
    return {channel(), channel(), channel(), 255};
}

} // namespace

GeneratedScreen generate_screen(const SyntheticScreenSpec& spec) {
    auto boxes = element_boxes(spec);
    if (spec.target_index < 0 || static_cast<std::size_t>(spec.target_index) >= boxes.size())
        throw std::invalid_argument("SyntheticScreenSpec: target_index " +
                                    std::to_string(spec.target_index) + " out of range (" +
                                    std::to_string(boxes.size()) + " elements)");

    GeneratedScreen screen;
    screen.image =
        RasterImage::filled(spec.dims.width_px, spec.dims.height_px, {240, 240, 240, 255});
    for (std::size_t i = 0; i < boxes.size(); ++i)
        fill_box(screen.image, boxes[i], element_color(spec.seed, static_cast<int>(i)));

    screen.target = boxes[static_cast<std::size_t>(spec.target_index)];
    for (std::size_t i = 0; i < boxes.size(); ++i)
        if (i != static_cast<std::size_t>(spec.target_index)) screen.distractors.push_back(boxes[i]);
    return screen;
}

const SweepCell& SweepResult::cell(int n, double sigma) const {
    for (const auto& c : cells)
        if (c.n == n && c.sigma == sigma) return c;
    throw std::invalid_argument("SweepResult: no cell for n=" + std::to_string(n) +
                                " sigma=" + std::to_string(sigma));
}

namespace {

struct TrialStats {
    bool hit = false;
    bool lost = false;
    double err = 0.0;
    double dx = 0.0;
    double dy = 0.0;
};

} // namespace

SweepResult run_sweep(const SyntheticScreenSpec& screen_template, const SweepSpec& sweep,
                      const ShrinkPolicy& policy) {
    if (sweep.n_values.empty() || sweep.sigma_values.empty())
        throw std::invalid_argument("run_sweep: n_values and sigma_values must be non-empty");
    if (sweep.trials_per_cell < 1)
        throw std::invalid_argument("run_sweep: trials_per_cell must be >= 1");
    policy.validate();

    SyntheticScreenSpec spec = screen_template;
    spec.target_index = 0;
    const auto boxes = element_boxes(spec);
    const GeneratedScreen screen = generate_screen(spec); // one image for all cells

    SweepResult result;
    result.screen = screen_template;
    result.policy = policy;
    result.spec = sweep;

    for (int n : sweep.n_values) {
        for (double sigma : sweep.sigma_values) {
            if (n < 1) throw std::invalid_argument("run_sweep: n values must be >= 1");
            if (sigma < 0) throw std::invalid_argument("run_sweep: sigma must be >= 0");

            std::vector<TrialStats> trials(static_cast<std::size_t>(sweep.trials_per_cell));
            parallel_for(sweep.trials_per_cell, sweep.workers, [&](int t) {
                const std::uint64_t trial_seed =
                    mix_seed({sweep.base_seed, static_cast<std::uint64_t>(n),
                              double_bits(sigma), static_cast<std::uint64_t>(t)});
                SplitMix64 rng(trial_seed);
                const auto& target_box =
                    boxes[static_cast<std::size_t>(rng.next() % boxes.size())];
                const AbsPoint target = target_box.center();

                NoisyOracleModel model;
                model.sigma = sigma;
                model.seed = rng.next();
                model.out_of_view_policy = sweep.out_of_view_policy;
                OracleBackend backend(model);

                GroundingConfig cfg;
                cfg.iterations_n = n;
                cfg.shrink_policy = policy;
                GroundingTrace trace =
                    ground(screen.image, "synthetic target", backend, cfg, target);

                TrialStats& s = trials[static_cast<std::size_t>(t)];
                s.dx = trace.final_point.x_px - target.x_px;
                s.dy = trace.final_point.y_px - target.y_px;
                s.err = std::hypot(s.dx, s.dy);
                s.hit = sweep.hit_radius_px ? s.err <= *sweep.hit_radius_px
                                            : score_point(trace.final_point, target_box);
                for (const auto& rec : trace.records)
                    if (!rec.viewport_before.contains(target)) s.lost = true;
            });

            // single-owner fold in trial order, so results are byte-stable
            SweepCell cell;
            cell.n = n;
            cell.sigma = sigma;
            cell.trials = sweep.trials_per_cell;
            double err_sum = 0.0, inview_err_sum = 0.0, sq_dx = 0.0, sq_dy = 0.0;
            int hits = 0, lost = 0, inview = 0;
            for (const auto& s : trials) {
                hits += s.hit ? 1 : 0;
                lost += s.lost ? 1 : 0;
                err_sum += s.err;
                if (!s.lost) {
                    ++inview;
                    inview_err_sum += s.err;
                    sq_dx += s.dx * s.dx;
                    sq_dy += s.dy * s.dy;
                }
            }
            cell.accuracy = static_cast<double>(hits) / cell.trials;
            cell.stderr_acc = std::sqrt(cell.accuracy * (1.0 - cell.accuracy) / cell.trials);
            cell.mean_error_px = err_sum / cell.trials;
            cell.lost_target_rate = static_cast<double>(lost) / cell.trials;
            cell.inview_trials = inview;
            if (inview > 0) {
                cell.mean_inview_error_px = inview_err_sum / inview;
                cell.rms_inview_error_x_px = std::sqrt(sq_dx / inview);
                cell.rms_inview_error_y_px = std::sqrt(sq_dy / inview);
            }
            result.cells.push_back(cell);
        }
    }
    return result;
}

std::string sweep_to_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "n,sigma,trials,accuracy,stderr,mean_error_px,lost_target_rate\n";
    char buf[160];
    for (const auto& c : result.cells) {
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%d,%.6f,%.6f,%.6f,%.6f\n", c.n, c.sigma,
                      c.trials, c.accuracy, c.stderr_acc, c.mean_error_px, c.lost_target_rate);
        out << buf;
    }
    return out.str();
}

nlohmann::json sweep_to_json(const SweepResult& result) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : result.cells) {
        cells.push_back({{"n", c.n},
                         {"sigma", c.sigma},
                         {"trials", c.trials},
                         {"accuracy", c.accuracy},
                         {"stderr", c.stderr_acc},
                         {"mean_error_px", c.mean_error_px},
                         {"lost_target_rate", c.lost_target_rate},
                         {"inview_trials", c.inview_trials},
                         {"mean_inview_error_px", c.mean_inview_error_px},
                         {"rms_inview_error_x_px", c.rms_inview_error_x_px},
                         {"rms_inview_error_y_px", c.rms_inview_error_y_px}});
    }
    return nlohmann::json{
        {"error_model",
         "gaussian in viewport-normalized units (error proportional to visible extent); "
         "a modeling hypothesis, not an empirical VLM error profile"},
        {"screen",
         {{"width_px", result.screen.dims.width_px},
          {"height_px", result.screen.dims.height_px},
          {"grid_rows", result.screen.grid_rows},
          {"grid_cols", result.screen.grid_cols},
          {"element_size_px", result.screen.element_size_px},
          {"seed", result.screen.seed}}},
        {"policy",
         {{"landscape_w_factor", result.policy.landscape_w_factor},
          {"landscape_h_factor", result.policy.landscape_h_factor},
          {"portrait_w_factor", result.policy.portrait_w_factor},
          {"portrait_h_factor", result.policy.portrait_h_factor},
          {"min_dim_px", result.policy.min_dim_px}}},
        {"base_seed", result.spec.base_seed},
        {"trials_per_cell", result.spec.trials_per_cell},
        {"hit_criterion", result.spec.hit_radius_px
                              ? nlohmann::json{{"radius_px", *result.spec.hit_radius_px}}
                              : nlohmann::json{{"bbox", true}}},
        {"cells", std::move(cells)}};
}

// ---------------------------------------------------------------------------
// context-loss scenario

namespace {

struct Scene {
    const ContextLossSpec& spec;

    double row_y(int r) const {
        if (!spec.row_centers_y.empty())
            return spec.row_centers_y[static_cast<std::size_t>(r)];
        return spec.dims.height_px * (r + 0.5) / spec.rows;
    }
    bool label_inside(const Viewport& vp, int r) const {
        double x0 = spec.label_center_x - spec.label_w_px / 2;
        double x1 = spec.label_center_x + spec.label_w_px / 2;
        double y0 = row_y(r) - spec.label_h_px / 2;
        double y1 = row_y(r) + spec.label_h_px / 2;
        return vp.origin_x_px <= x0 && x1 <= vp.origin_x_px + vp.width_px &&
               vp.origin_y_px <= y0 && y1 <= vp.origin_y_px + vp.height_px;
    }
    std::vector<int> visible_buttons(const Viewport& vp) const {
        std::vector<int> out;
        for (int b = 0; b < spec.rows; ++b)
            if (vp.contains(AbsPoint{spec.button_x, row_y(b)})) out.push_back(b);
        return out;
    }
};

struct VpKey {
    int ox, oy, w, h;
    bool operator<(const VpKey& o) const {
        return std::tie(ox, oy, w, h) < std::tie(o.ox, o.oy, o.w, o.h);
    }
};

} // namespace

ContextLossReport run_context_loss_scenario(const ShrinkPolicy& policy,
                                            const ContextLossSpec& spec) {
    policy.validate();
    if (spec.rows < 1 || spec.n_values.empty())
        throw std::invalid_argument("ContextLossSpec: rows >= 1 and n_values non-empty required");
    if (!spec.row_centers_y.empty() &&
        spec.row_centers_y.size() != static_cast<std::size_t>(spec.rows))
        throw std::invalid_argument("ContextLossSpec: row_centers_y must match rows");

    const Scene scene{spec};
    const Orientation orient = orientation_of(spec.dims);
    const Viewport full{0, 0, spec.dims.width_px, spec.dims.height_px};

    ContextLossReport report;
    report.spec = spec;

    const int max_n = *std::max_element(spec.n_values.begin(), spec.n_values.end());

    // label-exit iteration per target row, along the correct-answer path
    report.label_exit_iteration.resize(static_cast<std::size_t>(spec.rows), 0);
    for (int r = 0; r < spec.rows; ++r) {
        Viewport vp = full;
        for (int k = 1; k <= max_n; ++k) {
            if (!scene.label_inside(vp, r)) {
                report.label_exit_iteration[static_cast<std::size_t>(r)] = k;
                break;
            }
            auto [w, h] = shrink_dims(vp.width_px, vp.height_px, orient, policy);
            vp = center_window(AbsPoint{spec.button_x, scene.row_y(r)}, w, h, spec.dims);
        }
    }

    for (int n : spec.n_values) {
        if (n < 1) throw std::invalid_argument("context-loss scenario: n values must be >= 1");
        double hit_sum = 0.0;
        for (int target = 0; target < spec.rows; ++target) {
            // distribution over viewports; the final iteration resolves to a
            // distribution over answered buttons
            std::map<VpKey, double> states{{{0, 0, spec.dims.width_px, spec.dims.height_px}, 1.0}};
            double hit_prob = 0.0;
            for (int k = 1; k <= n; ++k) {
                std::map<VpKey, double> next;
                for (const auto& [key, prob] : states) {
                    Viewport vp{key.ox, key.oy, key.w, key.h};
                    std::vector<std::pair<int, double>> picks;
                    if (scene.label_inside(vp, target)) {
                        picks.emplace_back(target, prob);
                    } else {
                        auto vis = scene.visible_buttons(vp);
                        for (int b : vis)
                            picks.emplace_back(b, prob / static_cast<double>(vis.size()));
                    }
                    for (auto [b, p] : picks) {
                        if (k == n) {
                            if (b == target) hit_prob += p;
                        } else {
                            auto [w, h] =
                                shrink_dims(vp.width_px, vp.height_px, orient, policy);
                            Viewport nv = center_window(AbsPoint{spec.button_x, scene.row_y(b)},
                                                        w, h, spec.dims);
                            next[VpKey{nv.origin_x_px, nv.origin_y_px, nv.width_px,
                                       nv.height_px}] += p;
                        }
                    }
                }
                states = std::move(next);
            }
            hit_sum += hit_prob;
        }
        ContextLossRow row;
        row.n = n;
        row.hit_rate = hit_sum / spec.rows;
        row.miss_rate = 1.0 - row.hit_rate;
        report.rows.push_back(row);
    }
    return report;
}

nlohmann::json context_loss_to_json(const ContextLossReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"n", r.n}, {"hit_rate", r.hit_rate}, {"miss_rate", r.miss_rate}});
    return nlohmann::json{
        {"scenario",
         "identical buttons disambiguated by distant row labels; oracle answers correctly "
         "only while the target's label is inside the viewport, otherwise picks uniformly "
         "among in-view buttons (exact enumeration)"},
        {"dims", {report.spec.dims.width_px, report.spec.dims.height_px}},
        {"rows", report.spec.rows},
        {"button_x", report.spec.button_x},
        {"label_center_x", report.spec.label_center_x},
        {"label_exit_iteration", report.label_exit_iteration},
        {"miss_by_n", std::move(rows)}};
}

RasterImage render_context_scene(const ContextLossSpec& spec) {
    RasterImage img =
        RasterImage::filled(spec.dims.width_px, spec.dims.height_px, {245, 245, 245, 255});
    const Scene scene{spec};
    for (int r = 0; r < spec.rows; ++r) {
        double y = scene.row_y(r);
        fill_box(img,
                 BBox{spec.label_center_x - spec.label_w_px / 2, y - spec.label_h_px / 2,
                      spec.label_center_x + spec.label_w_px / 2, y + spec.label_h_px / 2},
                 element_color(7, r)); // labels differ per row
        fill_box(img,
                 BBox{spec.button_x - spec.button_size_px / 2, y - spec.button_size_px / 2,
                      spec.button_x + spec.button_size_px / 2, y + spec.button_size_px / 2},
                 {70, 110, 220, 255}); // buttons identical
    }
    return img;
}

} // namespace iterground
