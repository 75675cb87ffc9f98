// SPDX-License-Identifier: Apache-2.0
//
// iterground: single-query grounding, benchmark runs, simulations, rendering.
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "iterground/cache.hpp"
#include "iterground/errors.hpp"
#include "iterground/harness.hpp"
#include "iterground/pipeline.hpp"
#include "iterground/remote.hpp"
#include "iterground/render.hpp"
#include "iterground/simlab.hpp"

namespace ig = iterground;
namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitBackend = 3;
constexpr int kExitGeometry = 4;

struct GlobalOpts {
    std::string out_dir = "runs";
    std::string run_id;
    std::uint64_t seed = 1;
    bool verbose = false;
};

struct BackendOpts {
    std::string kind; // remote | oracle | scripted
    // remote
    std::string endpoint;
    std::string model = "default";
    std::string api_key;
    std::string prompt_template = ig::kDefaultPromptTemplate;
    std::string scale = "unit";
    int retries = 2;
    int timeout_ms = 30000;
    double temperature = 0.0;
    int max_inflight = 4;
    std::string cache_dir;
    // oracle
    std::string target; // "x,y"
    double sigma = 0.0;
    std::string oov_policy = "clamp";
    // scripted
    std::vector<std::string> script;
};

void add_backend_flags(CLI::App* cmd, BackendOpts& b, bool allow_oracle_target) {
    cmd->add_option("--backend", b.kind, "Backend: remote, oracle or scripted");
    cmd->add_option("--endpoint", b.endpoint, "OpenAI-compatible base URL, e.g. http://host:8000/v1");
    cmd->add_option("--model", b.model, "Model name sent in requests");
    cmd->add_option("--api-key", b.api_key, "API key (falls back to $ITERGROUND_API_KEY)")
        ->envname("ITERGROUND_API_KEY");
    cmd->add_option("--prompt-template", b.prompt_template,
                    "Prompt with a single {query} placeholder");
    cmd->add_option("--scale", b.scale, "Reply coordinate scale: unit, percent, thousand, pixel");
    cmd->add_option("--retries", b.retries, "Retries on transport or parse failure");
    cmd->add_option("--timeout-ms", b.timeout_ms, "Per-request timeout");
    cmd->add_option("--temperature", b.temperature, "Sampling temperature");
    cmd->add_option("--max-inflight", b.max_inflight, "Max concurrent requests");
    cmd->add_option("--cache-dir", b.cache_dir,
                    "Response cache directory (falls back to $ITERGROUND_CACHE_DIR)")
        ->envname("ITERGROUND_CACHE_DIR");
    if (allow_oracle_target)
        cmd->add_option("--target", b.target, "Oracle ground truth as X,Y pixels");
    cmd->add_option("--sigma", b.sigma, "Oracle noise (viewport-normalized units)");
    cmd->add_option("--oov-policy", b.oov_policy, "Oracle out-of-view policy: clamp or uniform");
    cmd->add_option("--script", b.script, "Scripted replies, one per iteration");
}

std::optional<ig::AbsPoint> parse_target(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double x, y;
    if (std::sscanf(s.c_str(), "%lf,%lf", &x, &y) != 2)
        throw CLI::ValidationError("--target", "expected X,Y");
    return ig::AbsPoint{x, y};
}

std::unique_ptr<ig::GroundingBackend> make_backend(const BackendOpts& b, std::uint64_t seed) {
    std::string kind = b.kind;
    if (kind.empty()) { // infer from the flags that were set
        if (!b.endpoint.empty())
            kind = "remote";
        else if (!b.script.empty())
            kind = "scripted";
        else if (!b.target.empty() || b.sigma > 0.0)
            kind = "oracle";
        else
            throw CLI::ValidationError("--backend",
                                       "select a backend (or set --endpoint/--script/--target)");
    }
    if (kind == "remote") {
        ig::RemoteBackendConfig cfg;
        cfg.endpoint_url = b.endpoint;
        cfg.model_name = b.model;
        cfg.api_key = b.api_key;
        cfg.prompt_template = b.prompt_template;
        cfg.coordinate_scale = ig::coordinate_scale_from_string(b.scale);
        cfg.max_retries = b.retries;
        cfg.request_timeout_ms = b.timeout_ms;
        cfg.temperature = b.temperature;
        cfg.max_inflight_requests = b.max_inflight;
        std::optional<fs::path> cache;
        if (!b.cache_dir.empty()) cache = b.cache_dir;
        return std::make_unique<ig::RemoteBackend>(cfg, cache);
    }
    if (kind == "oracle") {
        ig::NoisyOracleModel model;
        model.sigma = b.sigma;
        model.seed = seed;
        model.out_of_view_policy =
            b.oov_policy == "uniform" ? ig::NoisyOracleModel::OutOfViewPolicy::UniformRandom
                                      : ig::NoisyOracleModel::OutOfViewPolicy::ClampToEdge;
        return std::make_unique<ig::OracleBackend>(model);
    }
    if (kind == "scripted")
        return std::make_unique<ig::ScriptedBackend>(b.script,
                                                     ig::coordinate_scale_from_string(b.scale));
    throw CLI::ValidationError("--backend", "unknown backend: " + kind);
}

std::string config_hash8(const nlohmann::json& snapshot) {
    // reuse the content hash; a 1x1 image carries the bytes
    ig::RasterImage probe;
    probe.width = 1;
    probe.height = 1;
    probe.pixels = {0, 0, 0, 0};
    return ig::cache_key(probe, snapshot.dump(), "run").substr(0, 8);
}

fs::path make_run_dir(const GlobalOpts& g, const nlohmann::json& config_snapshot) {
    fs::path dir;
    if (!g.run_id.empty()) {
        dir = fs::path(g.out_dir) / g.run_id;
    } else {
        auto now = std::chrono::system_clock::now();
        std::time_t t = std::chrono::system_clock::to_time_t(now);
        std::tm tm{};
        gmtime_r(&t, &tm);
        char ts[32];
        std::strftime(ts, sizeof(ts), "%Y%m%d-%H%M%S", &tm);
        dir = fs::path(g.out_dir) / (std::string(ts) + "-" + config_hash8(config_snapshot));
    }
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ig::IoError("cannot write " + path.string());
    out << text;
}

ig::RenderStyle style_from_flags(const std::string& cross_hex, const std::string& box_hex,
                                 int cross_size, int stroke, bool labels) {
    auto parse_color = [](const std::string& hex) {
        if (hex.size() != 6 && hex.size() != 8)
            throw CLI::ValidationError("--color", "expected RRGGBB or RRGGBBAA");
        auto byte = [&](int i) {
            return static_cast<std::uint8_t>(std::stoul(hex.substr(i, 2), nullptr, 16));
        };
        ig::Rgba c{byte(0), byte(2), byte(4), 255};
        if (hex.size() == 8) c.a = byte(6);
        return c;
    };
    ig::RenderStyle style;
    style.cross_color = parse_color(cross_hex);
    style.box_color = parse_color(box_hex);
    style.cross_size_px = cross_size;
    style.stroke_px = stroke;
    style.label_iterations = labels;
    return style;
}

// ---------------------------------------------------------------- ground

struct GroundArgs {
    std::string image_path;
    std::string query;
    int n = 3;
    int min_dim = 28;
    bool render = false;
    bool record_crops = false;
    BackendOpts backend;
};

int cmd_ground(const GlobalOpts& g, const GroundArgs& a) {
    ig::RasterImage image = ig::load_png(a.image_path);

    ig::GroundingConfig cfg;
    cfg.iterations_n = a.n;
    cfg.shrink_policy.min_dim_px = a.min_dim;
    cfg.record_crops = a.record_crops;

    auto backend = make_backend(a.backend, g.seed);
    auto target = parse_target(a.backend.target);

    nlohmann::json snapshot{{"cmd", "ground"}, {"image", a.image_path}, {"query", a.query},
                            {"n", a.n},        {"seed", g.seed},        {"backend", backend->name()}};
    fs::path run_dir = make_run_dir(g, snapshot);

    ig::GroundingTrace trace = ig::ground(image, a.query, *backend, cfg, target, a.image_path);

    fs::path trace_path = run_dir / "trace.json";
    write_text(trace_path, ig::trace_to_json(trace).dump(2) + "\n");
    if (a.record_crops) {
        fs::create_directories(run_dir / "crops");
        char name[32];
        for (const auto& rec : trace.records) {
            if (!rec.crop) continue;
            std::snprintf(name, sizeof(name), "crop_%02d.png", rec.iteration_index);
            ig::save_png(*rec.crop, run_dir / "crops" / name);
        }
    }
    if (a.render) {
        ig::RenderStyle style;
        ig::save_png(ig::render_trace(image, trace, style), run_dir / "overlay.png");
        ig::save_png(ig::render_iteration_strip(image, trace, style), run_dir / "strip.png");
    }

    std::printf("%d %d\n", ig::round_half_away(trace.final_point.x_px),
                ig::round_half_away(trace.final_point.y_px));
    std::printf("trace: %s\n", trace_path.c_str());
    return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
    std::string manifest;
    std::string bbox_convention = "xyxy";
    int n = 3;
    int min_dim = 28;
    int workers = 4;
    bool no_baseline = false;
    std::string label;
    BackendOpts backend;
};

int cmd_bench(const GlobalOpts& g, const BenchArgs& a) {
    auto convention = a.bbox_convention == "xywh" ? ig::BBoxConvention::XYWH
                                                  : ig::BBoxConvention::XYXY;
    auto examples = ig::load_dataset(a.manifest, convention);
    auto backend = make_backend(a.backend, g.seed);

    ig::BenchOptions options;
    options.ours.iterations_n = a.n;
    options.ours.shrink_policy.min_dim_px = a.min_dim;
    options.run_baseline = !a.no_baseline;
    options.workers = a.workers;
    options.label = a.label;

    nlohmann::json snapshot{{"cmd", "bench"},   {"manifest", a.manifest}, {"n", a.n},
                            {"seed", g.seed},   {"backend", backend->name()},
                            {"workers", a.workers}};
    fs::path run_dir = make_run_dir(g, snapshot);

    ig::BenchRun run = ig::run_benchmark(examples, *backend, options);

    std::ostringstream outcomes;
    for (std::size_t i = 0; i < run.outcomes_ours.size(); ++i) {
        nlohmann::json line = ig::outcome_to_json(run.outcomes_ours[i]);
        line["method"] = "ours";
        outcomes << line.dump() << "\n";
        if (options.run_baseline) {
            nlohmann::json base = ig::outcome_to_json(run.outcomes_baseline[i]);
            base["method"] = "baseline";
            outcomes << base.dump() << "\n";
        }
    }
    write_text(run_dir / "outcomes.jsonl", outcomes.str());
    write_text(run_dir / "report.json", ig::emit_report(run.report, ig::ReportFormat::Json));
    std::string md = ig::emit_report(run.report, ig::ReportFormat::MarkdownTable);
    write_text(run_dir / "report.md", md);
    std::fputs(md.c_str(), stdout);
    std::printf("\nreport: %s\n", (run_dir / "report.json").c_str());
    return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::vector<int> n_values{1, 2, 3};
    std::vector<double> sigma_values{0.05};
    int trials = 2000;
    int width = 1024, height = 512;
    int rows = 8, cols = 16;
    int element_size = 32;
    double hit_radius = 0.0;
    int workers = 4;
    std::string scenario = "sweep"; // sweep | context-loss | both
};

int cmd_simulate(const GlobalOpts& g, const SimulateArgs& a) {
    nlohmann::json snapshot{{"cmd", "simulate"}, {"scenario", a.scenario}, {"seed", g.seed},
                            {"trials", a.trials}, {"n", a.n_values}, {"sigma", a.sigma_values}};
    fs::path run_dir = make_run_dir(g, snapshot);

    if (a.scenario == "sweep" || a.scenario == "both") {
        ig::SyntheticScreenSpec screen;
        screen.dims = ig::ImageDims(a.width, a.height);
        screen.grid_rows = a.rows;
        screen.grid_cols = a.cols;
        screen.element_size_px = a.element_size;
        screen.seed = g.seed;

        ig::SweepSpec sweep;
        sweep.n_values = a.n_values;
        sweep.sigma_values = a.sigma_values;
        sweep.trials_per_cell = a.trials;
        if (a.hit_radius > 0.0) sweep.hit_radius_px = a.hit_radius;
        sweep.base_seed = g.seed;
        sweep.workers = a.workers;

        ig::SweepResult result = ig::run_sweep(screen, sweep, ig::ShrinkPolicy{});
        std::string csv = ig::sweep_to_csv(result);
        write_text(run_dir / "sweep.csv", csv);
        write_text(run_dir / "sweep.json", ig::sweep_to_json(result).dump(2) + "\n");
        std::fputs(csv.c_str(), stdout);
    }

    if (a.scenario == "context-loss" || a.scenario == "both") {
        ig::ContextLossSpec spec;
        spec.n_values = a.n_values;
        ig::ContextLossReport report = ig::run_context_loss_scenario(ig::ShrinkPolicy{}, spec);
        write_text(run_dir / "context_loss.json",
                   ig::context_loss_to_json(report).dump(2) + "\n");
        std::printf("n,hit_rate,miss_rate\n");
        for (const auto& row : report.rows)
            std::printf("%d,%.6f,%.6f\n", row.n, row.hit_rate, row.miss_rate);
    }

    if (a.scenario != "sweep" && a.scenario != "context-loss" && a.scenario != "both")
        throw CLI::ValidationError("--scenario", "expected sweep, context-loss or both");

    std::printf("outputs: %s\n", run_dir.c_str());
    return 0;
}

// ---------------------------------------------------------------- render

struct RenderArgs {
    std::string trace_path;
    std::string image_path;
    bool strip = false;
    std::string cross_color = "DC1E1E";
    std::string box_color = "DC1E1E";
    int cross_size = 24;
    int stroke = 3;
    bool no_labels = false;
};

int cmd_render(const GlobalOpts& g, const RenderArgs& a) {
    std::ifstream in(a.trace_path);
    if (!in) throw ig::IoError("cannot open trace: " + a.trace_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ig::IoError("malformed trace JSON: " + std::string(e.what()));
    }
    ig::GroundingTrace trace = ig::trace_from_json(j);
    ig::RasterImage image = ig::load_png(a.image_path);

    ig::RenderStyle style = style_from_flags(a.cross_color, a.box_color, a.cross_size, a.stroke,
                                             !a.no_labels);

    nlohmann::json snapshot{{"cmd", "render"}, {"trace", a.trace_path}, {"image", a.image_path}};
    fs::path run_dir = make_run_dir(g, snapshot);

    ig::save_png(ig::render_trace(image, trace, style), run_dir / "overlay.png");
    if (a.strip)
        ig::save_png(ig::render_iteration_strip(image, trace, style), run_dir / "strip.png");
    std::printf("overlay: %s\n", (run_dir / "overlay.png").c_str());
    return 0;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Iterative-narrowing GUI grounding"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML config file; flags override file values");

    GlobalOpts global;
    app.add_option("--out", global.out_dir, "Output root; runs go in timestamped subdirectories");
    app.add_option("--run-id", global.run_id, "Fixed run directory name (overrides timestamping)");
    app.add_option("--seed", global.seed, "Seed for oracle backends and simulations");
    app.add_flag("--verbose", global.verbose, "Verbose diagnostics");

    GroundArgs ground_args;
    auto* ground = app.add_subcommand("ground", "Ground one query against one screenshot");
    ground->add_option("image", ground_args.image_path, "Screenshot PNG")->required();
    ground->add_option("query", ground_args.query, "Element description")->required();
    ground->add_option("--n", ground_args.n, "Number of narrowing iterations")
        ->check(CLI::PositiveNumber);
    ground->add_option("--min-dim", ground_args.min_dim, "Window dimension floor, px");
    ground->add_flag("--render", ground_args.render, "Write overlay and strip PNGs");
    ground->add_flag("--record-crops", ground_args.record_crops, "Write per-iteration crops");
    add_backend_flags(ground, ground_args.backend, true);

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Run a ScreenSpot-style benchmark manifest");
    bench->add_option("manifest", bench_args.manifest, "JSONL manifest")->required();
    bench->add_option("--bbox-convention", bench_args.bbox_convention, "xyxy or xywh");
    bench->add_option("--n", bench_args.n, "Iterations for the ours column")
        ->check(CLI::PositiveNumber);
    bench->add_option("--min-dim", bench_args.min_dim, "Window dimension floor, px");
    bench->add_option("--workers", bench_args.workers, "Concurrent examples")
        ->check(CLI::PositiveNumber);
    bench->add_flag("--no-baseline", bench_args.no_baseline, "Skip the n=1 baseline pass");
    bench->add_option("--label", bench_args.label, "Row label in report tables");
    add_backend_flags(bench, bench_args.backend, false);

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo sweeps and failure scenarios");
    simulate->add_option("--n", sim_args.n_values, "Iteration counts to sweep")
        ->delimiter(',');
    simulate->add_option("--sigma", sim_args.sigma_values, "Oracle noise levels to sweep")
        ->delimiter(',');
    simulate->add_option("--trials", sim_args.trials, "Trials per (n, sigma) cell")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--width", sim_args.width, "Synthetic screen width");
    simulate->add_option("--height", sim_args.height, "Synthetic screen height");
    simulate->add_option("--rows", sim_args.rows, "Element grid rows");
    simulate->add_option("--cols", sim_args.cols, "Element grid columns");
    simulate->add_option("--element-size", sim_args.element_size, "Element size, px");
    simulate->add_option("--hit-radius", sim_args.hit_radius,
                         "Hit radius in px (default: target bbox containment)");
    simulate->add_option("--workers", sim_args.workers, "Concurrent trials");
    simulate->add_option("--scenario", sim_args.scenario, "sweep, context-loss or both");

    RenderArgs render_args;
    auto* render = app.add_subcommand("render", "Render a trace over its screenshot");
    render->add_option("trace", render_args.trace_path, "Trace JSON")->required();
    render->add_option("image", render_args.image_path, "Screenshot PNG")->required();
    render->add_flag("--strip", render_args.strip, "Also write the per-iteration strip");
    render->add_option("--cross-color", render_args.cross_color, "Cross color, RRGGBB[AA]");
    render->add_option("--box-color", render_args.box_color, "Box color, RRGGBB[AA]");
    render->add_option("--cross-size", render_args.cross_size, "Cross size, px");
    render->add_option("--stroke", render_args.stroke, "Stroke width, px");
    render->add_flag("--no-labels", render_args.no_labels, "Disable iteration labels");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (ground->parsed()) return cmd_ground(global, ground_args);
    if (bench->parsed()) return cmd_bench(global, bench_args);
    if (simulate->parsed()) return cmd_simulate(global, sim_args);
    if (render->parsed()) return cmd_render(global, render_args);
    return kExitUsage;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const ig::GeometryDegenerate& e) {
        std::fprintf(stderr, "geometry error: %s\n", e.what());
        return kExitGeometry;
    } catch (const ig::DimsMismatch& e) {
        std::fprintf(stderr, "geometry error: %s\n", e.what());
        return kExitGeometry;
    } catch (const ig::ViewportOutOfBounds& e) {
        std::fprintf(stderr, "geometry error: %s\n", e.what());
        return kExitGeometry;
    } catch (const ig::BackendFailure& e) {
        std::fprintf(stderr, "backend error: %s\n", e.what());
        return kExitBackend;
    } catch (const ig::BackendUnavailable& e) {
        std::fprintf(stderr, "backend error: %s\n", e.what());
        return kExitBackend;
    } catch (const ig::Timeout& e) {
        std::fprintf(stderr, "backend error: %s\n", e.what());
        return kExitBackend;
    } catch (const ig::UnparseableReply& e) {
        std::fprintf(stderr, "backend error: %s\n", e.what());
        return kExitBackend;
    } catch (const ig::ManifestError& e) {
        std::fprintf(stderr, "manifest error: %s\n", e.what());
        return kExitIo;
    } catch (const ig::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }
}
