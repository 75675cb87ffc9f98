// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks of the command-line surface: exit codes, printed output,
// files written under the run directory.
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "fixtures.hpp"
#include "iterground/pipeline.hpp"

using namespace iterground;
using igtest::TempDir;

#ifndef ITERGROUND_CLI_PATH
#error "ITERGROUND_CLI_PATH must be defined by the build"
#endif

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    std::string cmd = std::string(ITERGROUND_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult result;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) result.out.append(buf, n);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("cli ground: scripted happy path prints the point and writes a trace") {
    TempDir tmp("cli_ground");
    SyntheticScreenSpec spec;
    spec.dims = ImageDims(320, 160);
    save_png(generate_screen(spec).image, tmp.path / "shot.png");

    CliResult r = run_cli("--out " + (tmp.path / "runs").string() + " --run-id r1 ground " +
                          (tmp.path / "shot.png").string() +
                          " \"the icon\" --n 3 --backend scripted"
                          " --script \"(0.5,0.5)\" --script \"(0.5,0.5)\" --script \"(0.5,0.5)\"");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("160 80") != std::string::npos);
    CHECK(std::filesystem::exists(tmp.path / "runs" / "r1" / "trace.json"));
}

TEST_CASE("cli ground: oracle round trip prints the target back") {
    TempDir tmp("cli_oracle");
    SyntheticScreenSpec spec;
    spec.dims = ImageDims(320, 160);
    save_png(generate_screen(spec).image, tmp.path / "shot.png");

    CliResult r = run_cli("--out " + (tmp.path / "runs").string() + " --run-id r1 ground " +
                          (tmp.path / "shot.png").string() +
                          " q --backend oracle --target 120,80 --sigma 0");
    CHECK(r.exit_code == 0);
    CHECK(r.out.rfind("120 80\n", 0) == 0);
}

TEST_CASE("cli ground: --n 0 is a usage error") {
    CliResult r = run_cli("ground shot.png q --n 0 --backend scripted --script x");
    CHECK(r.exit_code == 1);
}

TEST_CASE("cli ground: unknown flags are errors") {
    CliResult r = run_cli("ground shot.png q --definitely-not-a-flag");
    CHECK(r.exit_code == 1);
}

TEST_CASE("cli ground: missing image is an i/o error") {
    TempDir tmp("cli_noimg");
    CliResult r = run_cli("--out " + (tmp.path / "runs").string() + " ground " +
                          (tmp.path / "gone.png").string() + " q --backend oracle --target 1,1");
    CHECK(r.exit_code == 2);
}

TEST_CASE("cli bench: zero-noise oracle fixture scores 100 everywhere; reruns are identical") {
    TempDir tmp("cli_bench");
    auto manifest = igtest::write_dataset(
        tmp.path / "data",
        {{"mobile", "text", 2}, {"desktop", "icon", 2}, {"web", "text", 2}});

    std::string base = "--out " + (tmp.path / "runs").string() + " --seed 5 bench " +
                       manifest.string() + " --n 3 --workers 2 --backend oracle --sigma 0";
    CliResult r1 = run_cli(base + " --run-id a");
    CHECK(r1.exit_code == 0);
    CHECK(r1.out.find("100.00") != std::string::npos);
    CHECK(std::filesystem::exists(tmp.path / "runs" / "a" / "report.json"));
    CHECK(std::filesystem::exists(tmp.path / "runs" / "a" / "report.md"));
    CHECK(std::filesystem::exists(tmp.path / "runs" / "a" / "outcomes.jsonl"));

    CliResult r2 = run_cli(base + " --run-id b");
    CHECK(r2.exit_code == 0);
    CHECK(slurp(tmp.path / "runs" / "a" / "report.json") ==
          slurp(tmp.path / "runs" / "b" / "report.json"));
    CHECK(slurp(tmp.path / "runs" / "a" / "outcomes.jsonl") ==
          slurp(tmp.path / "runs" / "b" / "outcomes.jsonl"));
}

TEST_CASE("cli bench: --n 1 makes the ours column equal the baseline column") {
    TempDir tmp("cli_bench_n1");
    auto manifest = igtest::write_dataset(tmp.path / "data", {{"web", "text", 3}});
    CliResult r = run_cli("--out " + (tmp.path / "runs").string() + " --run-id a --seed 3 bench " +
                          manifest.string() + " --n 1 --backend oracle --sigma 0.25");
    CHECK(r.exit_code == 0);
    auto report = nlohmann::json::parse(slurp(tmp.path / "runs" / "a" / "report.json"));
    CHECK(report.at("cells").at("web").at("text").at("ours") ==
          report.at("cells").at("web").at("text").at("baseline"));
}

TEST_CASE("cli bench: missing manifest exits 2") {
    CliResult r = run_cli("bench /definitely/missing.jsonl --backend oracle");
    CHECK(r.exit_code == 2);
}

TEST_CASE("cli simulate: sweep shape and byte-identical reruns") {
    TempDir tmp("cli_sim");
    std::string base = "--out " + (tmp.path / "runs").string() +
                       " --seed 7 simulate --n 1,2,3,4 --sigma 0.02,0.05,0.1 --trials 50"
                       " --width 256 --height 128 --rows 2 --cols 4 --element-size 16"
                       " --workers 2";
    CliResult r1 = run_cli(base + " --run-id a");
    CHECK(r1.exit_code == 0);
    std::string csv = slurp(tmp.path / "runs" / "a" / "sweep.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 13); // header + 12 cells

    CliResult r2 = run_cli(base + " --run-id b");
    CHECK(csv == slurp(tmp.path / "runs" / "b" / "sweep.csv"));
}

TEST_CASE("cli simulate: context-loss table is non-decreasing in n") {
    TempDir tmp("cli_ctx");
    CliResult r = run_cli("--out " + (tmp.path / "runs").string() +
                          " --run-id a simulate --scenario context-loss --n 1,2,3,4");
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(slurp(tmp.path / "runs" / "a" / "context_loss.json"));
    double prev = -1.0;
    for (const auto& row : j.at("miss_by_n")) {
        double miss = row.at("miss_rate").get<double>();
        CHECK(miss >= prev - 1e-12);
        prev = miss;
    }
}

TEST_CASE("cli render: writes overlay and strip, reruns are byte-identical, dims checked") {
    TempDir tmp("cli_render");
    SyntheticScreenSpec spec;
    spec.dims = ImageDims(320, 160);
    RasterImage image = generate_screen(spec).image;
    save_png(image, tmp.path / "shot.png");

    ScriptedBackend backend({"(0.4,0.6)", "(0.5,0.5)"});
    GroundingConfig cfg;
    cfg.iterations_n = 2;
    GroundingTrace trace = ground(image, "q", backend, cfg, std::nullopt, "shot.png");
    {
        std::ofstream out(tmp.path / "trace.json");
        out << trace_to_json(trace).dump(2) << "\n";
    }

    std::string base = "--out " + (tmp.path / "runs").string() + " render " +
                       (tmp.path / "trace.json").string() + " " +
                       (tmp.path / "shot.png").string() + " --strip";
    CliResult r1 = run_cli(base + " --run-id a");
    CHECK(r1.exit_code == 0);
    CHECK(std::filesystem::exists(tmp.path / "runs" / "a" / "overlay.png"));
    CHECK(std::filesystem::exists(tmp.path / "runs" / "a" / "strip.png"));

    CliResult r2 = run_cli(base + " --run-id a"); // overwrite in place
    CHECK(r2.exit_code == 0);
    CliResult r3 = run_cli(base + " --run-id b");
    CHECK(slurp(tmp.path / "runs" / "a" / "overlay.png") ==
          slurp(tmp.path / "runs" / "b" / "overlay.png"));

    // image with the wrong dimensions
    save_png(RasterImage::filled(100, 100, {0, 0, 0, 255}), tmp.path / "wrong.png");
    CliResult r4 = run_cli("--out " + (tmp.path / "runs").string() + " render " +
                           (tmp.path / "trace.json").string() + " " +
                           (tmp.path / "wrong.png").string());
    CHECK(r4.exit_code == 4);
}

TEST_CASE("cli: every subcommand documents its flags") {
    for (const char* sub : {"ground", "bench", "simulate", "render"}) {
        CliResult r = run_cli(std::string(sub) + " --help");
        CHECK(r.exit_code == 0);
        CHECK(r.out.find("--help") != std::string::npos);
    }
}
