// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "iterground/errors.hpp"
#include "iterground/harness.hpp"

using namespace iterground;
using igtest::FixtureSpec;
using igtest::TempDir;

TEST_CASE("score_point: interior, closed boundary, outside") {
    BBox box{0, 0, 100, 100};
    CHECK(score_point(AbsPoint{50, 50}, box));
    CHECK(score_point(AbsPoint{100, 100}, box));
    CHECK(!score_point(AbsPoint{100.5, 50}, box));
}

TEST_CASE("load_dataset: conventions, synonyms, and error paths") {
    TempDir tmp("manifest");
    SyntheticScreenSpec spec;
    spec.dims = ImageDims(320, 160);
    spec.grid_rows = 2;
    spec.grid_cols = 4;
    spec.element_size_px = 24;
    save_png(generate_screen(spec).image, tmp.path / "a.png");

    auto write = [&](const std::string& body) {
        std::ofstream out(tmp.path / "m.jsonl");
        out << body;
        return tmp.path / "m.jsonl";
    };

    SUBCASE("xywh converts to corners") {
        auto path = write(R"({"id":"e1","image":"a.png","instruction":"x","bbox":[10,20,110,70],"platform":"web","element_type":"text"})"
                          "\n");
        auto examples = load_dataset(path, BBoxConvention::XYWH);
        REQUIRE(examples.size() == 1);
        CHECK(examples[0].bbox == BBox{10, 20, 120, 90});
    }

    SUBCASE("xyxy is the identity") {
        auto path = write(R"({"id":"e1","image":"a.png","instruction":"x","bbox":[10,20,120,90],"platform":"web","element_type":"text"})"
                          "\n");
        auto examples = load_dataset(path, BBoxConvention::XYXY);
        CHECK(examples[0].bbox == BBox{10, 20, 120, 90});
    }

    SUBCASE("screenspot-style field names are accepted") {
        auto path = write(R"({"img_filename":"a.png","instruction":"x","bbox":[1,2,30,40],"data_source":"ios","data_type":"icon"})"
                          "\n");
        auto examples = load_dataset(path, BBoxConvention::XYXY);
        REQUIRE(examples.size() == 1);
        CHECK(examples[0].platform == Platform::Mobile);
        CHECK(examples[0].element_type == ElementType::Icon);
    }

    SUBCASE("degenerate bbox rejected") {
        auto path = write(R"({"id":"e1","image":"a.png","instruction":"x","bbox":[10,20,10,90],"platform":"web","element_type":"text"})"
                          "\n");
        CHECK_THROWS_AS(load_dataset(path, BBoxConvention::XYXY), DegenerateBBox);
    }

    SUBCASE("missing fields carry the line number") {
        auto path = write("{\"id\":\"ok\",\"image\":\"a.png\",\"instruction\":\"x\",\"bbox\":[1,2,3,4],"
                          "\"platform\":\"web\",\"element_type\":\"text\"}\n"
                          "{\"id\":\"bad\"}\n");
        try {
            load_dataset(path, BBoxConvention::XYXY);
            FAIL("expected MalformedRecord");
        } catch (const MalformedRecord& e) {
            CHECK(e.line == 2);
        }
    }

    SUBCASE("missing image file") {
        auto path = write(R"({"id":"e1","image":"gone.png","instruction":"x","bbox":[1,2,3,4],"platform":"web","element_type":"text"})"
                          "\n");
        CHECK_THROWS_AS(load_dataset(path, BBoxConvention::XYXY), ImageMissing);
    }

    SUBCASE("missing manifest") {
        CHECK_THROWS_AS(load_dataset(tmp.path / "nope.jsonl", BBoxConvention::XYXY),
                        ManifestNotFound);
    }
}

namespace {

BenchRun run_fixture(GroundingBackend& backend, int n, int workers = 2) {
    static TempDir tmp("bench_fixture");
    static std::filesystem::path manifest = igtest::write_dataset(
        tmp.path / "data", {{"mobile", "text", 2}, {"desktop", "icon", 2}, {"web", "text", 2}});
    auto examples = load_dataset(manifest, BBoxConvention::XYXY);
    BenchOptions options;
    options.ours.iterations_n = n;
    options.workers = workers;
    return run_benchmark(examples, backend, options);
}

} // namespace

TEST_CASE("perfect oracle scores 1.0 in every populated cell") {
    NoisyOracleModel model; // sigma 0
    OracleBackend backend(model);
    BenchRun run = run_fixture(backend, 3);
    CHECK(run.report.cell(Platform::Mobile, ElementType::Text, true) == CellStats{2, 2});
    CHECK(run.report.cell(Platform::Desktop, ElementType::Icon, true) == CellStats{2, 2});
    CHECK(run.report.cell(Platform::Web, ElementType::Text, true) == CellStats{2, 2});
    CHECK(run.report.overall_ours.micro == 1.0);
    CHECK(run.report.cell(Platform::Mobile, ElementType::Icon, true).total == 0);
}

TEST_CASE("scripted miss records hit=false and overall 0") {
    TempDir tmp("bench_miss");
    auto manifest = igtest::write_dataset(tmp.path, {{"web", "icon", 1}});
    auto examples = load_dataset(manifest, BBoxConvention::XYXY);
    // fixture targets never cover the exact image corner
    ScriptedBackend backend({"(0.999,0.999)"});
    BenchOptions options;
    options.ours.iterations_n = 1;
    BenchRun run = run_benchmark(examples, backend, options);
    CHECK(run.report.overall_ours.micro == 0.0);
    REQUIRE(run.outcomes_ours.size() == 1);
    CHECK(!run.outcomes_ours[0].hit);
}

TEST_CASE("ours with n=1 equals the baseline column cell-for-cell") {
    NoisyOracleModel model;
    model.sigma = 0.2; // noisy, so cells are non-trivial
    model.seed = 77;
    OracleBackend backend(model);
    BenchRun run = run_fixture(backend, 1);
    for (int p = 0; p < 3; ++p)
        for (int t = 0; t < 2; ++t)
            CHECK(run.report.cell(static_cast<Platform>(p), static_cast<ElementType>(t), true) ==
                  run.report.cell(static_cast<Platform>(p), static_cast<ElementType>(t), false));
}

TEST_CASE("cell counts sum to dataset size; order does not matter") {
    NoisyOracleModel model;
    model.sigma = 0.15;
    model.seed = 5;
    OracleBackend backend(model);

    TempDir tmp("bench_shuffle");
    auto manifest = igtest::write_dataset(
        tmp.path, {{"mobile", "text", 3}, {"desktop", "icon", 2}, {"web", "icon", 3}});
    auto examples = load_dataset(manifest, BBoxConvention::XYXY);

    BenchOptions options;
    options.ours.iterations_n = 2;
    options.workers = 3;
    BenchRun run = run_benchmark(examples, backend, options);

    int total = 0;
    for (int p = 0; p < 3; ++p)
        for (int t = 0; t < 2; ++t)
            total += run.report.cell(static_cast<Platform>(p), static_cast<ElementType>(t), true)
                         .total;
    CHECK(total == static_cast<int>(examples.size()));

    auto shuffled = examples;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937(99));
    BenchRun run2 = run_benchmark(shuffled, backend, options);
    CHECK(run2.report.cells == run.report.cells);
    CHECK(emit_report(run2.report, ReportFormat::Json) ==
          emit_report(run.report, ReportFormat::Json));
}

TEST_CASE("failed traces count as misses, not aborts") {
    TempDir tmp("bench_fail");
    auto manifest = igtest::write_dataset(tmp.path, {{"web", "text", 2}});
    auto examples = load_dataset(manifest, BBoxConvention::XYXY);
    ScriptedBackend backend({"(0.5,0.5)"}); // exhausted at iteration 2
    BenchOptions options;
    options.ours.iterations_n = 3;
    BenchRun run = run_benchmark(examples, backend, options);
    CHECK(run.report.cell(Platform::Web, ElementType::Text, true) == CellStats{0, 2});
    CHECK(!run.outcomes_ours[0].error.empty());
    // the baseline pass only needs one reply, so it still runs
    CHECK(run.report.cell(Platform::Web, ElementType::Text, false).total == 2);
}

TEST_CASE("emit_report: formatting rules and json round trip") {
    BenchReport report;
    report.label = "demo";
    report.has_baseline = true;
    report.cell(Platform::Mobile, ElementType::Text, false) = CellStats{3, 4};
    report.cell(Platform::Mobile, ElementType::Text, true) = CellStats{3, 4};
    report.overall_baseline = MethodOverall{3, 4, 0.75, 0.75};
    report.overall_ours = MethodOverall{3, 4, 0.75, 0.75};
    report.config_snapshot = {{"iterations_n", 3}};

    std::string md = emit_report(report, ReportFormat::MarkdownTable);
    CHECK(md.find("75.00") != std::string::npos);         // 3/4 at two decimals
    CHECK(md.find("—") != std::string::npos);        // empty cells render as an em dash
    CHECK(md.find("Text Baseline | Text Ours") != std::string::npos);

    std::string csv = emit_report(report, ReportFormat::Csv);
    CHECK(csv.find("mobile,text,baseline,3,4,75.00") != std::string::npos);

    nlohmann::json j = nlohmann::json::parse(emit_report(report, ReportFormat::Json));
    BenchReport back = report_from_json(j);
    CHECK(back == report);
}
