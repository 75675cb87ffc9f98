// SPDX-License-Identifier: Apache-2.0
#include "iterground/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

#include "iterground/errors.hpp"
#include "iterground/parallel.hpp"

namespace iterground {

const char* to_string(Platform p) {
    switch (p) {
    case Platform::Mobile: return "mobile";
    case Platform::Desktop: return "desktop";
    case Platform::Web: return "web";
    }
    return "mobile";
}

const char* to_string(ElementType t) {
    return t == ElementType::Text ? "text" : "icon";
}

Platform platform_from_string(const std::string& s) {
    if (s == "mobile" || s == "ios" || s == "android") return Platform::Mobile;
    if (s == "desktop" || s == "macos" || s == "windows" || s == "linux")
        return Platform::Desktop;
    if (s == "web" || s == "gitlab" || s == "shop" || s == "forum" || s == "tool")
        return Platform::Web;
    throw std::invalid_argument("unknown platform: " + s);
}

ElementType element_type_from_string(const std::string& s) {
    if (s == "text") return ElementType::Text;
    if (s == "icon" || s == "icon/widget" || s == "widget") return ElementType::Icon;
    throw std::invalid_argument("unknown element type: " + s);
}

bool score_point(const AbsPoint& p, const BBox& box) {
    return p.x_px >= box.x1 && p.x_px <= box.x2 && p.y_px >= box.y1 && p.y_px <= box.y2;
}

namespace {

std::string pick_field(const nlohmann::json& j, const char* name, const char* synonym) {
    if (j.contains(name)) return j.at(name).get<std::string>();
    if (synonym && j.contains(synonym)) return j.at(synonym).get<std::string>();
    throw Error(std::string("missing field \"") + name + "\"");
}

} // namespace

std::vector<BenchExample> load_dataset(const std::filesystem::path& manifest_path,
                                       BBoxConvention convention) {
    std::ifstream in(manifest_path);
    if (!in) throw ManifestNotFound("manifest not found: " + manifest_path.string());

    std::vector<BenchExample> examples;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        nlohmann::json j;
        BenchExample ex;
        std::array<double, 4> raw{};
        try {
            j = nlohmann::json::parse(line);
            ex.example_id = j.contains("id") ? j.at("id").get<std::string>()
                                             : manifest_path.stem().string() + ":" +
                                                   std::to_string(line_no);
            ex.image_path = pick_field(j, "image", "img_filename");
            ex.instruction = pick_field(j, "instruction", nullptr);
            ex.platform = platform_from_string(pick_field(j, "platform", "data_source"));
            ex.element_type =
                element_type_from_string(pick_field(j, "element_type", "data_type"));
            auto bbox = j.at("bbox");
            if (!bbox.is_array() || bbox.size() != 4) throw Error("bbox must have 4 numbers");
            for (int i = 0; i < 4; ++i) raw[static_cast<std::size_t>(i)] = bbox.at(i).get<double>();
        } catch (const std::exception& e) {
            throw MalformedRecord(std::string("malformed manifest record: ") + e.what(), line_no);
        }

        if (ex.image_path.is_relative())
            ex.image_path = manifest_path.parent_path() / ex.image_path;
        if (!std::filesystem::exists(ex.image_path))
            throw ImageMissing("image not found: " + ex.image_path.string() + " (line " +
                               std::to_string(line_no) + ")");

        BBox box;
        if (convention == BBoxConvention::XYWH)
            box = BBox{raw[0], raw[1], raw[0] + raw[2], raw[1] + raw[3]};
        else
            box = BBox{raw[0], raw[1], raw[2], raw[3]};

        ImageDims dims = read_png_dims(ex.image_path);
        box.x1 = std::clamp(box.x1, 0.0, static_cast<double>(dims.width_px));
        box.x2 = std::clamp(box.x2, 0.0, static_cast<double>(dims.width_px));
        box.y1 = std::clamp(box.y1, 0.0, static_cast<double>(dims.height_px));
        box.y2 = std::clamp(box.y2, 0.0, static_cast<double>(dims.height_px));
        if (!(box.x1 < box.x2 && box.y1 < box.y2))
            throw DegenerateBBox("degenerate bbox on line " + std::to_string(line_no));
        ex.bbox = box;
        examples.push_back(std::move(ex));
    }
    return examples;
}

nlohmann::json outcome_to_json(const EvalOutcome& outcome) {
    nlohmann::json j{{"example_id", outcome.example_id}, {"hit", outcome.hit}};
    if (outcome.final_point)
        j["final_point"] = {outcome.final_point->x_px, outcome.final_point->y_px};
    if (outcome.trace) j["trace"] = trace_to_json(*outcome.trace);
    if (!outcome.error.empty()) j["error"] = outcome.error;
    return j;
}

namespace {

EvalOutcome evaluate_one(const BenchExample& ex, const RasterImage& image,
                         GroundingBackend& backend, const GroundingConfig& cfg) {
    EvalOutcome outcome;
    outcome.example_id = ex.example_id;
    try {
        GroundingTrace trace = ground(image, ex.instruction, backend, cfg, ex.bbox.center(),
                                      ex.image_path.string());
        outcome.final_point = trace.final_point;
        outcome.hit = score_point(trace.final_point, ex.bbox);
        outcome.trace = std::move(trace);
    } catch (const Error& e) {
        outcome.error = e.what(); // failed traces score as misses
    }
    return outcome;
}

void fold_outcomes(BenchReport& report, const std::vector<BenchExample>& examples,
                   const std::vector<EvalOutcome>& outcomes, bool ours) {
    for (std::size_t i = 0; i < examples.size(); ++i) {
        CellStats& cell = report.cell(examples[i].platform, examples[i].element_type, ours);
        cell.total += 1;
        cell.hits += outcomes[i].hit ? 1 : 0;
    }
}

MethodOverall overall_of(const BenchReport& report, bool ours) {
    MethodOverall o;
    double macro_sum = 0.0;
    int macro_cells = 0;
    for (int p = 0; p < 3; ++p) {
        for (int t = 0; t < 2; ++t) {
            const CellStats& c =
                report.cell(static_cast<Platform>(p), static_cast<ElementType>(t), ours);
            o.hits += c.hits;
            o.total += c.total;
            if (auto acc = c.accuracy()) {
                macro_sum += *acc;
                ++macro_cells;
            }
        }
    }
    o.micro = o.total > 0 ? static_cast<double>(o.hits) / o.total : 0.0;
    o.macro = macro_cells > 0 ? macro_sum / macro_cells : 0.0;
    return o;
}

} // namespace

BenchRun run_benchmark(const std::vector<BenchExample>& examples, GroundingBackend& backend,
                       const BenchOptions& options) {
    if (examples.empty()) throw std::invalid_argument("run_benchmark: no examples");

    BenchRun run;
    run.outcomes_ours.resize(examples.size());
    if (options.run_baseline) run.outcomes_baseline.resize(examples.size());

    const int count = static_cast<int>(examples.size());
    parallel_for(count, options.workers, [&](int i) {
        const BenchExample& ex = examples[static_cast<std::size_t>(i)];
        RasterImage image = load_png(ex.image_path);
        run.outcomes_ours[static_cast<std::size_t>(i)] =
            evaluate_one(ex, image, backend, options.ours);
        if (options.run_baseline) {
            GroundingConfig baseline_cfg = options.ours;
            baseline_cfg.iterations_n = 1;
            run.outcomes_baseline[static_cast<std::size_t>(i)] =
                evaluate_one(ex, image, backend, baseline_cfg);
        }
    });

    BenchReport& report = run.report;
    report.label = options.label.empty() ? backend.name() : options.label;
    report.has_baseline = options.run_baseline;
    fold_outcomes(report, examples, run.outcomes_ours, true);
    if (options.run_baseline) fold_outcomes(report, examples, run.outcomes_baseline, false);
    report.overall_ours = overall_of(report, true);
    if (options.run_baseline) report.overall_baseline = overall_of(report, false);

    report.config_snapshot = nlohmann::json{
        {"iterations_n", options.ours.iterations_n},
        {"shrink_policy",
         {{"landscape_w_factor", options.ours.shrink_policy.landscape_w_factor},
          {"landscape_h_factor", options.ours.shrink_policy.landscape_h_factor},
          {"portrait_w_factor", options.ours.shrink_policy.portrait_w_factor},
          {"portrait_h_factor", options.ours.shrink_policy.portrait_h_factor},
          {"min_dim_px", options.ours.shrink_policy.min_dim_px}}},
        {"backend", backend.name()},
        {"workers", options.workers},
        {"examples", static_cast<int>(examples.size())}};
    return run;
}

namespace {

std::string pct(const std::optional<double>& accuracy) {
    if (!accuracy) return "—"; // em dash: absence, not zero
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", *accuracy * 100.0);
    return buf;
}

std::string pct(double accuracy) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", accuracy * 100.0);
    return buf;
}

nlohmann::json cell_to_json(const CellStats& c) {
    return nlohmann::json{{"hits", c.hits}, {"total", c.total}};
}

CellStats cell_from_json(const nlohmann::json& j) {
    return CellStats{j.at("hits").get<int>(), j.at("total").get<int>()};
}

nlohmann::json overall_to_json(const MethodOverall& o) {
    return nlohmann::json{
        {"hits", o.hits}, {"total", o.total}, {"micro", o.micro}, {"macro", o.macro}};
}

MethodOverall overall_from_json(const nlohmann::json& j) {
    return MethodOverall{j.at("hits").get<int>(), j.at("total").get<int>(),
                         j.at("micro").get<double>(), j.at("macro").get<double>()};
}

} // namespace

std::string emit_report(const BenchReport& report, ReportFormat format) {
    static const Platform kPlatforms[] = {Platform::Mobile, Platform::Desktop, Platform::Web};
    static const ElementType kTypes[] = {ElementType::Text, ElementType::Icon};

    if (format == ReportFormat::Json) {
        nlohmann::json cells;
        for (Platform p : kPlatforms) {
            for (ElementType t : kTypes) {
                nlohmann::json methods;
                if (report.has_baseline)
                    methods["baseline"] = cell_to_json(report.cell(p, t, false));
                methods["ours"] = cell_to_json(report.cell(p, t, true));
                cells[to_string(p)][to_string(t)] = std::move(methods);
            }
        }
        nlohmann::json overall;
        if (report.has_baseline) overall["baseline"] = overall_to_json(report.overall_baseline);
        overall["ours"] = overall_to_json(report.overall_ours);
        nlohmann::json j{{"label", report.label},
                         {"has_baseline", report.has_baseline},
                         {"cells", std::move(cells)},
                         {"overall", std::move(overall)},
                         {"config", report.config_snapshot}};
        return j.dump(2) + "\n";
    }

    if (format == ReportFormat::Csv) {
        std::ostringstream out;
        out << "platform,element_type,method,hits,total,accuracy_pct\n";
        for (Platform p : kPlatforms) {
            for (ElementType t : kTypes) {
                for (int m = 0; m < 2; ++m) {
                    if (m == 0 && !report.has_baseline) continue;
                    const CellStats& c = report.cell(p, t, m == 1);
                    out << to_string(p) << ',' << to_string(t) << ','
                        << (m == 0 ? "baseline" : "ours") << ',' << c.hits << ',' << c.total
                        << ',' << pct(c.accuracy()) << '\n';
                }
            }
        }
        return out.str();
    }

    // markdown: overall first, then one table per platform with
    // Baseline | Ours column pairs per element type
    std::ostringstream out;
    out << "# Grounding benchmark report\n\n";
    out << "Method: iterative narrowing, n=" << report.config_snapshot.value("iterations_n", 0)
        << " (baseline = single shot, n=1)\n\n";
    out << "## Overall average accuracy\n\n";
    out << "| Config | Baseline | Ours |\n";
    out << "| --- | --- | --- |\n";
    out << "| " << report.label << " | "
        << (report.has_baseline ? pct(report.overall_baseline.micro) : "—") << " | "
        << pct(report.overall_ours.micro) << " |\n\n";
    out << "Micro-average over " << report.overall_ours.total
        << " pooled examples. Macro-average over populated cells: "
        << (report.has_baseline ? "baseline " + pct(report.overall_baseline.macro) + ", " : "")
        << "ours " << pct(report.overall_ours.macro) << ".\n";

    for (Platform p : kPlatforms) {
        std::string title = to_string(p);
        title[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(title[0])));
        out << "\n## " << title << "\n\n";
        out << "| Config | Text Baseline | Text Ours | Icon/Widget Baseline | Icon/Widget Ours "
               "|\n";
        out << "| --- | --- | --- | --- | --- |\n";
        out << "| " << report.label << " |";
        for (ElementType t : kTypes) {
            out << ' '
                << (report.has_baseline ? pct(report.cell(p, t, false).accuracy()) : "—")
                << " | " << pct(report.cell(p, t, true).accuracy()) << " |";
        }
        out << '\n';
    }
    return out.str();
}

BenchReport report_from_json(const nlohmann::json& j) {
    BenchReport report;
    report.label = j.at("label").get<std::string>();
    report.has_baseline = j.at("has_baseline").get<bool>();
    for (int p = 0; p < 3; ++p) {
        for (int t = 0; t < 2; ++t) {
            const auto& methods =
                j.at("cells").at(to_string(static_cast<Platform>(p))).at(
                    to_string(static_cast<ElementType>(t)));
            if (report.has_baseline)
                report.cell(static_cast<Platform>(p), static_cast<ElementType>(t), false) =
                    cell_from_json(methods.at("baseline"));
            report.cell(static_cast<Platform>(p), static_cast<ElementType>(t), true) =
                cell_from_json(methods.at("ours"));
        }
    }
    if (report.has_baseline)
        report.overall_baseline = overall_from_json(j.at("overall").at("baseline"));
    report.overall_ours = overall_from_json(j.at("overall").at("ours"));
    report.config_snapshot = j.at("config");
    return report;
}

} // namespace iterground
