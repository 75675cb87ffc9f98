// SPDX-License-Identifier: Apache-2.0
//
// Shared test fixtures: synthetic benchmark datasets on disk.
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "iterground/harness.hpp"
#include "iterground/simlab.hpp"

namespace igtest {

namespace fs = std::filesystem;
namespace ig = iterground;

struct TempDir {
    fs::path path;

    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("iterground_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct FixtureSpec {
    std::string platform;
    std::string element_type;
    int count = 1;
    std::uint64_t seed = 1;
};

// Writes `count` synthetic-screen examples per (platform, element_type) cell
// and a JSONL manifest referencing them. Targets rotate through grid cells.
inline fs::path write_dataset(const fs::path& dir, const std::vector<FixtureSpec>& cells,
                              int width = 320, int height = 160) {
    fs::create_directories(dir);
    std::ofstream manifest(dir / "manifest.jsonl");
    int idx = 0;
    for (const auto& cell : cells) {
        for (int i = 0; i < cell.count; ++i, ++idx) {
            ig::SyntheticScreenSpec spec;
            spec.dims = ig::ImageDims(width, height);
            spec.grid_rows = 2;
            spec.grid_cols = 4;
            spec.element_size_px = 24;
            spec.target_index = idx % 8;
            spec.seed = cell.seed + static_cast<std::uint64_t>(idx);
            ig::GeneratedScreen screen = ig::generate_screen(spec);

            std::string name = "shot_" + std::to_string(idx) + ".png";
            ig::save_png(screen.image, dir / name);

            nlohmann::json rec{
                {"id", "ex" + std::to_string(idx)},
                {"image", name},
                {"instruction", "element " + std::to_string(spec.target_index)},
                {"bbox",
                 {screen.target.x1, screen.target.y1, screen.target.x2, screen.target.y2}},
                {"platform", cell.platform},
                {"element_type", cell.element_type}};
            manifest << rec.dump() << "\n";
        }
    }
    return dir / "manifest.jsonl";
}

} // namespace igtest
