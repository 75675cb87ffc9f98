// SPDX-License-Identifier: Apache-2.0
//
// Python bindings for the grounding core: geometry, parsing, the narrowing
// pipeline with scripted/oracle backends, screens, sweeps and rendering.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>

#include "iterground/backend.hpp"
#include "iterground/errors.hpp"
#include "iterground/geometry.hpp"
#include "iterground/image.hpp"
#include "iterground/pipeline.hpp"
#include "iterground/render.hpp"
#include "iterground/simlab.hpp"

namespace py = pybind11;
using namespace iterground;

namespace {

py::object json_to_py(const nlohmann::json& j) {
    py::object loads = py::module_::import("json").attr("loads");
    return loads(j.dump());
}

GroundingConfig make_config(int n, int min_dim) {
    GroundingConfig cfg;
    cfg.iterations_n = n;
    cfg.shrink_policy.min_dim_px = min_dim;
    return cfg;
}

} // namespace

PYBIND11_MODULE(_iterground, m) {
    m.doc() = "Iterative-narrowing GUI grounding core";

    py::class_<ImageDims>(m, "ImageDims")
        .def(py::init<int, int>(), py::arg("width_px"), py::arg("height_px"))
        .def_readonly("width_px", &ImageDims::width_px)
        .def_readonly("height_px", &ImageDims::height_px)
        .def("__repr__", [](const ImageDims& d) {
            return "ImageDims(" + std::to_string(d.width_px) + ", " +
                   std::to_string(d.height_px) + ")";
        });

    py::enum_<Orientation>(m, "Orientation")
        .value("Landscape", Orientation::Landscape)
        .value("Portrait", Orientation::Portrait);

    py::class_<NormPoint>(m, "NormPoint")
        .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
        .def_static("clamped", &NormPoint::clamped)
        .def_readonly("x", &NormPoint::x)
        .def_readonly("y", &NormPoint::y);

    py::class_<AbsPoint>(m, "AbsPoint")
        .def(py::init([](double x, double y) { return AbsPoint{x, y}; }), py::arg("x_px"),
             py::arg("y_px"))
        .def_readonly("x_px", &AbsPoint::x_px)
        .def_readonly("y_px", &AbsPoint::y_px);

    py::class_<Viewport>(m, "Viewport")
        .def(py::init([](int ox, int oy, int w, int h) { return Viewport{ox, oy, w, h}; }),
             py::arg("origin_x_px"), py::arg("origin_y_px"), py::arg("width_px"),
             py::arg("height_px"))
        .def_readonly("origin_x_px", &Viewport::origin_x_px)
        .def_readonly("origin_y_px", &Viewport::origin_y_px)
        .def_readonly("width_px", &Viewport::width_px)
        .def_readonly("height_px", &Viewport::height_px)
        .def("as_tuple", [](const Viewport& vp) {
            return py::make_tuple(vp.origin_x_px, vp.origin_y_px, vp.width_px, vp.height_px);
        });

    py::class_<ShrinkPolicy>(m, "ShrinkPolicy")
        .def(py::init<>())
        .def_readwrite("landscape_w_factor", &ShrinkPolicy::landscape_w_factor)
        .def_readwrite("landscape_h_factor", &ShrinkPolicy::landscape_h_factor)
        .def_readwrite("portrait_w_factor", &ShrinkPolicy::portrait_w_factor)
        .def_readwrite("portrait_h_factor", &ShrinkPolicy::portrait_h_factor)
        .def_readwrite("min_dim_px", &ShrinkPolicy::min_dim_px);

    py::enum_<CoordinateScale>(m, "CoordinateScale")
        .value("Unit", CoordinateScale::Unit)
        .value("Percent", CoordinateScale::Percent)
        .value("Thousand", CoordinateScale::Thousand)
        .value("PixelRelativeToSentImage", CoordinateScale::PixelRelativeToSentImage);

    py::class_<RasterImage>(m, "RasterImage")
        .def_readonly("width", &RasterImage::width)
        .def_readonly("height", &RasterImage::height)
        .def("to_bytes",
             [](const RasterImage& img) {
                 return py::bytes(reinterpret_cast<const char*>(img.pixels.data()),
                                  img.pixels.size());
             })
        .def("save_png", [](const RasterImage& img, const std::filesystem::path& p) {
            save_png(img, p);
        });

    m.def("load_png", &load_png, py::arg("path"));

    m.def("orientation_of", &orientation_of, py::arg("dims"));
    m.def("shrink_dims", &shrink_dims, py::arg("w"), py::arg("h"), py::arg("orientation"),
          py::arg("policy") = ShrinkPolicy{});
    m.def("to_absolute", [](const NormPoint& p, const Viewport& vp) {
        AbsPoint a = to_absolute(p, vp);
        return py::make_tuple(a.x_px, a.y_px);
    });
    m.def(
        "center_window",
        [](double cx, double cy, int w, int h, const ImageDims& img) {
            return center_window(AbsPoint{cx, cy}, w, h, img);
        },
        py::arg("center_x"), py::arg("center_y"), py::arg("w"), py::arg("h"), py::arg("img"));

    m.def(
        "parse_point",
        [](const std::string& raw, CoordinateScale scale, const ImageDims& dims) {
            NormPoint p = parse_point(raw, scale, dims);
            return py::make_tuple(p.x, p.y);
        },
        py::arg("raw"), py::arg("scale") = CoordinateScale::Unit,
        py::arg("sent_dims") = ImageDims(1, 1));

    m.def(
        "ground_scripted",
        [](const RasterImage& image, const std::string& query,
           const std::vector<std::string>& replies, int n, int min_dim) {
            ScriptedBackend backend(replies);
            return json_to_py(trace_to_json(ground(image, query, backend,
                                                   make_config(n, min_dim))));
        },
        py::arg("image"), py::arg("query"), py::arg("replies"), py::arg("n") = 3,
        py::arg("min_dim") = 28);

    m.def(
        "ground_oracle",
        [](const RasterImage& image, const std::string& query, double target_x, double target_y,
           double sigma, std::uint64_t seed, int n, int min_dim) {
            NoisyOracleModel model;
            model.sigma = sigma;
            model.seed = seed;
            OracleBackend backend(model);
            return json_to_py(trace_to_json(ground(image, query, backend,
                                                   make_config(n, min_dim),
                                                   AbsPoint{target_x, target_y})));
        },
        py::arg("image"), py::arg("query"), py::arg("target_x"), py::arg("target_y"),
        py::arg("sigma") = 0.0, py::arg("seed") = 1, py::arg("n") = 3, py::arg("min_dim") = 28);

    m.def(
        "generate_screen",
        [](int width, int height, int rows, int cols, int element_size, int target_index,
           std::uint64_t seed) {
            SyntheticScreenSpec spec;
            spec.dims = ImageDims(width, height);
            spec.grid_rows = rows;
            spec.grid_cols = cols;
            spec.element_size_px = element_size;
            spec.target_index = target_index;
            spec.seed = seed;
            GeneratedScreen screen = generate_screen(spec);
            py::dict out;
            out["image"] = screen.image;
            out["target"] = py::make_tuple(screen.target.x1, screen.target.y1, screen.target.x2,
                                           screen.target.y2);
            py::list distractors;
            for (const auto& b : screen.distractors)
                distractors.append(py::make_tuple(b.x1, b.y1, b.x2, b.y2));
            out["distractors"] = std::move(distractors);
            return out;
        },
        py::arg("width") = 1024, py::arg("height") = 512, py::arg("rows") = 8,
        py::arg("cols") = 16, py::arg("element_size") = 32, py::arg("target_index") = 0,
        py::arg("seed") = 1);

    m.def(
        "run_sweep",
        [](std::vector<int> n_values, std::vector<double> sigma_values, int trials,
           std::uint64_t seed, int width, int height, int rows, int cols, int element_size,
           int workers) {
            SyntheticScreenSpec screen;
            screen.dims = ImageDims(width, height);
            screen.grid_rows = rows;
            screen.grid_cols = cols;
            screen.element_size_px = element_size;
            screen.seed = seed;
            SweepSpec sweep;
            sweep.n_values = std::move(n_values);
            sweep.sigma_values = std::move(sigma_values);
            sweep.trials_per_cell = trials;
            sweep.base_seed = seed;
            sweep.workers = workers;
            return json_to_py(sweep_to_json(run_sweep(screen, sweep, ShrinkPolicy{})));
        },
        py::arg("n_values"), py::arg("sigma_values"), py::arg("trials") = 500,
        py::arg("seed") = 1, py::arg("width") = 1024, py::arg("height") = 512,
        py::arg("rows") = 8, py::arg("cols") = 16, py::arg("element_size") = 32,
        py::arg("workers") = 4);

    m.def(
        "run_context_loss",
        [](std::vector<int> n_values) {
            ContextLossSpec spec;
            if (!n_values.empty()) spec.n_values = std::move(n_values);
            return json_to_py(context_loss_to_json(
                run_context_loss_scenario(ShrinkPolicy{}, spec)));
        },
        py::arg("n_values") = std::vector<int>{});

    m.def(
        "render_trace_png",
        [](const std::filesystem::path& trace_path, const std::filesystem::path& image_path,
           const std::filesystem::path& out_path) {
            std::ifstream in(trace_path);
            if (!in) throw IoError("cannot open trace: " + trace_path.string());
            nlohmann::json j = nlohmann::json::parse(in);
            save_png(render_trace(load_png(image_path), trace_from_json(j), RenderStyle{}),
                     out_path);
        },
        py::arg("trace_path"), py::arg("image_path"), py::arg("out_path"));

    py::register_exception<Error>(m, "GroundingError");
}
