#include "mtmct/affinity.hpp"
#include "mtmct/evalkit.hpp"
#include "mtmct/io.hpp"
#include "mtmct/numeric.hpp"
#include "mtmct/pipeline.hpp"
#include "mtmct/synthworld.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace mtmct;

namespace {

// Reports cross the boundary as plain dicts, parsed from the same JSON the
// command-line tool writes.
py::object to_python(const std::string& json_text) {
    return py::module_::import("json").attr("loads")(json_text);
}

PipelineConfig resolve_config(const std::optional<fs::path>& config, const std::optional<fs::path>& world,
                              const std::optional<fs::path>& out) {
    if (config.has_value() == world.has_value()) throw ConfigError("pass exactly one of config or world");
    PipelineConfig c = config ? load_pipeline_config(*config) : config_for_world(*world, out.value_or(*world / "out"));
    if (out) c.paths.output = *out;
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multi-camera vehicle tracking: synthetic worlds, pipeline runs and evaluation.";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
    py::register_exception<ParseError>(m, "ParseError", error.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", error.ptr());
    py::register_exception<StageError>(m, "StageError", error.ptr());

    m.def(
        "generate_world",
        [](const fs::path& out, std::optional<std::string> preset, std::optional<std::string> config_json,
           std::optional<std::uint64_t> seed) {
            WorldConfig c;
            if (config_json) {
                c = world_config_from_json(*config_json);
            } else if (preset && *preset == "zero-noise") {
                c = zero_noise_world(3, 10, 7);
            } else {
                c = stress_preset(preset.value_or("stress-v1"));
            }
            if (seed) c.seed = *seed;
            World w;
            {
                py::gil_scoped_release release;
                w = generate(c);
            }
            const auto files = write_world(w, out);
            return to_python(read_text_file(files.manifest));
        },
        py::arg("out"), py::arg("preset") = py::none(), py::arg("config_json") = py::none(),
        py::arg("seed") = py::none(), "Writes a synthetic world into `out` and returns its manifest.");

    m.def(
        "run_pipeline",
        [](std::optional<fs::path> config, std::optional<fs::path> world, std::optional<fs::path> out) {
            const auto c = resolve_config(config, world, out);
            PipelineResult r;
            {
                py::gil_scoped_release release;
                r = run_pipeline(c);
            }
            py::dict result;
            result["output"] = c.paths.output;
            result["tracklets"] = r.tracklet_count;
            result["rows"] = r.submission.size();
            result["report"] = r.report ? to_python(report_json(*r.report)) : py::none();
            return result;
        },
        py::kw_only(), py::arg("config") = py::none(), py::arg("world") = py::none(), py::arg("out") = py::none(),
        "Runs every stage; returns counts and, with ground truth, the metric report.");

    m.def(
        "run_ablation",
        [](std::optional<fs::path> config, std::optional<fs::path> world, std::optional<fs::path> out) {
            const auto c = resolve_config(config, world, out);
            std::vector<AblationRow> rows;
            {
                py::gil_scoped_release release;
                rows = run_ablation(c);
            }
            return to_python(ablation_json(rows));
        },
        py::kw_only(), py::arg("config") = py::none(), py::arg("world") = py::none(), py::arg("out") = py::none(),
        "Five-row module ablation; returns one dict per row.");

    m.def(
        "evaluate",
        [](const fs::path& gt, const fs::path& pred, double iou, bool multi_cam_only) {
            return to_python(report_json(evaluate(parse_submission(gt), parse_submission(pred), iou, multi_cam_only)));
        },
        py::arg("gt"), py::arg("pred"), py::arg("iou") = 0.5, py::arg("multi_cam_only") = false,
        "Scores a submission file against a ground-truth file.");

    m.def(
        "min_cost_assignment",
        [](const Eigen::MatrixXd& cost) {
            std::vector<std::pair<std::size_t, std::size_t>> out;
            for (const auto& match : min_cost_assignment(cost)) out.emplace_back(match.row, match.col);
            return out;
        },
        py::arg("cost"), "Rectangular assignment; +inf marks forbidden pairs. Returns (row, col) pairs.");

    m.def("similarity_matrix", &similarity_matrix, py::arg("features"), "Pairwise cosine of unit rows.");

    m.def(
        "rerank",
        [](const Eigen::MatrixXd& features, std::size_t k1, std::size_t k2, double lambda) {
            return rerank(features, {k1, k2, lambda});
        },
        py::arg("features"), py::arg("k1") = 20, py::arg("k2") = 6, py::arg("lambda_") = 0.3,
        "k-reciprocal re-ranked similarity of unit feature rows.");
}
