#include "mtmct/evalkit.hpp"
#include "mtmct/io.hpp"
#include "mtmct/pipeline.hpp"
#include "mtmct/synthworld.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

using namespace mtmct;
namespace fs = std::filesystem;

enum Exit { ok = 0, failure = 1, config_error = 3, stage_error = 4 };

struct Common {
    std::string config;
    std::string world;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    auto* cfg = cmd->add_option("--config", c.config, "pipeline config (JSON)");
    auto* world = cmd->add_option("--world", c.world, "directory written by `synth`, used instead of --config");
    cfg->excludes(world);
    cmd->add_option("--out", c.out, "output directory (overrides the config)");
}

PipelineConfig resolve(const Common& c) {
    if (c.config.empty() && c.world.empty()) throw ConfigError("one of --config or --world is required");
    PipelineConfig cfg = c.config.empty() ? config_for_world(c.world, c.out.empty() ? "out" : c.out)
                                          : load_pipeline_config(c.config);
    if (!c.out.empty()) cfg.paths.output = c.out;
    return cfg;
}

int synth(const std::string& preset, const std::string& config, std::optional<std::uint64_t> seed,
          const std::string& out) {
    WorldConfig wc;
    if (!config.empty()) {
        wc = world_config_from_json(read_text_file(config));
    } else if (preset == "zero-noise") {
        wc = zero_noise_world(3, 10, 7);
    } else {
        wc = stress_preset(preset);
    }
    if (seed) wc.seed = *seed;
    const World world = generate(wc);
    write_world(world, out);
    std::cout << "world " << wc.name << ": " << world.topology.size() << " cameras, " << world.detections.size()
              << " detections, " << world.gt_passes() << " gt passes -> " << out << "\n";
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-camera vehicle tracking: tracking, matching, evaluation and synthetic worlds"};
    app.require_subcommand(1);

    std::string preset = "stress-v1";
    std::string world_config;
    std::optional<std::uint64_t> seed;
    std::string synth_out = "world";
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic world");
    synth_cmd->add_option("--preset", preset, "stress-v1 or zero-noise")->check(CLI::IsMember({"stress-v1", "zero-noise"}));
    synth_cmd->add_option("--config", world_config, "world config (JSON); may name a preset under \"preset\"");
    synth_cmd->add_option("--seed", seed, "override the world seed");
    synth_cmd->add_option("--out", synth_out, "output directory");

    Common sct_opts, mtmct_opts, ablate_opts, pipe_opts;
    auto* sct_cmd = app.add_subcommand("sct", "per-camera tracking; writes tracklets.jsonl");
    add_common(sct_cmd, sct_opts);
    auto* mtmct_cmd = app.add_subcommand("mtmct", "tracking and cross-camera matching; writes submission.txt");
    add_common(mtmct_cmd, mtmct_opts);
    auto* ablate_cmd = app.add_subcommand("ablate", "five-row module ablation on one tracking run");
    add_common(ablate_cmd, ablate_opts);
    auto* pipe_cmd = app.add_subcommand("pipeline", "every stage including evaluation");
    add_common(pipe_cmd, pipe_opts);

    std::string gt_path, pred_path, eval_out;
    double eval_iou = 0.5;
    bool multi_cam = false;
    auto* eval_cmd = app.add_subcommand("eval", "score a submission against ground truth");
    eval_cmd->add_option("--gt", gt_path, "ground truth in submission format")->required();
    eval_cmd->add_option("--pred", pred_path, "submission to score")->required();
    eval_cmd->add_option("--iou", eval_iou, "IoU needed for a box correspondence");
    eval_cmd->add_flag("--multi-cam-only", multi_cam, "ignore gt identities seen by one camera");
    eval_cmd->add_option("--out", eval_out, "directory for report.json");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth_cmd) return synth(preset, world_config, seed, synth_out);
        if (*sct_cmd) {
            const auto cfg = resolve(sct_opts);
            const auto inputs = load_inputs(cfg);
            const auto tracklets = run_sct(inputs, cfg);
            fs::create_directories(cfg.paths.output);
            write_tracklets(tracklets, cfg.paths.output / "tracklets.jsonl");
            std::cout << tracklets.size() << " tracklets -> " << (cfg.paths.output / "tracklets.jsonl").string() << "\n";
            return ok;
        }
        if (*mtmct_cmd || *pipe_cmd) {
            auto cfg = resolve(*mtmct_cmd ? mtmct_opts : pipe_opts);
            if (*mtmct_cmd) cfg.paths.gt.clear();
            const auto result = run_pipeline(cfg);
            std::cout << result.tracklet_count << " tracklets, " << result.submission.size()
                      << " submission rows -> " << cfg.paths.output.string() << "\n";
            if (result.report) std::cout << report_json(*result.report) << "\n";
            return ok;
        }
        if (*ablate_cmd) {
            const auto rows = run_ablation(resolve(ablate_opts));
            std::cout << ablation_table(rows);
            return ok;
        }
        if (*eval_cmd) {
            const auto report =
                evaluate(parse_submission(gt_path), parse_submission(pred_path), eval_iou, multi_cam);
            for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
            const std::string text = report_json(report);
            std::cout << text << "\n";
            if (!eval_out.empty()) {
                fs::create_directories(eval_out);
                write_text_file(fs::path(eval_out) / "report.json", text + "\n");
            }
            return ok;
        }
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return stage_error;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return config_error;
    } catch (const ParseError& e) {
        std::cerr << "error: ingest: " << e.what() << "\n";
        return stage_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failure;
    }
    return failure;
}
