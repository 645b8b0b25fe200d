#include "oneshot/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "oneshot/config.hpp"
#include "oneshot/errors.hpp"
#include "oneshot/evalkit.hpp"
#include "oneshot/pipeline.hpp"
#include "oneshot/synthgen.hpp"
#include "oneshot/videoio.hpp"

namespace oneshot {

namespace {

std::pair<int, int> parse_dims(const std::string& text) {
    int w = 0, h = 0;
    char sep = 0;
    std::istringstream in(text);
    if (!(in >> w >> sep >> h) || sep != 'x' || !in.eof() || w <= 0 || h <= 0)
        throw ConfigError("dims must look like 640x360, got \"" + text + "\"");
    return {w, h};
}

Motion parse_motion(const std::string& text) {
    const std::size_t colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
    double a = 0.0, b = 0.0;
    char comma = 0;
    std::istringstream in(args);
    if (!(in >> a >> comma >> b) || comma != ',' || !in.eof())
        throw ConfigError("motion needs two numbers, e.g. linear:2,0 or sinusoidal:12,20");
    if (kind == "linear") return LinearMotion{a, b};
    if (kind == "sinusoidal") return SinusoidalMotion{a, b};
    throw ConfigError("motion kind must be linear or sinusoidal, got \"" + kind + "\"");
}

struct SynthArgs {
    std::uint64_t seed = 1;
    int frames = 30;
    std::string dims = "640x360";
    std::string plate_dims = "120x40";
    std::string plate = "ABC1234";
    std::string motion = "linear:2,0";
    double noise = 0.0;
    int distractors = -1;  // <0 = uniform background
    std::string out;
};

int cmd_synth(const SynthArgs& a) {
    SceneConfig cfg;
    cfg.seed = a.seed;
    cfg.frames = a.frames;
    std::tie(cfg.frame_width, cfg.frame_height) = parse_dims(a.dims);
    std::tie(cfg.plate_width, cfg.plate_height) = parse_dims(a.plate_dims);
    cfg.plate_string = a.plate;
    cfg.motion = parse_motion(a.motion);
    cfg.noise_sigma = a.noise;
    if (a.distractors >= 0) cfg.background = ClutterBackground{a.distractors};

    const SyntheticScene scene = generate_scene(cfg);
    write_scene(a.out, scene);
    std::cout << "wrote " << scene.video.size() << " frames, annotations.json and "
              << "groundtruth.jsonl under " << a.out << "\n";
    return 0;
}

struct RunArgs {
    std::string frames_dir;
    std::string annotations;
    std::string config_file;
    std::vector<std::string> overrides;
    std::string out;
    std::string dump_masks;
    std::string dump_patches;
};

int cmd_run(const RunArgs& a) {
    std::string config_path = a.config_file;
    if (config_path.empty()) {
        if (const char* env = std::getenv("ONESHOT_CONFIG")) config_path = env;
    }
    Config cfg = config_path.empty() ? Config() : Config::load_file(config_path);
    for (const std::string& pair : a.overrides) cfg.set_pair(pair);

    const VideoSequence video = load_sequence(a.frames_dir);
    const std::vector<QueryAnnotation> annotations = parse_annotations(
        read_file(a.annotations), std::pair{video.width(), video.height()});

    const PipelineBackends backends = make_backends(cfg, a.frames_dir);
    PipelineOptions opts;
    opts.dump_masks_dir = a.dump_masks;
    opts.dump_patches_dir = a.dump_patches;

    const PipelineOutput out = run_pipeline(video, annotations, cfg, backends, opts);
    save_pipeline_output(out, a.out);

    std::cout << "frames: " << video.size() << "  detections: " << out.detections.size()
              << "  instances: " << out.plates.size() << "\n";
    for (const InstancePlate& p : out.plates)
        std::cout << "instance " << p.instance_id << ": "
                  << (p.plate ? *p.plate : std::string("(no plate)")) << "\n";
    std::cout << "outputs written under " << a.out << "\n";
    return 0;
}

struct EvalArgs {
    std::string pred;
    std::string truth;
    double iou = 0.5;
    bool eleven_point = false;
    std::string json_out;
};

int cmd_eval(const EvalArgs& a) {
    const std::vector<Detection> dets = load_detections(a.pred);
    const std::vector<GroundTruthRecord> gts = load_ground_truth(a.truth);
    const EvalReport r = evaluate(dets, gts, a.iou, a.eleven_point);
    std::cout << format_report_table(r);
    if (!a.json_out.empty()) {
        nlohmann::ordered_json j{{"precision", r.pr.precision},
                                 {"recall", r.pr.recall},
                                 {"f1", r.pr.f1},
                                 {"ap", r.ap},
                                 {"acc6", r.acc6},
                                 {"acc7", r.acc7},
                                 {"tp", r.num_tp},
                                 {"fp", r.num_fp},
                                 {"fn", r.num_fn},
                                 {"ground_truth_boxes", r.num_gt},
                                 {"instances", r.num_instances},
                                 {"correct6", r.rec_correct6},
                                 {"correct7", r.rec_correct7}};
        write_file(a.json_out, j.dump(2) + "\n");
        std::cout << "report written to " << a.json_out << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"one-shot video license plate tracking and recognition"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic ground-truthed scene");
    synth->add_option("--seed", synth_args.seed, "rng seed");
    synth->add_option("--frames", synth_args.frames, "frame count");
    synth->add_option("--dims", synth_args.dims, "frame size WxH");
    synth->add_option("--plate-dims", synth_args.plate_dims, "plate size WxH");
    synth->add_option("--string", synth_args.plate, "plate text");
    synth->add_option("--motion", synth_args.motion, "linear:vx,vy or sinusoidal:amp,period");
    synth->add_option("--noise", synth_args.noise, "gaussian noise sigma (8-bit scale)");
    synth->add_option("--distractors", synth_args.distractors,
                      "cluttered background with N distractor rectangles");
    synth->add_option("--out", synth_args.out, "output directory")->required();

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "run the pipeline on a frame directory");
    run->add_option("--frames", run_args.frames_dir, "directory of frame_%05d.ppm")->required();
    run->add_option("--annotations", run_args.annotations, "query points JSON")->required();
    run->add_option("--config", run_args.config_file,
                    "key=value config file (falls back to $ONESHOT_CONFIG, then defaults)");
    run->add_option("--set", run_args.overrides, "config override key=value (repeatable)");
    run->add_option("--out", run_args.out, "output directory")->required();
    run->add_option("--dump-masks", run_args.dump_masks, "also write per-frame masks here");
    run->add_option("--dump-patches", run_args.dump_patches,
                    "also write recognizer input patches here");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "score detections against ground truth");
    eval->add_option("--pred", eval_args.pred, "detections.jsonl")->required();
    eval->add_option("--truth", eval_args.truth, "groundtruth.jsonl")->required();
    eval->add_option("--iou", eval_args.iou, "detection match threshold");
    eval->add_flag("--eleven-point", eval_args.eleven_point,
                   "11-point interpolated AP instead of all-point");
    eval->add_option("--json", eval_args.json_out, "also write the report as JSON here");

    CLI::App* version = app.add_subcommand("version", "print version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the usage error
        return code == 0 ? 0 : 1;
    }

    try {
        if (version->parsed()) {
            std::cout << kToolName << " " << kToolVersion << "\n";
            return 0;
        }
        if (synth->parsed()) return cmd_synth(synth_args);
        if (run->parsed()) return cmd_run(run_args);
        if (eval->parsed()) return cmd_eval(eval_args);
    } catch (const BackendTimeout& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const BackendError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const BackendFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back(kToolName);
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace oneshot
