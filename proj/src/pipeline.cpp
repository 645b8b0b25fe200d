#include "oneshot/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <optional>
#include <thread>

#include <json.hpp>

#include "oneshot/errors.hpp"
#include "oneshot/point_select.hpp"
#include "oneshot/wire.hpp"

namespace oneshot {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

// Runs one stage, records its wall-clock time, and prefixes the stage name on
// fatal errors. Backend failures keep their type (the CLI maps them to a
// distinct exit code); everything else collapses to the base error type.
template <typename Fn>
void run_stage(std::vector<StageTiming>& timing, const std::string& name, Fn&& fn) {
    const auto t0 = Clock::now();
    try {
        fn();
    } catch (const BackendTimeout& e) {
        throw BackendTimeout(name + " stage: " + e.what());
    } catch (const BackendError& e) {
        throw BackendError(name + " stage: " + e.what(), e.status);
    } catch (const std::exception& e) {
        throw Error(name + " stage: " + e.what());
    }
    timing.push_back({name, ms_between(t0, Clock::now())});
}

int resolve_workers(const Config& cfg, int backend_cap) {
    int workers = cfg.get_int("pipeline.workers");
    if (workers <= 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers <= 0) workers = 4;
    }
    if (backend_cap > 0) workers = std::min(workers, backend_cap);
    return workers;
}

WireOptions wire_options(const Config& cfg) {
    WireOptions opts;
    opts.timeout_ms = cfg.get_int("recog.timeout_ms");
    opts.max_inflight = cfg.get_int("recog.max_inflight");
    return opts;
}

}  // namespace

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const int i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

PipelineBackends make_backends(const Config& cfg, const std::string& frames_ref) {
    PipelineBackends backends;

    const BackendSpec track_spec = parse_backend_spec(cfg.get("track.backend"));
    if (track_spec.builtin) {
        NccTrackerOptions opt;
        opt.patch_radius = cfg.get_int("track.patch_radius");
        opt.search_radius = cfg.get_int("track.search_radius");
        opt.min_score = cfg.get_double("track.min_score");
        opt.lost_after = cfg.get_int("track.lost_after");
        backends.tracker = std::make_shared<NccTracker>(opt);
    } else {
        backends.tracker =
            std::make_shared<ExternalTracker>(track_spec.endpoint, frames_ref, wire_options(cfg));
    }

    const BackendSpec seg_spec = parse_backend_spec(cfg.get("segment.backend"));
    if (seg_spec.builtin) {
        backends.segmenter = std::make_shared<RegionGrowSegmenter>(cfg.get_double("segment.tau"),
                                                                   cfg.get_double("segment.area_cap"));
    } else {
        backends.segmenter = std::make_shared<ExternalSegmenter>(seg_spec.endpoint, wire_options(cfg));
    }

    if (cfg.get_bool("recog.enabled")) {
        const BackendSpec rec_spec = parse_backend_spec(cfg.get("recog.backend"));
        if (rec_spec.builtin) {
            backends.recognizer = std::make_shared<BuiltinOcrRecognizer>();
        } else {
            backends.recognizer =
                std::make_shared<ExternalRecognizer>(rec_spec.endpoint, wire_options(cfg));
        }
    }
    return backends;
}

PipelineOutput run_pipeline(const VideoSequence& video,
                            const std::vector<QueryAnnotation>& annotations, const Config& cfg,
                            const PipelineBackends& backends, const PipelineOptions& opts) {
    if (annotations.empty()) throw AnnotationsEmpty("no query points to run on");
    if (video.empty()) throw MissingFrame(0);

    namespace fs = std::filesystem;
    if (!opts.dump_masks_dir.empty()) fs::create_directories(opts.dump_masks_dir);
    if (!opts.dump_patches_dir.empty()) fs::create_directories(opts.dump_patches_dir);

    PipelineOutput out;
    const auto t_total = Clock::now();
    const int num_frames = static_cast<int>(video.size());

    // 1. Expand each annotated point into the tracking point set.
    std::vector<PointSet> point_sets;
    run_stage(out.timing, "select", [&] {
        const SelectStrategy strategy = select_strategy_from_string(cfg.get("select.strategy"));
        for (const QueryAnnotation& ann : annotations) {
            point_sets.push_back(build_point_set(
                strategy, ann.point, video.frames[0].image, *backends.segmenter,
                cfg.get_double("select.offset_px"), cfg.get_int("select.per_arm"),
                cfg.get_int("select.k"),
                static_cast<std::uint64_t>(cfg.get_int("select.seed")), ann.instance_id));
        }
    });

    // 2. Track every point set, optionally with the backward pass merged in.
    std::vector<std::vector<Trajectory>> tracks(point_sets.size());
    run_stage(out.timing, "track", [&] {
        const bool refine =
            cfg.get_bool("track.backward_refine") && backends.tracker->supports_backward();
        const double drop_px = cfg.get_double("track.drop_threshold_px");
        for (std::size_t i = 0; i < point_sets.size(); ++i) {
            std::vector<Trajectory> forward =
                backends.tracker->track(video, point_sets[i], TrackDirection::Forward);
            tracks[i] = refine ? backward_refine(video, forward, *backends.tracker, drop_px)
                               : std::move(forward);
        }
    });

    // 3. Segment every frame from the points visible there. Parallel across
    // frames; results land in a fixed (frame, instance) grid so ordering does
    // not depend on scheduling.
    const std::size_t cells = static_cast<std::size_t>(num_frames) * point_sets.size();
    std::vector<std::optional<Detection>> det_grid(cells);
    std::vector<std::optional<Mask>> mask_grid(cells);
    run_stage(out.timing, "segment", [&] {
        const int workers = resolve_workers(cfg, backends.segmenter->max_concurrency());
        parallel_for(num_frames, workers, [&](int f) {
            for (std::size_t i = 0; i < point_sets.size(); ++i) {
                std::vector<Vec2> prompts;
                for (const Trajectory& t : tracks[i])
                    if (t.visible[f]) prompts.push_back(t.positions[f]);
                if (prompts.empty()) continue;
                const std::size_t cell = static_cast<std::size_t>(f) * point_sets.size() + i;
                Mask mask;
                det_grid[cell] = detect_frame(video.frames[f], prompts, *backends.segmenter,
                                              point_sets[i].instance_id, &mask);
                if (det_grid[cell]) mask_grid[cell] = std::move(mask);
            }
        });
    });

    for (std::size_t cell = 0; cell < cells; ++cell)
        if (det_grid[cell]) out.detections.push_back(*det_grid[cell]);

    if (!opts.dump_masks_dir.empty()) {
        for (std::size_t cell = 0; cell < cells; ++cell) {
            if (!mask_grid[cell]) continue;
            const Detection& d = *det_grid[cell];
            char name[64];
            std::snprintf(name, sizeof(name), "mask_%05d_i%d.pgm", d.frame_index, d.instance_id);
            save_mask(opts.dump_masks_dir + "/" + name, *mask_grid[cell]);
        }
    }

    // 4. Recognize each detection's patch.
    if (backends.recognizer) {
        const PatchStrategy strategy = patch_strategy_from_string(cfg.get("recog.strategy"));
        const PromptTemplate& prompt = get_prompt(cfg.get("recog.prompt"));
        const std::string pattern = cfg.get("recog.pattern");
        const int n = static_cast<int>(out.detections.size());
        std::vector<RecognitionRecord> recs(n);
        run_stage(out.timing, "recognize", [&] {
            const int workers = resolve_workers(cfg, backends.recognizer->max_concurrency());
            parallel_for(n, workers, [&](int d) {
                const Detection& det = out.detections[d];
                const std::size_t cell =
                    static_cast<std::size_t>(det.frame_index) * point_sets.size();
                const Mask* mask = nullptr;
                for (std::size_t i = 0; i < point_sets.size(); ++i) {
                    if (point_sets[i].instance_id == det.instance_id && mask_grid[cell + i]) {
                        mask = &*mask_grid[cell + i];
                        break;
                    }
                }
                const PlatePatch patch =
                    extract_patch(video.frames[det.frame_index], det, mask, strategy);
                if (!opts.dump_patches_dir.empty()) {
                    char name[64];
                    std::snprintf(name, sizeof(name), "patch_%05d_i%d.ppm", det.frame_index,
                                  det.instance_id);
                    write_file(opts.dump_patches_dir + "/" + name, encode_ppm(patch.image));
                }
                RecognitionRecord rec;
                rec.frame_index = det.frame_index;
                rec.instance_id = det.instance_id;
                rec.prompt = prompt.id;
                rec.caption = backends.recognizer->recognize(patch.image, prompt.text);
                rec.plate = parse_plate(rec.caption, pattern);
                out.detections[d].plate = rec.plate;
                recs[d] = std::move(rec);
            });
        });
        out.recognitions = std::move(recs);

        // 5. One plate per instance by majority vote.
        run_stage(out.timing, "aggregate",
                  [&] { out.plates = recognize_sequence(out.recognitions, out.detections); });
    }

    out.timing.push_back({"total", ms_between(t_total, Clock::now())});
    return out;
}

void save_pipeline_output(const PipelineOutput& out, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    save_detections(out_dir + "/detections.jsonl", out.detections);
    save_recognitions(out_dir + "/recognitions.jsonl", out.recognitions);
    save_plates(out_dir + "/plates.json", out.plates);

    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    for (const StageTiming& t : out.timing)
        stages.push_back({{"stage", t.stage}, {"millis", t.millis}});
    write_file(out_dir + "/timing.json",
               nlohmann::ordered_json{{"stages", stages}}.dump(2) + "\n");
}

}  // namespace oneshot
