#pragma once

// End-to-end orchestration: query annotations are expanded to point sets,
// tracked across the sequence, segmented per frame, recognized, and
// aggregated to one plate string per instance.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "oneshot/config.hpp"
#include "oneshot/recognizer.hpp"
#include "oneshot/segmenter.hpp"
#include "oneshot/tracker.hpp"
#include "oneshot/videoio.hpp"

namespace oneshot {

struct StageTiming {
    std::string stage;
    double millis = 0.0;
};

struct PipelineOutput {
    std::vector<Detection> detections;            // ordered by (frame, instance)
    std::vector<RecognitionRecord> recognitions;  // same order, detections with captions
    std::vector<InstancePlate> plates;            // one entry per instance
    std::vector<StageTiming> timing;              // select, track, segment, recognize, total
};

// The three stage backends. make_backends resolves each from the config
// ("builtin" or "external:<url>"); tests can inject their own.
struct PipelineBackends {
    std::shared_ptr<TrackerBackend> tracker;
    std::shared_ptr<SegmenterBackend> segmenter;
    std::shared_ptr<RecognizerBackend> recognizer;  // null when recognition is disabled
};

// frames_ref is the frame-directory path forwarded to external trackers,
// which receive frames by reference rather than inline.
PipelineBackends make_backends(const Config& cfg, const std::string& frames_ref);

struct PipelineOptions {
    std::string dump_masks_dir;    // when set, per-detection masks as P5 PGM
    std::string dump_patches_dir;  // when set, recognizer input patches as P6 PPM
};

// Runs all stages. Throws AnnotationsEmpty on an empty annotation list;
// a stage's fatal error propagates with the stage name prefixed (backend
// errors keep their type so callers can distinguish them). Per-frame
// segmentation misses are soft: the frame simply has no detection.
PipelineOutput run_pipeline(const VideoSequence& video,
                            const std::vector<QueryAnnotation>& annotations, const Config& cfg,
                            const PipelineBackends& backends, const PipelineOptions& opts = {});

// Writes detections.jsonl, recognitions.jsonl, plates.json, timing.json.
void save_pipeline_output(const PipelineOutput& out, const std::string& out_dir);

// Bounded parallel map: fn(i) for i in [0, n), at most `workers` at a time
// (0 = hardware concurrency). The first exception wins and is rethrown after
// all workers finish.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace oneshot
