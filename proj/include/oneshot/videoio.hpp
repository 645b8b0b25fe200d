#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oneshot/geometry.hpp"
#include "oneshot/image.hpp"

// File formats:
//   frames        frame_%05d.ppm, binary P6, maxval 255, indices contiguous from 0
//   annotations   JSON  {"query_points": [{"instance": 0, "x": 812.0, "y": 604.5}]}
//   detections    JSONL {"frame", "instance", "bbox": [x0,y0,x1,y1], "confidence", "plate"?}
//   ground truth  same line format as detections with "plate" mandatory
//   recognitions  JSONL {"frame", "instance", "caption", "prompt", "plate"?}
//   masks         binary P5, 0/255

namespace oneshot {

// The one-shot annotation: a single point on the target in frame 0.
struct QueryAnnotation {
    int instance_id = 0;
    Vec2 point;
};

struct Detection {
    int frame_index = 0;
    int instance_id = 0;
    BBox bbox;
    double confidence = 0.0;
    std::optional<std::string> plate;

    friend bool operator==(const Detection&, const Detection&) = default;
};

struct GroundTruthRecord {
    int frame_index = 0;
    int instance_id = 0;
    BBox bbox;
    std::string plate;

    friend bool operator==(const GroundTruthRecord&, const GroundTruthRecord&) = default;
};

struct RecognitionRecord {
    int frame_index = 0;
    int instance_id = 0;
    std::string caption;
    std::string prompt;  // prompt id, e.g. "P6"
    std::optional<std::string> plate;

    friend bool operator==(const RecognitionRecord&, const RecognitionRecord&) = default;
};

// Final plate decision for one instance.
struct InstancePlate {
    int instance_id = 0;
    std::optional<std::string> plate;

    friend bool operator==(const InstancePlate&, const InstancePlate&) = default;
};

// ---- frames ----

// Loads frame_%05d.ppm files from `dir`. Indices must be contiguous from 0
// (a gap throws MissingFrame with the first missing index) and all frames
// must share dimensions (DimensionMismatch otherwise).
VideoSequence load_sequence(const std::filesystem::path& dir);

void save_frame(const std::filesystem::path& dir, const Frame& frame);
void save_sequence(const std::filesystem::path& dir, const VideoSequence& video);

std::filesystem::path frame_filename(int index);

// ---- annotations ----

// When `dims` is given (width, height of frame 0), point coordinates are
// validated against it; negative coordinates are rejected either way.
// An empty query_points list is a ParseError.
std::vector<QueryAnnotation> parse_annotations(const std::string& json_text,
                                               std::optional<std::pair<int, int>> dims = {});
std::vector<QueryAnnotation> load_annotations(const std::filesystem::path& file,
                                              std::optional<std::pair<int, int>> dims = {});
void save_annotations(const std::filesystem::path& file, const std::vector<QueryAnnotation>& annos);

// ---- detections / ground truth / recognitions (JSONL, one object per line) ----

void save_detections(const std::filesystem::path& file, const std::vector<Detection>& dets);
std::vector<Detection> load_detections(const std::filesystem::path& file);

void save_ground_truth(const std::filesystem::path& file, const std::vector<GroundTruthRecord>& gts);
std::vector<GroundTruthRecord> load_ground_truth(const std::filesystem::path& file);

void save_recognitions(const std::filesystem::path& file, const std::vector<RecognitionRecord>& recs);
std::vector<RecognitionRecord> load_recognitions(const std::filesystem::path& file);

// ---- final plates (JSON object, instance id -> plate string) ----

// Instances without a plate are omitted from the file.
void save_plates(const std::filesystem::path& file, const std::vector<InstancePlate>& plates);
std::vector<InstancePlate> load_plates(const std::filesystem::path& file);

// ---- masks ----

void save_mask(const std::filesystem::path& file, const Mask& mask);
Mask load_mask(const std::filesystem::path& file);

// ---- small file helpers ----

std::string read_file(const std::filesystem::path& file);
void write_file(const std::filesystem::path& file, const std::string& bytes);

}  // namespace oneshot
