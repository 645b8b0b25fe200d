#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oneshot/font5x7.hpp"
#include "oneshot/geometry.hpp"
#include "oneshot/image.hpp"
#include "oneshot/videoio.hpp"

namespace oneshot {

// ---- plate patch extraction ----

enum class PatchStrategy { Resize, CenterCrop, BackgroundAdd };

PatchStrategy patch_strategy_from_string(const std::string& name);
std::string to_string(PatchStrategy s);

inline constexpr int kPatchSize = 448;    // every strategy emits 448x448
inline constexpr int kCropWindow = 256;   // center-crop window side
inline constexpr int kCanvasSize = 256;   // background-add canvas side

struct PlatePatch {
    Image image;  // kPatchSize x kPatchSize
    PatchStrategy strategy = PatchStrategy::CenterCrop;
    int source_frame = 0;
    BBox source_bbox;
};

// The kCropWindow x kCropWindow window centered on `centroid` (rounded),
// shifted as needed to stay inside the frame; frames smaller than the window
// yield the full frame extent on that axis.
BBox center_crop_window(const Vec2& centroid, int frame_width, int frame_height);

// Where a crop of the given size lands on the background-add canvas: centered,
// after shrink-to-fit for crops larger than the canvas (aspect preserved).
BBox background_add_placement(int crop_width, int crop_height);

// Cuts the recognizer input out of `frame`:
//   Resize        bbox crop stretched to 448x448
//   CenterCrop    256x256 window centered on the mask centroid (bbox center
//                 when no mask is given), then scaled to 448
//   BackgroundAdd bbox crop pasted centered onto a black 256x256 canvas,
//                 then scaled to 448
PlatePatch extract_patch(const Frame& frame, const Detection& det, const Mask* mask,
                         PatchStrategy strategy);

// ---- prompts ----

struct PromptTemplate {
    std::string id;    // "P1".."P6"
    std::string text;  // frozen wording; tests assert byte equality
};

// Throws UnknownPrompt for ids outside P1..P6.
const PromptTemplate& get_prompt(const std::string& id);
const std::vector<PromptTemplate>& all_prompts();

// ---- recognition backends ----

// Caption generator for a plate patch. Implementations must tolerate
// concurrent calls unless max_concurrency() returns 1.
class RecognizerBackend {
public:
    virtual ~RecognizerBackend() = default;
    virtual std::string recognize(const Image& patch, const std::string& prompt) = 0;
    virtual int max_concurrency() const { return 0; }
};

// Desk-scale stand-in for a vision-language model. Runs builtin_ocr on the
// patch and phrases the result as "The license plate reads <text>.". Patches
// with no readable glyphs yield the sentinel caption "no text detected".
// The prompt text is accepted for interface parity and ignored.
class BuiltinOcrRecognizer : public RecognizerBackend {
public:
    std::string recognize(const Image& patch, const std::string& prompt) override;
};

inline constexpr const char* kNoTextSentinel = "no text detected";

// Template-matching OCR over the builtin 5x7 font:
//   - Otsu binarization, dark side is ink;
//   - 8-connected components, minus border-touching blobs, specks, and blobs
//     off the dominant text line;
//   - each remaining component is classified by peak normalized correlation
//     against the font templates on a normalized grid, left to right.
// Throws NoGlyphs when nothing classifiable remains.
std::string builtin_ocr(const Image& patch, std::string_view alphabet = kFontAlphabet);

// ---- caption parsing and sequence aggregation ----

inline constexpr const char* kDefaultPlatePattern = "[A-Z]{3}-?[0-9]{4}";

// First regex match in the caption (case-insensitive), uppercased with
// hyphens/whitespace removed. nullopt when the caption has no match.
std::optional<std::string> parse_plate(const std::string& caption,
                                       const std::string& pattern = kDefaultPlatePattern);

struct PlateVote {
    std::string plate;
    double confidence = 0.0;  // detection confidence of the voting frame
};

// Majority vote; ties resolve to the candidate with the higher mean
// confidence, then to the lexicographically smaller string. nullopt on empty.
std::optional<std::string> majority_plate(const std::vector<PlateVote>& votes);

// Per-instance final plates from per-frame recognitions, using detection
// confidences as tie-break weight. Instances whose frames never parsed to a
// plate get a nullopt entry.
std::vector<InstancePlate> recognize_sequence(const std::vector<RecognitionRecord>& recognitions,
                                              const std::vector<Detection>& detections);

}  // namespace oneshot
