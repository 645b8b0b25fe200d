#include "oneshot/recognizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <regex>

#include "oneshot/errors.hpp"
#include "oneshot/evalkit.hpp"

namespace oneshot {

PatchStrategy patch_strategy_from_string(const std::string& name) {
    if (name == "resize") return PatchStrategy::Resize;
    if (name == "center_crop") return PatchStrategy::CenterCrop;
    if (name == "background_add") return PatchStrategy::BackgroundAdd;
    throw ConfigError("unknown patch strategy \"" + name + "\"");
}

std::string to_string(PatchStrategy s) {
    switch (s) {
        case PatchStrategy::Resize: return "resize";
        case PatchStrategy::CenterCrop: return "center_crop";
        case PatchStrategy::BackgroundAdd: return "background_add";
    }
    return "?";
}

// ---- patch extraction ----

namespace {

struct IntRect {
    int x0, y0, x1, y1;  // half-open
    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
};

IntRect bbox_pixels(const BBox& b, int fw, int fh) {
    IntRect r;
    r.x0 = std::clamp(static_cast<int>(std::floor(b.x0)), 0, fw - 1);
    r.y0 = std::clamp(static_cast<int>(std::floor(b.y0)), 0, fh - 1);
    r.x1 = std::clamp(static_cast<int>(std::ceil(b.x1)), r.x0 + 1, fw);
    r.y1 = std::clamp(static_cast<int>(std::ceil(b.y1)), r.y0 + 1, fh);
    return r;
}

Image crop(const Image& src, const IntRect& r) {
    Image out;
    out.width = r.width();
    out.height = r.height();
    out.rgb.resize(static_cast<std::size_t>(out.width) * out.height * 3);
    for (int y = 0; y < out.height; ++y)
        std::copy_n(src.px(r.x0, r.y0 + y), static_cast<std::size_t>(out.width) * 3,
                    out.px(0, y));
    return out;
}

Vec2 mask_centroid(const Mask& m) {
    double sx = 0.0, sy = 0.0;
    int n = 0;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.at(x, y)) {
                sx += x;
                sy += y;
                ++n;
            }
    return {sx / n, sy / n};
}

}  // namespace

BBox center_crop_window(const Vec2& centroid, int frame_width, int frame_height) {
    const int win_w = std::min(kCropWindow, frame_width);
    const int win_h = std::min(kCropWindow, frame_height);
    int x0 = static_cast<int>(std::lround(centroid.x)) - kCropWindow / 2;
    int y0 = static_cast<int>(std::lround(centroid.y)) - kCropWindow / 2;
    x0 = std::clamp(x0, 0, frame_width - win_w);
    y0 = std::clamp(y0, 0, frame_height - win_h);
    return {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x0 + win_w),
            static_cast<double>(y0 + win_h)};
}

BBox background_add_placement(int crop_width, int crop_height) {
    int tw = crop_width, th = crop_height;
    if (crop_width > kCanvasSize || crop_height > kCanvasSize) {
        const double scale = std::min(static_cast<double>(kCanvasSize) / crop_width,
                                      static_cast<double>(kCanvasSize) / crop_height);
        tw = std::clamp(static_cast<int>(std::floor(crop_width * scale)), 1, kCanvasSize);
        th = std::clamp(static_cast<int>(std::floor(crop_height * scale)), 1, kCanvasSize);
    }
    const int x0 = (kCanvasSize - tw) / 2;
    const int y0 = (kCanvasSize - th) / 2;
    return {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x0 + tw),
            static_cast<double>(y0 + th)};
}

PlatePatch extract_patch(const Frame& frame, const Detection& det, const Mask* mask,
                         PatchStrategy strategy) {
    const Image& img = frame.image;
    PlatePatch patch;
    patch.strategy = strategy;
    patch.source_frame = frame.index;
    patch.source_bbox = det.bbox;

    switch (strategy) {
        case PatchStrategy::Resize: {
            const Image cut = crop(img, bbox_pixels(det.bbox, img.width, img.height));
            patch.image = resize_bilinear(cut, kPatchSize, kPatchSize);
            break;
        }
        case PatchStrategy::CenterCrop: {
            const Vec2 c =
                (mask && mask->area() > 0) ? mask_centroid(*mask) : det.bbox.center();
            const BBox w = center_crop_window(c, img.width, img.height);
            const IntRect r{static_cast<int>(w.x0), static_cast<int>(w.y0),
                            static_cast<int>(w.x1), static_cast<int>(w.y1)};
            patch.image = resize_bilinear(crop(img, r), kPatchSize, kPatchSize);
            break;
        }
        case PatchStrategy::BackgroundAdd: {
            const Image cut = crop(img, bbox_pixels(det.bbox, img.width, img.height));
            const BBox at = background_add_placement(cut.width, cut.height);
            const int tw = static_cast<int>(at.width()), th = static_cast<int>(at.height());
            const Image scaled =
                (tw == cut.width && th == cut.height) ? cut : resize_bilinear(cut, tw, th);
            Image canvas = Image::filled(kCanvasSize, kCanvasSize, 0, 0, 0);
            for (int y = 0; y < th; ++y)
                std::copy_n(scaled.px(0, y), static_cast<std::size_t>(tw) * 3,
                            canvas.px(static_cast<int>(at.x0), static_cast<int>(at.y0) + y));
            patch.image = resize_bilinear(canvas, kPatchSize, kPatchSize);
            break;
        }
    }
    return patch;
}

// ---- prompts ----

// Frozen wording, quirks included; tests assert byte equality.
const std::vector<PromptTemplate>& all_prompts() {
    static const std::vector<PromptTemplate> prompts = {
        {"P1", "What is the license plate number?"},
        {"P2", "What is the text on this licesne plate?"},
        {"P3",
         "Please describe the texts in this image step-by-step, especially the license plate."},
        {"P4",
         "The license plates are always located at the bottom of vehicle. Please describe the "
         "texts in this image step-by-step, especially the license plate."},
        {"P5",
         "Please describe the texts in this image detailly, especially the license plate. When "
         "you read the texts, please read them step-by-step and consider the locations of all "
         "characters."},
        {"P6",
         "Please describe the texts in this image detailly, especially the license plate. The "
         "license plates are always located at the bottom of vehicle. When you read the texts, "
         "please read them step-by-step and consider the locations of all characters."},
    };
    return prompts;
}

const PromptTemplate& get_prompt(const std::string& id) {
    for (const PromptTemplate& p : all_prompts())
        if (p.id == id) return p;
    throw UnknownPrompt("no prompt with id \"" + id + "\"");
}

// ---- builtin OCR ----

namespace {

constexpr int kTplW = 20;  // normalized comparison grid
constexpr int kTplH = 28;
constexpr int kTplScale = 4;  // template render scale
constexpr double kMinGlyphScore = 0.55;
constexpr int kMinComponentArea = 6;

struct Bitmap {
    int width = 0, height = 0;
    std::vector<std::uint8_t> v;
    bool at(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x] != 0; }
};

// Aspect-preserving normalization onto the kTplW x kTplH grid with the plain
// floor sampling map. An integer-scaled copy of a shape lands on exactly the
// same normalized raster as the shape itself, so clean renders match their
// template bit for bit.
Bitmap normalize_shape(const Bitmap& in) {
    Bitmap out;
    out.width = kTplW;
    out.height = kTplH;
    out.v.assign(static_cast<std::size_t>(kTplW) * kTplH, 0);
    const double c = std::min(static_cast<double>(kTplW) / in.width,
                              static_cast<double>(kTplH) / in.height);
    const int tw = std::clamp(static_cast<int>(std::lround(in.width * c)), 1, kTplW);
    const int th = std::clamp(static_cast<int>(std::lround(in.height * c)), 1, kTplH);
    const int ox = (kTplW - tw) / 2;
    const int oy = (kTplH - th) / 2;
    for (int y = 0; y < th; ++y) {
        const int sy = static_cast<int>(static_cast<std::int64_t>(y) * in.height / th);
        for (int x = 0; x < tw; ++x) {
            const int sx = static_cast<int>(static_cast<std::int64_t>(x) * in.width / tw);
            out.v[static_cast<std::size_t>(oy + y) * kTplW + (ox + x)] = in.at(sx, sy) ? 1 : 0;
        }
    }
    return out;
}

double bitmap_ncc(const Bitmap& a, const Bitmap& b) {
    const std::size_t n = a.v.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a.v[i];
        mb += b.v[i];
    }
    ma /= n;
    mb /= n;
    double dot = 0.0, sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a.v[i] - ma;
        const double db = b.v[i] - mb;
        dot += da * db;
        sa += da * da;
        sb += db * db;
    }
    if (sa <= 0.0 || sb <= 0.0) return -1.0;
    return dot / std::sqrt(sa * sb);
}

struct GlyphTemplate {
    char ch;
    Bitmap normalized;
};

std::vector<GlyphTemplate> build_templates(std::string_view alphabet) {
    std::vector<GlyphTemplate> out;
    for (char c : alphabet) {
        const Glyph5x7& g = font_glyph(c);
        int x0, y0, x1, y1;
        glyph_tight_bounds(g, x0, y0, x1, y1);
        Bitmap raw;
        raw.width = (x1 - x0) * kTplScale;
        raw.height = (y1 - y0) * kTplScale;
        raw.v.assign(static_cast<std::size_t>(raw.width) * raw.height, 0);
        for (int y = 0; y < raw.height; ++y)
            for (int x = 0; x < raw.width; ++x)
                raw.v[static_cast<std::size_t>(y) * raw.width + x] =
                    g.on(x0 + x / kTplScale, y0 + y / kTplScale) ? 1 : 0;
        out.push_back({c, normalize_shape(raw)});
    }
    return out;
}

// Otsu threshold over a 256-bin histogram; foreground is the dark side
// (value <= t). Returns -1 when the image has a single gray level.
int otsu_threshold(const std::array<long, 256>& hist, long total) {
    double sum_all = 0.0;
    for (int i = 0; i < 256; ++i) sum_all += static_cast<double>(i) * hist[i];
    long w0 = 0;
    double sum0 = 0.0, best = 0.0;
    int best_t = -1;
    for (int t = 0; t < 256; ++t) {
        w0 += hist[t];
        if (w0 == 0) continue;
        const long w1 = total - w0;
        if (w1 == 0) break;
        sum0 += static_cast<double>(t) * hist[t];
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double var = static_cast<double>(w0) * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best) {
            best = var;
            best_t = t;
        }
    }
    return best_t;
}

struct InkComponent {
    int x0, y0, x1, y1;  // half-open bounds
    int area = 0;
    bool touches_border = false;
    std::vector<int> pixels;  // linear indices
    double ycenter() const { return (y0 + y1) / 2.0; }
    int height() const { return y1 - y0; }
};

}  // namespace

std::string builtin_ocr(const Image& patch, std::string_view alphabet) {
    const int w = patch.width, h = patch.height;
    const long total = static_cast<long>(w) * h;

    std::vector<std::uint8_t> gray(total);
    std::array<long, 256> hist{};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int v = static_cast<int>(std::lround(luma_at(patch, x, y)));
            gray[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
            ++hist[std::clamp(v, 0, 255)];
        }
    const int t = otsu_threshold(hist, total);
    if (t < 0) throw NoGlyphs("patch has no contrast");

    std::vector<std::uint8_t> ink(total);
    for (long i = 0; i < total; ++i) ink[i] = gray[i] <= t ? 1 : 0;

    // Connected components of the ink.
    std::vector<InkComponent> comps;
    std::vector<std::uint8_t> seen(total, 0);
    std::deque<int> queue;
    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            const int si = sy * w + sx;
            if (!ink[si] || seen[si]) continue;
            InkComponent comp{sx, sy, sx + 1, sy + 1, 0, false, {}};
            seen[si] = 1;
            queue.push_back(si);
            while (!queue.empty()) {
                const int i = queue.front();
                queue.pop_front();
                const int x = i % w, y = i / w;
                comp.pixels.push_back(i);
                ++comp.area;
                comp.x0 = std::min(comp.x0, x);
                comp.y0 = std::min(comp.y0, y);
                comp.x1 = std::max(comp.x1, x + 1);
                comp.y1 = std::max(comp.y1, y + 1);
                if (x == 0 || y == 0 || x == w - 1 || y == h - 1) comp.touches_border = true;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        const int ni = ny * w + nx;
                        if (ink[ni] && !seen[ni]) {
                            seen[ni] = 1;
                            queue.push_back(ni);
                        }
                    }
            }
            comps.push_back(std::move(comp));
        }
    }

    // Border blobs are backdrop, specks are noise, huge blobs are fill.
    std::vector<const InkComponent*> kept;
    for (const InkComponent& c : comps) {
        if (c.touches_border || c.area < kMinComponentArea) continue;
        if (c.area > total * 2 / 5) continue;
        kept.push_back(&c);
    }
    if (kept.empty()) throw NoGlyphs("no candidate glyph components");

    // Keep the dominant text line: components whose vertical center sits near
    // the median center (tolerance scaled by the median glyph height).
    auto median_of = [](std::vector<double> vals) {
        std::sort(vals.begin(), vals.end());
        const std::size_t n = vals.size();
        return n % 2 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
    };
    std::vector<double> centers, heights;
    for (const InkComponent* c : kept) {
        centers.push_back(c->ycenter());
        heights.push_back(c->height());
    }
    const double line_y = median_of(centers);
    const double line_h = median_of(heights);
    std::vector<const InkComponent*> line;
    for (const InkComponent* c : kept)
        if (std::abs(c->ycenter() - line_y) <= 0.75 * line_h) line.push_back(c);
    if (line.empty()) throw NoGlyphs("no components on a common text line");

    std::sort(line.begin(), line.end(),
              [](const InkComponent* a, const InkComponent* b) { return a->x0 < b->x0; });

    const std::vector<GlyphTemplate> templates = build_templates(alphabet);
    std::string text;
    for (const InkComponent* c : line) {
        Bitmap shape;
        shape.width = c->x1 - c->x0;
        shape.height = c->y1 - c->y0;
        shape.v.assign(static_cast<std::size_t>(shape.width) * shape.height, 0);
        for (int i : c->pixels) {
            const int x = i % w - c->x0;
            const int y = i / w - c->y0;
            shape.v[static_cast<std::size_t>(y) * shape.width + x] = 1;
        }
        const Bitmap norm = normalize_shape(shape);
        char best_ch = 0;
        double best_score = -2.0;
        for (const GlyphTemplate& tpl : templates) {
            const double s = bitmap_ncc(norm, tpl.normalized);
            if (s > best_score) {
                best_score = s;
                best_ch = tpl.ch;
            }
        }
        if (best_score >= kMinGlyphScore) text.push_back(best_ch);
    }
    if (text.empty()) throw NoGlyphs("no component matched a glyph template");
    return text;
}

std::string BuiltinOcrRecognizer::recognize(const Image& patch, const std::string& prompt) {
    (void)prompt;
    try {
        return "The license plate reads " + builtin_ocr(patch) + ".";
    } catch (const NoGlyphs&) {
        return kNoTextSentinel;
    }
}

// ---- caption parsing and aggregation ----

std::optional<std::string> parse_plate(const std::string& caption, const std::string& pattern) {
    std::regex re;
    try {
        re = std::regex(pattern, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
        throw ConfigError("invalid plate pattern \"" + pattern + "\": " + e.what());
    }
    std::smatch m;
    if (!std::regex_search(caption, m, re)) return std::nullopt;
    return normalize_plate(m[0].str());
}

std::optional<std::string> majority_plate(const std::vector<PlateVote>& votes) {
    if (votes.empty()) return std::nullopt;
    struct Tally {
        int count = 0;
        double conf_sum = 0.0;
    };
    std::map<std::string, Tally> tallies;
    for (const PlateVote& v : votes) {
        Tally& t = tallies[v.plate];
        ++t.count;
        t.conf_sum += v.confidence;
    }
    const std::string* best = nullptr;
    double best_mean = 0.0;
    int best_count = 0;
    for (const auto& [plate, t] : tallies) {
        const double mean = t.conf_sum / t.count;
        if (!best || t.count > best_count ||
            (t.count == best_count && mean > best_mean + 1e-12)) {
            best = &plate;
            best_count = t.count;
            best_mean = mean;
        }
        // std::map iterates keys in order, so the first of an exact tie (the
        // lexicographically smaller plate) stays selected.
    }
    return *best;
}

std::vector<InstancePlate> recognize_sequence(const std::vector<RecognitionRecord>& recognitions,
                                              const std::vector<Detection>& detections) {
    std::map<std::pair<int, int>, double> conf;
    for (const Detection& d : detections) conf[{d.frame_index, d.instance_id}] = d.confidence;

    std::map<int, std::vector<PlateVote>> votes;
    for (const RecognitionRecord& r : recognitions) {
        votes.try_emplace(r.instance_id);
        if (!r.plate) continue;
        const auto it = conf.find({r.frame_index, r.instance_id});
        votes[r.instance_id].push_back({*r.plate, it == conf.end() ? 0.0 : it->second});
    }

    std::vector<InstancePlate> out;
    for (const auto& [inst, v] : votes) out.push_back({inst, majority_plate(v)});
    return out;
}

}  // namespace oneshot
