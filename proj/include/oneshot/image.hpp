#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oneshot/errors.hpp"

namespace oneshot {

// Interleaved 8-bit RGB raster, row-major. Integer pixel coordinates address
// pixel centers; sub-pixel positions are resolved by the sampling helpers.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // 3 * width * height bytes

    static Image filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    std::uint8_t* px(int x, int y) { return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
    const std::uint8_t* px(int x, int y) const {
        return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        std::uint8_t* p = px(x, y);
        p[0] = r;
        p[1] = g;
        p[2] = b;
    }

    friend bool operator==(const Image&, const Image&) = default;
};

// One frame of a sequence. Pixel data is never mutated after construction;
// every pipeline stage works on const references.
struct Frame {
    int index = 0;
    Image image;
};

struct VideoSequence {
    std::vector<Frame> frames;

    std::size_t size() const { return frames.size(); }
    bool empty() const { return frames.empty(); }
    int width() const { return frames.empty() ? 0 : frames.front().image.width; }
    int height() const { return frames.empty() ? 0 : frames.front().image.height; }
};

// Binary foreground mask. `score` is filled by the segmenter with the fraction
// of prompt points that landed inside the final mask.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> fg;  // 0 = background, 1 = foreground
    double score = 0.0;

    static Mask blank(int w, int h);

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    bool at(int x, int y) const { return fg[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { fg[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }

    int area() const;
};

// Rec.601 luma; the single grayscale definition used by tracking and OCR.
inline double luma(const std::uint8_t* p) {
    return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
}
inline double luma_at(const Image& img, int x, int y) { return luma(img.px(x, y)); }

// Bilinear sample at a sub-pixel position. Integer coordinates hit pixel
// centers exactly; samples outside the grid clamp to the border pixel.
void sample_bilinear(const Image& img, double x, double y, double out[3]);

// Center-aligned bilinear resize (the usual image-resampling convention).
Image resize_bilinear(const Image& src, int dst_w, int dst_h);

// Nearest-neighbor resize with the plain floor mapping
//   src_x = floor(x * src_w / dst_w).
// Glyph rendering and OCR template normalization both rely on this exact
// mapping so that scaled binary shapes reproduce pixel-for-pixel.
Image resize_nearest(const Image& src, int dst_w, int dst_h);

// ---- netpbm (de)serialization, used for frames (P6) and masks (P5) ----

std::string encode_ppm(const Image& img);
Image decode_ppm(const std::string& bytes);

std::string encode_pgm(const Mask& mask);           // 0/255 byte values
Mask decode_pgm(const std::string& bytes);          // >127 reads as foreground

}  // namespace oneshot
