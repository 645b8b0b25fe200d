#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "oneshot/image.hpp"

namespace oneshot {

// Fixed 5x7 bitmap font covering A-Z, 0-9 and '-'. Column-major encoding,
// one byte per column, bit 0 = top row. Shapes follow the classic 5x7 LCD
// set, which keeps look-alike pairs (0/O, 1/I, B/8, 2/Z, 5/S) distinct.
struct Glyph5x7 {
    char ch;
    std::array<std::uint8_t, 5> cols;

    bool on(int x, int y) const { return (cols[x] >> y) & 1; }
};

inline constexpr int kGlyphCols = 5;
inline constexpr int kGlyphRows = 7;

constexpr std::string_view kFontAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-";

// Throws UnknownGlyph for characters outside the alphabet.
const Glyph5x7& font_glyph(char c);

// Tight bounds of the lit pixels inside the 5x7 cell.
void glyph_tight_bounds(const Glyph5x7& g, int& x0, int& y0, int& x1, int& y1);

// Renders one glyph into `dst` at integer scale (block replication), top-left
// pixel of the 5x7 cell at (x, y). Pixels outside the image are skipped.
void draw_glyph(Image& dst, const Glyph5x7& g, int x, int y, int scale,
                std::uint8_t r, std::uint8_t gr, std::uint8_t b);

}  // namespace oneshot
