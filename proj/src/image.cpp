#include "oneshot/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>

namespace oneshot {

Image Image::filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    Image img;
    img.width = w;
    img.height = h;
    img.rgb.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
        img.rgb[i] = r;
        img.rgb[i + 1] = g;
        img.rgb[i + 2] = b;
    }
    return img;
}

Mask Mask::blank(int w, int h) {
    Mask m;
    m.width = w;
    m.height = h;
    m.fg.assign(static_cast<std::size_t>(w) * h, 0);
    return m;
}

int Mask::area() const {
    int n = 0;
    for (std::uint8_t v : fg) n += (v != 0);
    return n;
}

void sample_bilinear(const Image& img, double x, double y, double out[3]) {
    const double cx = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    const double cy = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    const int x0 = static_cast<int>(std::floor(cx));
    const int y0 = static_cast<int>(std::floor(cy));
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fx = cx - x0;
    const double fy = cy - y0;

    const std::uint8_t* p00 = img.px(x0, y0);
    const std::uint8_t* p10 = img.px(x1, y0);
    const std::uint8_t* p01 = img.px(x0, y1);
    const std::uint8_t* p11 = img.px(x1, y1);
    for (int c = 0; c < 3; ++c) {
        const double top = p00[c] * (1.0 - fx) + p10[c] * fx;
        const double bot = p01[c] * (1.0 - fx) + p11[c] * fx;
        out[c] = top * (1.0 - fy) + bot * fy;
    }
}

Image resize_bilinear(const Image& src, int dst_w, int dst_h) {
    Image dst;
    dst.width = dst_w;
    dst.height = dst_h;
    dst.rgb.resize(static_cast<std::size_t>(dst_w) * dst_h * 3);
    const double sx = static_cast<double>(src.width) / dst_w;
    const double sy = static_cast<double>(src.height) / dst_h;
    double rgb[3];
    for (int y = 0; y < dst_h; ++y) {
        for (int x = 0; x < dst_w; ++x) {
            sample_bilinear(src, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5, rgb);
            std::uint8_t* p = dst.px(x, y);
            for (int c = 0; c < 3; ++c)
                p[c] = static_cast<std::uint8_t>(std::lround(std::clamp(rgb[c], 0.0, 255.0)));
        }
    }
    return dst;
}

Image resize_nearest(const Image& src, int dst_w, int dst_h) {
    Image dst;
    dst.width = dst_w;
    dst.height = dst_h;
    dst.rgb.resize(static_cast<std::size_t>(dst_w) * dst_h * 3);
    for (int y = 0; y < dst_h; ++y) {
        const int sy = static_cast<int>(static_cast<std::int64_t>(y) * src.height / dst_h);
        for (int x = 0; x < dst_w; ++x) {
            const int sx = static_cast<int>(static_cast<std::int64_t>(x) * src.width / dst_w);
            std::memcpy(dst.px(x, y), src.px(sx, sy), 3);
        }
    }
    return dst;
}

namespace {

// Reads the next decimal token of a netpbm header, skipping whitespace and
// '#' comments. Throws MalformedPpm on anything else.
int next_header_int(const std::string& bytes, std::size_t& pos, const char* what) {
    while (pos < bytes.size()) {
        const char c = bytes[pos];
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos])))
        throw MalformedPpm(std::string("expected ") + what + " in netpbm header");
    long v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
        v = v * 10 + (bytes[pos] - '0');
        if (v > 1000000) throw MalformedPpm(std::string(what) + " out of range");
        ++pos;
    }
    return static_cast<int>(v);
}

// Header = magic, width, height, maxval, then exactly one whitespace byte
// before the raster.
std::size_t parse_netpbm_header(const std::string& bytes, const char* magic, int& w, int& h) {
    if (bytes.size() < 2 || bytes[0] != magic[0] || bytes[1] != magic[1])
        throw MalformedPpm(std::string("bad magic, expected ") + magic);
    std::size_t pos = 2;
    w = next_header_int(bytes, pos, "width");
    h = next_header_int(bytes, pos, "height");
    const int maxval = next_header_int(bytes, pos, "maxval");
    if (w <= 0 || h <= 0) throw MalformedPpm("non-positive dimensions");
    if (maxval != 255) throw MalformedPpm("unsupported maxval " + std::to_string(maxval));
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
        throw MalformedPpm("missing whitespace after maxval");
    return pos + 1;
}

}  // namespace

std::string encode_ppm(const Image& img) {
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
    return out;
}

Image decode_ppm(const std::string& bytes) {
    Image img;
    const std::size_t data = parse_netpbm_header(bytes, "P6", img.width, img.height);
    const std::size_t need = static_cast<std::size_t>(img.width) * img.height * 3;
    if (bytes.size() - data < need) throw MalformedPpm("truncated pixel data");
    img.rgb.assign(bytes.begin() + data, bytes.begin() + data + need);
    return img;
}

std::string encode_pgm(const Mask& mask) {
    std::string out =
        "P5\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n255\n";
    out.reserve(out.size() + mask.fg.size());
    for (std::uint8_t v : mask.fg) out.push_back(v ? static_cast<char>(255) : 0);
    return out;
}

Mask decode_pgm(const std::string& bytes) {
    int w = 0, h = 0;
    const std::size_t data = parse_netpbm_header(bytes, "P5", w, h);
    const std::size_t need = static_cast<std::size_t>(w) * h;
    if (bytes.size() - data < need) throw MalformedPpm("truncated pixel data");
    Mask m = Mask::blank(w, h);
    for (std::size_t i = 0; i < need; ++i)
        m.fg[i] = static_cast<std::uint8_t>(bytes[data + i]) > 127 ? 1 : 0;
    return m;
}

}  // namespace oneshot
