#pragma once

// 8-bit grayscale raster and binary image containers, PGM (P5) export, crop
// and bilinear resize. All pipelines trade images as these value types.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "panelbot/core.hpp"

namespace panelbot::img {

struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> intensity;  // row-major

    RasterImage() = default;
    RasterImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), intensity(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t at(int x, int y) const {
        return intensity[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return intensity[static_cast<std::size_t>(y) * width + x];
    }
    bool inside(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
    // Clamped access for border handling.
    std::uint8_t at_clamped(int x, int y) const {
        x = std::clamp(x, 0, width - 1);
        y = std::clamp(y, 0, height - 1);
        return at(x, y);
    }
};

struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // 0 or 1, row-major

    BinaryImage() = default;
    BinaryImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t at(int x, int y) const {
        return bits[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return bits[static_cast<std::size_t>(y) * width + x];
    }
    bool inside(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
};

// Integer pixel rectangle: x, y = top-left corner.
struct Rect {
    int x = 0, y = 0, w = 0, h = 0;

    int x2() const { return x + w; }
    int y2() const { return y + h; }
    bool contains(int px, int py) const {
        return px >= x && px < x2() && py >= y && py < y2();
    }
    double area() const { return static_cast<double>(w) * h; }
};

inline double iou(const Rect& a, const Rect& b) {
    const int ix = std::max(a.x, b.x);
    const int iy = std::max(a.y, b.y);
    const int ix2 = std::min(a.x2(), b.x2());
    const int iy2 = std::min(a.y2(), b.y2());
    if (ix2 <= ix || iy2 <= iy) return 0.0;
    const double inter = static_cast<double>(ix2 - ix) * (iy2 - iy);
    return inter / (a.area() + b.area() - inter);
}

// Clip a rect to image bounds; returns whether clipping changed it.
inline bool clip_rect(Rect& r, int width, int height) {
    const Rect before = r;
    const int x1 = std::clamp(r.x, 0, width);
    const int y1 = std::clamp(r.y, 0, height);
    const int x2 = std::clamp(r.x2(), 0, width);
    const int y2 = std::clamp(r.y2(), 0, height);
    r = {x1, y1, std::max(0, x2 - x1), std::max(0, y2 - y1)};
    return r.x != before.x || r.y != before.y || r.w != before.w || r.h != before.h;
}

inline RasterImage crop(const RasterImage& src, const Rect& r) {
    Rect c = r;
    clip_rect(c, src.width, src.height);
    RasterImage out(c.w, c.h);
    for (int y = 0; y < c.h; ++y)
        for (int x = 0; x < c.w; ++x) out.at(x, y) = src.at(c.x + x, c.y + y);
    return out;
}

inline RasterImage resize_bilinear(const RasterImage& src, int new_w, int new_h) {
    require(new_w > 0 && new_h > 0 && src.width > 0 && src.height > 0,
            "degenerate-input", "resize of empty image");
    RasterImage out(new_w, new_h);
    const double sx = static_cast<double>(src.width) / new_w;
    const double sy = static_cast<double>(src.height) / new_h;
    for (int y = 0; y < new_h; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        const int y0 = static_cast<int>(std::floor(fy));
        const double wy = fy - y0;
        for (int x = 0; x < new_w; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            const int x0 = static_cast<int>(std::floor(fx));
            const double wx = fx - x0;
            const double v00 = src.at_clamped(x0, y0);
            const double v10 = src.at_clamped(x0 + 1, y0);
            const double v01 = src.at_clamped(x0, y0 + 1);
            const double v11 = src.at_clamped(x0 + 1, y0 + 1);
            const double v = (1 - wy) * ((1 - wx) * v00 + wx * v10) +
                             wy * ((1 - wx) * v01 + wx * v11);
            out.at(x, y) = static_cast<std::uint8_t>(std::clamp(v + 0.5, 0.0, 255.0));
        }
    }
    return out;
}

// Portable graymap (binary P5).
inline void write_pgm(const RasterImage& image, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), "config-error", "cannot open " + path + " for writing");
    f << "P5\n" << image.width << " " << image.height << "\n255\n";
    f.write(reinterpret_cast<const char*>(image.intensity.data()),
            static_cast<std::streamsize>(image.intensity.size()));
}

inline RasterImage read_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), "config-error", "cannot open " + path);
    std::string magic;
    f >> magic;
    require(magic == "P5", "config-error", path + " is not a binary PGM");
    int w = 0, h = 0, maxv = 0;
    f >> w >> h >> maxv;
    require(w > 0 && h > 0 && maxv == 255, "config-error", "unsupported PGM header in " + path);
    f.get();  // single whitespace after header
    RasterImage image(w, h);
    f.read(reinterpret_cast<char*>(image.intensity.data()),
           static_cast<std::streamsize>(image.intensity.size()));
    require(f.gcount() == static_cast<std::streamsize>(image.intensity.size()),
            "config-error", "truncated PGM " + path);
    return image;
}

}  // namespace panelbot::img
