#pragma once

// From-scratch classical image primitives: Otsu threshold, Suzuki border
// following, monotone-chain convex hull with convexity defects, Canny edges,
// probabilistic Hough segments, and LBP cell histograms.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "panelbot/core.hpp"
#include "panelbot/image.hpp"

namespace panelbot::vision {

using img::BinaryImage;
using img::RasterImage;

// ---------------------------------------------------------------------------
// Otsu threshold
// ---------------------------------------------------------------------------

// Threshold maximizing between-class variance over the 256-bin histogram.
// Class A = pixels <= t, class B = pixels > t; ties resolve to the lowest t.
// The returned binary has bit 1 for pixels above the threshold.
inline std::pair<int, BinaryImage> otsu_threshold(const RasterImage& image) {
    require(image.width > 0 && image.height > 0, "degenerate-input", "otsu of empty image");

    std::array<double, 256> hist{};
    for (std::uint8_t v : image.intensity) hist[v] += 1.0;
    const double total = static_cast<double>(image.intensity.size());

    double sum_all = 0.0;
    for (int i = 0; i < 256; ++i) sum_all += i * hist[i];

    int best_t = 0;
    double best_var = -1.0;
    double w0 = 0.0, sum0 = 0.0;
    for (int t = 0; t < 256; ++t) {
        w0 += hist[t];
        sum0 += t * hist[t];
        const double w1 = total - w0;
        if (w0 <= 0.0 || w1 <= 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var + 1e-9) {
            best_var = var;
            best_t = t;
        }
    }

    BinaryImage out(image.width, image.height);
    for (std::size_t i = 0; i < image.intensity.size(); ++i)
        out.bits[i] = image.intensity[i] > best_t ? 1 : 0;
    return {best_t, out};
}

inline BinaryImage invert(const BinaryImage& b) {
    BinaryImage out = b;
    for (auto& v : out.bits) v = v ? 0 : 1;
    return out;
}

// ---------------------------------------------------------------------------
// Suzuki border following
// ---------------------------------------------------------------------------

struct PixelPoint {
    int x = 0;
    int y = 0;
    bool operator==(const PixelPoint&) const = default;
};

struct Contour {
    std::vector<PixelPoint> points;
    bool hole = false;  // outer border when false
};

namespace detail {
// Clockwise 8-neighborhood, starting east.
inline constexpr std::array<std::array<int, 2>, 8> kNbr8 = {
    {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

inline int dir_from_to(const PixelPoint& a, const PixelPoint& b) {
    for (int k = 0; k < 8; ++k)
        if (a.x + kNbr8[k][0] == b.x && a.y + kNbr8[k][1] == b.y) return k;
    return -1;
}
}  // namespace detail

// Border following after Suzuki-Abe. Every 8-connected foreground component
// yields exactly one outer contour; enclosed background regions yield hole
// contours traced along the surrounding foreground pixels.
inline std::vector<Contour> trace_contours(const BinaryImage& binary) {
    const int w = binary.width, h = binary.height;
    std::vector<Contour> contours;
    if (w == 0 || h == 0) return contours;

    // f-values: 0 background, 1 unvisited foreground, |v| >= 2 border labels.
    std::vector<int> f(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            f[static_cast<std::size_t>(y) * w + x] = binary.at(x, y) ? 1 : 0;
    auto fv = [&](int x, int y) -> int& { return f[static_cast<std::size_t>(y) * w + x]; };
    auto fv_or0 = [&](int x, int y) -> int {
        return (x >= 0 && x < w && y >= 0 && y < h) ? fv(x, y) : 0;
    };

    int nbd = 1;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int v = fv(x, y);
            if (v == 0) continue;

            bool outer = false, holeb = false;
            PixelPoint start{x, y}, from;
            if (v == 1 && fv_or0(x - 1, y) == 0) {
                outer = true;
                from = {x - 1, y};
            } else if (v >= 1 && fv_or0(x + 1, y) == 0) {
                holeb = true;
                from = {x + 1, y};
            } else {
                continue;
            }
            ++nbd;

            Contour contour;
            contour.hole = holeb;

            // 3.1: first nonzero neighbor clockwise from `from`.
            int dir0 = detail::dir_from_to(start, from);
            int found = -1;
            for (int k = 1; k <= 8; ++k) {
                const int d = (dir0 + k) % 8;
                if (fv_or0(start.x + detail::kNbr8[d][0], start.y + detail::kNbr8[d][1]) != 0) {
                    found = d;
                    break;
                }
            }
            if (found < 0) {
                fv(start.x, start.y) = -nbd;  // isolated pixel
                contour.points.push_back(start);
                contours.push_back(std::move(contour));
                continue;
            }

            PixelPoint p1{start.x + detail::kNbr8[found][0], start.y + detail::kNbr8[found][1]};
            PixelPoint p2 = p1;   // previously examined
            PixelPoint p3 = start;  // current border pixel

            while (true) {
                // 3.3: counterclockwise from the neighbor after p2 around p3.
                const int dprev = detail::dir_from_to(p3, p2);
                PixelPoint p4;
                bool examined_right_zero = false;
                for (int k = 1; k <= 8; ++k) {
                    const int d = ((dprev - k) % 8 + 8) % 8;
                    const int nx = p3.x + detail::kNbr8[d][0];
                    const int ny = p3.y + detail::kNbr8[d][1];
                    if (fv_or0(nx, ny) != 0) {
                        p4 = {nx, ny};
                        break;
                    }
                    if (nx == p3.x + 1 && ny == p3.y) examined_right_zero = true;
                }

                contour.points.push_back(p3);
                if (examined_right_zero)
                    fv(p3.x, p3.y) = -nbd;
                else if (fv(p3.x, p3.y) == 1)
                    fv(p3.x, p3.y) = nbd;

                if (p4 == start && p3 == p1) break;
                p2 = p3;
                p3 = p4;
            }
            contours.push_back(std::move(contour));
        }
    }
    return contours;
}

// ---------------------------------------------------------------------------
// Convex hull (monotone chain) and convexity defects
// ---------------------------------------------------------------------------

inline double cross2(const PixelPoint& o, const PixelPoint& a, const PixelPoint& b) {
    return static_cast<double>(a.x - o.x) * (b.y - o.y) -
           static_cast<double>(a.y - o.y) * (b.x - o.x);
}

// Minimal convex polygon over the points, counter-clockwise, collinear
// interior vertices removed.
inline std::vector<PixelPoint> convex_hull(std::vector<PixelPoint> pts) {
    require(pts.size() >= 3, "degenerate-input", "convex hull needs at least 3 points");
    std::sort(pts.begin(), pts.end(), [](const PixelPoint& a, const PixelPoint& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    const std::size_t n = pts.size();
    std::vector<PixelPoint> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {  // lower
        while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
        while (k >= t && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k > 1 ? k - 1 : k);
    require(hull.size() >= 3, "degenerate-hull", "all points collinear");
    return hull;
}

struct ConvexityDefect {
    PixelPoint hull_start;  // hull chord endpoints on the contour
    PixelPoint hull_end;
    PixelPoint deep;  // deepest contour point between them
    double depth = 0.0;
    // Sub-pixel deep point: centroid of the near-maximal depth arc; lateral
    // quantization of single pixels otherwise dominates angle estimates.
    double deep_u = 0.0, deep_v = 0.0;
};

// Defects of a closed contour against its own convex hull: for each hull
// chord, the contour point between the chord endpoints with maximum
// perpendicular distance.
inline std::vector<ConvexityDefect> convexity_defects(const std::vector<PixelPoint>& contour) {
    require(contour.size() >= 3, "degenerate-input", "defects need a closed contour");

    const auto hull = convex_hull(contour);

    // Map hull vertices back to contour indices (first occurrence).
    std::vector<std::size_t> hull_idx;
    hull_idx.reserve(hull.size());
    for (const PixelPoint& hp : hull) {
        for (std::size_t i = 0; i < contour.size(); ++i) {
            if (contour[i] == hp) {
                hull_idx.push_back(i);
                break;
            }
        }
    }
    std::sort(hull_idx.begin(), hull_idx.end());
    hull_idx.erase(std::unique(hull_idx.begin(), hull_idx.end()), hull_idx.end());
    if (hull_idx.size() < 2) return {};

    std::vector<ConvexityDefect> defects;
    const std::size_t n = contour.size();
    for (std::size_t k = 0; k < hull_idx.size(); ++k) {
        const std::size_t i0 = hull_idx[k];
        const std::size_t i1 = hull_idx[(k + 1) % hull_idx.size()];
        const PixelPoint a = contour[i0];
        const PixelPoint b = contour[i1];
        const double len = std::hypot(static_cast<double>(b.x - a.x),
                                      static_cast<double>(b.y - a.y));
        if (len <= 0.0) continue;

        // Depths along the contour between the chord endpoints; the deep point
        // is the midpoint of the maximal tied run (flat-bottomed defects
        // otherwise resolve to an arbitrary corner).
        std::vector<std::pair<std::size_t, double>> run;
        for (std::size_t i = (i0 + 1) % n; i != i1; i = (i + 1) % n)
            run.emplace_back(i, std::fabs(cross2(a, b, contour[i])) / len);
        if (run.empty()) continue;
        double max_depth = 0.0;
        std::size_t argmax = 0;
        for (std::size_t k = 0; k < run.size(); ++k)
            if (run[k].second > max_depth) {
                max_depth = run[k].second;
                argmax = k;
            }
        if (max_depth <= 0.0) continue;
        std::size_t lo = argmax, hi = argmax;
        while (lo > 0 && run[lo - 1].second >= max_depth - 0.5) --lo;
        while (hi + 1 < run.size() && run[hi + 1].second >= max_depth - 0.5) ++hi;
        ConvexityDefect d{a, b, contour[run[(lo + hi) / 2].first], max_depth, 0.0, 0.0};
        std::size_t wlo = argmax, whi = argmax;
        while (wlo > 0 && run[wlo - 1].second >= max_depth - 1.5) --wlo;
        while (whi + 1 < run.size() && run[whi + 1].second >= max_depth - 1.5) ++whi;
        double su = 0.0, sv = 0.0;
        for (std::size_t k = wlo; k <= whi; ++k) {
            su += contour[run[k].first].x;
            sv += contour[run[k].first].y;
        }
        d.deep_u = su / static_cast<double>(whi - wlo + 1);
        d.deep_v = sv / static_cast<double>(whi - wlo + 1);
        defects.push_back(d);
    }
    return defects;
}

// ---------------------------------------------------------------------------
// Canny edge detection
// ---------------------------------------------------------------------------

struct GradientField {
    std::vector<double> gx, gy, mag;
    int width = 0, height = 0;
};

namespace detail {

inline std::vector<double> gaussian_blur_5x5(const RasterImage& image, double sigma) {
    std::array<double, 5> k{};
    double sum = 0.0;
    for (int i = -2; i <= 2; ++i) {
        k[i + 2] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[i + 2];
    }
    for (double& v : k) v /= sum;

    const int w = image.width, h = image.height;
    std::vector<double> tmp(static_cast<std::size_t>(w) * h), out(tmp.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -2; i <= 2; ++i) acc += k[i + 2] * image.at_clamped(x + i, y);
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -2; i <= 2; ++i) {
                const int yy = std::clamp(y + i, 0, h - 1);
                acc += k[i + 2] * tmp[static_cast<std::size_t>(yy) * w + x];
            }
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
    return out;
}

}  // namespace detail

inline GradientField sobel_gradients(const RasterImage& image, double gaussian_sigma = 1.4) {
    const int w = image.width, h = image.height;
    GradientField g;
    g.width = w;
    g.height = h;
    g.gx.assign(static_cast<std::size_t>(w) * h, 0.0);
    g.gy.assign(g.gx.size(), 0.0);
    g.mag.assign(g.gx.size(), 0.0);

    const auto s = detail::gaussian_blur_5x5(image, gaussian_sigma);
    auto at = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return s[static_cast<std::size_t>(y) * w + x];
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double gx = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2 * at(x - 1, y) + at(x - 1, y + 1));
            const double gy = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2 * at(x, y - 1) + at(x + 1, y - 1));
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            g.gx[i] = gx;
            g.gy[i] = gy;
            g.mag[i] = std::hypot(gx, gy);
        }
    return g;
}

// Gaussian smooth, Sobel, non-maximum suppression along the gradient, then
// double threshold with hysteresis. Thresholds apply to Sobel magnitude.
inline BinaryImage canny(const RasterImage& image, double low, double high,
                         double gaussian_sigma = 1.4) {
    require(low >= 0.0 && low <= high, "contract-violation", "canny needs 0 <= low <= high");
    const int w = image.width, h = image.height;
    BinaryImage edges(w, h);
    if (w < 3 || h < 3) return edges;

    const GradientField g = sobel_gradients(image, gaussian_sigma);
    auto mag = [&](int x, int y) { return g.mag[static_cast<std::size_t>(y) * w + x]; };

    // 0 = strong, 1 = weak candidate after NMS; 255 = none.
    std::vector<std::uint8_t> cls(static_cast<std::size_t>(w) * h, 255);
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double m = g.mag[i];
            if (m < low) continue;
            // Quantize gradient direction to 0/45/90/135.
            const double ang = std::atan2(g.gy[i], g.gx[i]);
            const int q = static_cast<int>(std::lround(ang / (std::numbers::pi / 4.0))) & 3;
            double n1, n2;
            switch (q) {
                case 0: n1 = mag(x - 1, y); n2 = mag(x + 1, y); break;
                case 1: n1 = mag(x - 1, y - 1); n2 = mag(x + 1, y + 1); break;
                case 2: n1 = mag(x, y - 1); n2 = mag(x, y + 1); break;
                default: n1 = mag(x + 1, y - 1); n2 = mag(x - 1, y + 1); break;
            }
            if (m > n1 && m >= n2) cls[i] = (m >= high) ? 0 : 1;
        }
    }

    // Hysteresis: BFS from strong pixels through weak ones.
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (cls[static_cast<std::size_t>(y) * w + x] == 0) {
                edges.at(x, y) = 1;
                stack.emplace_back(x, y);
            }
    while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = x + dx, ny = y + dy;
                if (!edges.inside(nx, ny) || edges.at(nx, ny)) continue;
                if (cls[static_cast<std::size_t>(ny) * w + nx] == 1) {
                    edges.at(nx, ny) = 1;
                    stack.emplace_back(nx, ny);
                }
            }
    }
    return edges;
}

// ---------------------------------------------------------------------------
// Probabilistic Hough transform
// ---------------------------------------------------------------------------

struct Segment2 {
    double u1 = 0.0, v1 = 0.0;
    double u2 = 0.0, v2 = 0.0;

    double length() const { return std::hypot(u2 - u1, v2 - v1); }
    // Undirected angle in [0, 180).
    double angle_deg() const {
        return fold_deg(rad2deg(std::atan2(v2 - v1, u2 - u1)), 180.0);
    }
    std::pair<double, double> midpoint() const {
        return {0.5 * (u1 + u2), 0.5 * (v1 + v2)};
    }
};

struct HoughParams {
    double rho_res = 1.0;       // pixels
    double theta_res_deg = 1.0;
    int votes = 20;
    double min_len = 20.0;  // pixels
    double max_gap = 3.0;   // pixels
};

// Randomized segment extraction: sample edge points (seeded), vote, and when
// a (theta, rho) bin reaches the vote threshold, walk the supporting line in
// the edge map collecting a run with gaps <= max_gap. Accepted runs are
// removed from the edge set and un-voted.
inline std::vector<Segment2> probabilistic_hough(const BinaryImage& edges,
                                                 const HoughParams& params,
                                                 std::uint64_t seed) {
    require(params.rho_res > 0.0 && params.theta_res_deg > 0.0, "contract-violation",
            "hough resolutions must be positive");

    const int w = edges.width, h = edges.height;
    std::vector<std::pair<int, int>> points;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (edges.at(x, y)) points.emplace_back(x, y);
    if (points.empty()) return {};

    const int ntheta = std::max(1, static_cast<int>(std::lround(180.0 / params.theta_res_deg)));
    const double diag = std::hypot(static_cast<double>(w), static_cast<double>(h));
    const int nrho = 2 * static_cast<int>(std::ceil(diag / params.rho_res)) + 1;
    const int rho0 = nrho / 2;
    std::vector<int> acc(static_cast<std::size_t>(ntheta) * nrho, 0);

    std::vector<double> sin_t(ntheta), cos_t(ntheta);
    for (int t = 0; t < ntheta; ++t) {
        const double a = deg2rad(t * params.theta_res_deg);
        sin_t[t] = std::sin(a);
        cos_t[t] = std::cos(a);
    }
    auto rho_bin = [&](int t, double x, double y) {
        return rho0 + static_cast<int>(std::lround((x * cos_t[t] + y * sin_t[t]) / params.rho_res));
    };

    BinaryImage mask = edges;  // remaining edge pixels
    std::vector<std::uint8_t> voted(points.size(), 0);
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<Segment2> segments;
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const auto [px, py] = points[order[oi]];
        if (!mask.at(px, py)) continue;

        // Vote and find this point's best bin.
        int best_t = 0, best_votes = -1;
        for (int t = 0; t < ntheta; ++t) {
            const int r = rho_bin(t, px, py);
            const int v = ++acc[static_cast<std::size_t>(t) * nrho + r];
            if (v > best_votes) {
                best_votes = v;
                best_t = t;
            }
        }
        voted[order[oi]] = 1;
        if (best_votes < params.votes) continue;

        // Walk the line through (px, py) with direction (-sin, cos).
        const double dx = -sin_t[best_t], dy = cos_t[best_t];
        auto walk = [&](double sx, double sy, double stepx, double stepy) {
            std::pair<double, double> last{sx, sy};
            double gap = 0.0;
            double x = sx, y = sy;
            while (true) {
                x += stepx;
                y += stepy;
                const int xi = static_cast<int>(std::lround(x));
                const int yi = static_cast<int>(std::lround(y));
                if (!mask.inside(xi, yi)) break;
                bool hit = false;
                // 1-pixel corridor across the walk direction.
                for (int o = -1; o <= 1 && !hit; ++o) {
                    const int cx = std::fabs(stepx) < std::fabs(stepy) ? xi + o : xi;
                    const int cy = std::fabs(stepx) < std::fabs(stepy) ? yi : yi + o;
                    if (mask.inside(cx, cy) && mask.at(cx, cy)) {
                        last = {static_cast<double>(cx), static_cast<double>(cy)};
                        hit = true;
                    }
                }
                if (hit) {
                    gap = 0.0;
                } else {
                    gap += std::hypot(stepx, stepy);
                    if (gap > params.max_gap) break;
                }
            }
            return last;
        };
        const auto end_a = walk(px, py, dx, dy);
        const auto end_b = walk(px, py, -dx, -dy);

        Segment2 seg{end_a.first, end_a.second, end_b.first, end_b.second};
        const bool keep = seg.length() >= params.min_len;

        // Erase the run's pixels from the edge set (and their votes) whether
        // or not the run was long enough, so short clutter cannot loop.
        const double len = std::max(1.0, seg.length());
        const int steps = static_cast<int>(std::ceil(len));
        for (int i = 0; i <= steps; ++i) {
            const double f = static_cast<double>(i) / steps;
            const int xi = static_cast<int>(std::lround(seg.u1 + f * (seg.u2 - seg.u1)));
            const int yi = static_cast<int>(std::lround(seg.v1 + f * (seg.v2 - seg.v1)));
            for (int o = -1; o <= 1; ++o) {
                const int cx = std::fabs(dx) < std::fabs(dy) ? xi + o : xi;
                const int cy = std::fabs(dx) < std::fabs(dy) ? yi : yi + o;
                if (mask.inside(cx, cy) && mask.at(cx, cy)) {
                    mask.at(cx, cy) = 0;
                    for (int t = 0; t < ntheta; ++t)
                        --acc[static_cast<std::size_t>(t) * nrho + rho_bin(t, cx, cy)];
                }
            }
        }
        if (keep) {
            if (seg.u2 < seg.u1 || (seg.u2 == seg.u1 && seg.v2 < seg.v1)) {
                std::swap(seg.u1, seg.u2);
                std::swap(seg.v1, seg.v2);
            }
            segments.push_back(seg);
        }
    }
    return segments;
}

// ---------------------------------------------------------------------------
// Local binary patterns
// ---------------------------------------------------------------------------

inline constexpr int kLbpWindow = 100;

struct LbpHistogram {
    int cell_grid = 8;
    std::vector<std::uint32_t> bins;  // cell-major, 256 bins per cell

    std::size_t feature_count() const { return bins.size(); }
};

namespace detail {
// Neighbor order: bit k set when neighbor k >= center. Clockwise from NW.
inline constexpr std::array<std::array<int, 2>, 8> kLbpNbr = {
    {{-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}}};
}  // namespace detail

inline std::uint8_t lbp_code(const RasterImage& image, int x, int y) {
    const std::uint8_t c = image.at(x, y);
    std::uint8_t code = 0;
    for (int k = 0; k < 8; ++k) {
        const int nx = x + detail::kLbpNbr[k][0];
        const int ny = y + detail::kLbpNbr[k][1];
        if (image.at(nx, ny) >= c) code |= static_cast<std::uint8_t>(1u << k);
    }
    return code;
}

// Per-pixel 8-neighbor codes histogrammed over a cell grid. The window must be
// exactly 100x100; border pixels (no full 8-neighborhood) are skipped.
inline LbpHistogram lbp_features(const RasterImage& window, int cell_grid = 8) {
    require(window.width == kLbpWindow && window.height == kLbpWindow,
            "contract-violation", "lbp window must be 100x100");
    require(cell_grid > 0 && cell_grid <= kLbpWindow, "contract-violation",
            "invalid lbp cell grid");

    LbpHistogram h;
    h.cell_grid = cell_grid;
    h.bins.assign(static_cast<std::size_t>(cell_grid) * cell_grid * 256, 0);
    for (int y = 1; y < kLbpWindow - 1; ++y) {
        const int cy = y * cell_grid / kLbpWindow;
        for (int x = 1; x < kLbpWindow - 1; ++x) {
            const int cx = x * cell_grid / kLbpWindow;
            const std::size_t cell = static_cast<std::size_t>(cy) * cell_grid + cx;
            ++h.bins[cell * 256 + lbp_code(window, x, y)];
        }
    }
    return h;
}

}  // namespace panelbot::vision
