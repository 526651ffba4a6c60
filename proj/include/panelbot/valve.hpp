#pragma once

// Valve stem detection: Canny + probabilistic Hough segments, square-hypothesis
// search over 4- then 3-segment combinations, center/orientation estimation
// with the mod-90 fold, and stereo triangulation of the center.

#include <cmath>
#include <optional>
#include <vector>

#include "panelbot/core.hpp"
#include "panelbot/geometry.hpp"
#include "panelbot/image.hpp"
#include "panelbot/vision.hpp"

namespace panelbot::valve {

using geom::StereoRig;
using geom::Vec3;
using img::RasterImage;
using vision::Segment2;

// ---------------------------------------------------------------------------
// Segment extraction
// ---------------------------------------------------------------------------

struct CannyParams {
    double low = 40.0;
    double high = 90.0;
};

inline std::vector<Segment2> extract_segments(const RasterImage& roi, const CannyParams& canny,
                                              const vision::HoughParams& hough,
                                              std::uint64_t seed) {
    const auto edges = vision::canny(roi, canny.low, canny.high);
    return vision::probabilistic_hough(edges, hough, seed);
}

// ---------------------------------------------------------------------------
// Square hypothesis search
// ---------------------------------------------------------------------------

struct SquareHypothesis {
    std::vector<Segment2> segments;          // 3 or 4
    std::vector<std::pair<double, double>> vertices;  // reconstructed corners
    double center_u = 0.0, center_v = 0.0;
    double score = 0.0;  // vertex gaps + angular deviations, lower is better
};

struct SquareParams {
    double expected_edge_px = 60.0;
    double tol_vertex_px = 0.0;     // 0 -> 10% of the expected edge
    double tol_parallel_deg = 5.0;
    double tol_perp_deg = 5.0;
    double min_len_fraction = 0.4;  // short-segment pre-filter
    std::size_t max_segments = 24;  // longest kept before enumeration
};

namespace detail {

inline double endpoint_gap(double ax, double ay, double bx, double by) {
    return std::hypot(ax - bx, ay - by);
}

struct Chain {
    std::vector<std::pair<double, double>> vertices;
    double gap_sum = 0.0;
    bool ok = false;
};

// Chain an ordered set of segments into a cycle (4 segments) or an open strip
// (3 segments), choosing endpoint orientations minimizing the total gap.
inline Chain best_chain(const std::vector<Segment2>& segs, bool closed, double tol_vertex) {
    const std::size_t n = segs.size();
    Chain best;
    best.gap_sum = 1e300;

    // Endpoint orientation bitmask: bit i flips segment i.
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<std::array<double, 4>> s(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Segment2& g = segs[i];
            if (mask & (1u << i))
                s[i] = {g.u2, g.v2, g.u1, g.v1};
            else
                s[i] = {g.u1, g.v1, g.u2, g.v2};
        }
        double gaps = 0.0;
        bool ok = true;
        std::vector<std::pair<double, double>> verts;
        const std::size_t joints = closed ? n : n - 1;
        for (std::size_t i = 0; i < joints; ++i) {
            const auto& a = s[i];
            const auto& b = s[(i + 1) % n];
            const double gap = endpoint_gap(a[2], a[3], b[0], b[1]);
            if (gap > tol_vertex) {
                ok = false;
                break;
            }
            gaps += gap;
            verts.push_back({0.5 * (a[2] + b[0]), 0.5 * (a[3] + b[1])});
        }
        if (!ok) continue;
        if (!closed) {
            // Open strip: the far endpoints stand in for the missing corners.
            verts.insert(verts.begin(), {s[0][0], s[0][1]});
            verts.push_back({s[n - 1][2], s[n - 1][3]});
        }
        if (gaps < best.gap_sum) {
            best.gap_sum = gaps;
            best.vertices = std::move(verts);
            best.ok = true;
        }
    }
    return best;
}

struct AngleCheck {
    bool ok = false;
    double deviation = 0.0;
};

// Constraint check over the combination's pairwise angles: at least one
// near-parallel pair and at least one near-perpendicular pair.
inline AngleCheck angle_constraints(const std::vector<Segment2>& segs, double tol_parallel,
                                    double tol_perp) {
    bool has_parallel = false, has_perp = false;
    double dev = 0.0;
    for (std::size_t i = 0; i < segs.size(); ++i)
        for (std::size_t j = i + 1; j < segs.size(); ++j) {
            const double diff = circ_dist_deg(segs[i].angle_deg(), segs[j].angle_deg(), 180.0);
            const double to_parallel = diff;
            const double to_perp = std::fabs(diff - 90.0);
            if (to_parallel <= tol_parallel) {
                has_parallel = true;
                dev += to_parallel;
            }
            if (to_perp <= tol_perp) {
                has_perp = true;
                dev += to_perp;
            }
        }
    return {has_parallel && has_perp, dev};
}

}  // namespace detail

// Enumerate 4-combinations of the surviving segments against the three
// constraints (vertex formation, a parallel pair, a perpendicular pair); fall
// back to 3-combinations when no 4-set passes. Ties break by lexicographic
// segment indices.
inline SquareHypothesis find_square(const std::vector<Segment2>& input,
                                    const SquareParams& params = {}) {
    const double tol_vertex =
        params.tol_vertex_px > 0.0 ? params.tol_vertex_px : 0.10 * params.expected_edge_px;

    // Length pre-filter, then cap at the longest segments.
    std::vector<Segment2> segs;
    for (const Segment2& s : input)
        if (s.length() >= params.min_len_fraction * params.expected_edge_px) segs.push_back(s);
    std::sort(segs.begin(), segs.end(),
              [](const Segment2& a, const Segment2& b) { return a.length() > b.length(); });
    if (segs.size() > params.max_segments) segs.resize(params.max_segments);
    require(segs.size() >= 3, "valve-not-found", "fewer than 3 usable segments");

    auto evaluate = [&](const std::vector<Segment2>& combo,
                        bool closed) -> std::optional<SquareHypothesis> {
        const auto angles = detail::angle_constraints(combo, params.tol_parallel_deg,
                                                      params.tol_perp_deg);
        if (!angles.ok) return std::nullopt;
        // Try all distinct cyclic orders of the combo.
        std::vector<std::size_t> order(combo.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::optional<SquareHypothesis> best;
        do {
            if (order[0] != 0) continue;  // fix rotation; reflections covered by flips
            std::vector<Segment2> arranged;
            for (std::size_t i : order) arranged.push_back(combo[i]);
            const auto chain = detail::best_chain(arranged, closed, tol_vertex);
            if (!chain.ok) continue;
            SquareHypothesis h;
            h.segments = arranged;
            h.vertices = chain.vertices;
            h.score = chain.gap_sum + angles.deviation;
            double su = 0.0, sv = 0.0;
            for (const auto& [u, v] : h.vertices) {
                su += u;
                sv += v;
            }
            h.center_u = su / static_cast<double>(h.vertices.size());
            h.center_v = sv / static_cast<double>(h.vertices.size());
            if (!best || h.score < best->score) best = std::move(h);
        } while (std::next_permutation(order.begin(), order.end()));
        return best;
    };

    auto search = [&](std::size_t k, bool closed) -> std::optional<SquareHypothesis> {
        std::vector<std::size_t> idx(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = i;
        std::optional<SquareHypothesis> best;
        while (true) {
            std::vector<Segment2> combo;
            for (std::size_t i : idx) combo.push_back(segs[i]);
            if (auto h = evaluate(combo, closed))
                if (!best || h->score < best->score) best = std::move(h);
            // Next combination in lexicographic order.
            std::size_t i = k;
            while (i-- > 0) {
                if (idx[i] + (k - i) < segs.size()) {
                    ++idx[i];
                    for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
                    break;
                }
                if (i == 0) return best;
            }
        }
    };

    if (segs.size() >= 4)
        if (auto h = search(4, true)) return *h;
    if (auto h = search(3, false)) return *h;
    fail("valve-not-found", "no segment combination satisfies the square constraints");
}

// ---------------------------------------------------------------------------
// Center and orientation
// ---------------------------------------------------------------------------

struct ValveEstimate {
    Vec3 center_3d;
    double stem_angle_deg = 0.0;  // folded into [0, 90)
    int used_segments = 0;
};

// Center = mean of reconstructed vertices; angle = direction of the longest
// hypothesis edge folded mod 90.
inline std::pair<std::pair<double, double>, double> valve_center_orientation(
    const SquareHypothesis& hyp) {
    require(!hyp.segments.empty(), "contract-violation", "empty hypothesis");
    const Segment2* longest = &hyp.segments.front();
    for (const Segment2& s : hyp.segments)
        if (s.length() > longest->length()) longest = &s;
    const double angle =
        geom::two_point_angle(longest->u1, longest->v1, longest->u2, longest->v2, true);
    return {{hyp.center_u, hyp.center_v}, angle};
}

// ---------------------------------------------------------------------------
// Stereo triangulation of the valve center
// ---------------------------------------------------------------------------

struct StereoMatchParams {
    double max_vertical_mismatch_px = 5.0;
    double max_reprojection_px = 5.0;
};

inline Vec3 triangulate_valve(double ul, double vl, double ur, double vr, const StereoRig& rig,
                              const StereoMatchParams& params = {}) {
    require(std::fabs(vl - vr) <= params.max_vertical_mismatch_px, "stereo-mismatch",
            "vertical disparity too large for a rectified rig");
    const Vec3 p = geom::triangulate(ul, vl, ur, vr, rig);

    // Reprojection residual check in both views (rig frame: left at origin,
    // right at +baseline).
    const auto [rul, rvl] = rig.left.project(p);
    const auto [rur_, rvr_] = rig.right.project({p.x - rig.baseline, p.y, p.z});
    const double res = std::max(std::hypot(rul - ul, rvl - vl), std::hypot(rur_ - ur, rvr_ - vr));
    require(res <= params.max_reprojection_px, "stereo-mismatch",
            "stereo reprojection residual too large");
    return p;
}

}  // namespace panelbot::valve
