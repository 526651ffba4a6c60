#pragma once

// Wrench pose pipeline: handle bbox extension, point-cloud segmentation with
// the three-stage filter, grasp-point centroid, jaw analysis for the grip
// center and orientation, 2D-to-3D lifting, median accumulation over frames,
// and target/backup selection by commanded jaw width.

#include <cmath>
#include <optional>
#include <vector>

#include "panelbot/core.hpp"
#include "panelbot/geometry.hpp"
#include "panelbot/image.hpp"
#include "panelbot/vision.hpp"

namespace panelbot::wrench {

using geom::PinholeCamera;
using geom::Plane;
using geom::Vec3;
using img::RasterImage;
using img::Rect;

// ---------------------------------------------------------------------------
// Handle bbox extension
// ---------------------------------------------------------------------------

struct HandleBox {
    Rect bbox;
    bool clipped = false;
};

// Exactly (x, y - 2h, w, 2h), clipped to the image with a flag. Image v grows
// downward, so the handle hangs above the head box in pixel terms.
inline HandleBox extend_handle_bbox(const Rect& head, int image_w, int image_h) {
    require(head.w > 0 && head.h > 0, "degenerate-input", "empty head bbox");
    Rect handle{head.x, head.y - 2 * head.h, head.w, 2 * head.h};
    HandleBox out{handle, false};
    out.clipped = img::clip_rect(out.bbox, image_w, image_h);
    require(out.bbox.w > 0 && out.bbox.h > 0, "degenerate-input",
            "handle bbox entirely outside the image");
    return out;
}

// ---------------------------------------------------------------------------
// Point-cloud segmentation (three-stage filter + RANSAC plane)
// ---------------------------------------------------------------------------

struct SegmentationParams {
    double max_camera_distance = 1.0;   // meters
    double mean_band = 0.015;           // meters around the mean depth
    double plane_inlier_dist = 0.01;    // meters
    int ransac_iters = 100;
    std::size_t min_points = 10;
};

struct HandleSegment {
    std::vector<Vec3> inliers;
    Plane plane;
};

namespace detail {

inline Plane plane_from_points(const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 n = (b - a).cross(c - a);
    require(n.norm() > 1e-12, "degenerate-input", "collinear plane sample");
    return Plane::from_point_normal(a, n);
}

// Least-squares plane: mean point + smallest principal axis as normal.
inline Plane refit_plane(const std::vector<Vec3>& pts) {
    auto [mean, cov] = geom::mean_and_covariance(pts);
    const auto eig = geom::principal_components(cov);
    Vec3 n = eig[2].vector;
    if (n.norm() < 1e-12) n = {0, 0, 1};
    return Plane::from_point_normal(mean, n);
}

}  // namespace detail

// Stage 1 keeps camera-frame depths z <= 1 m; stage 2 keeps |z - mean z| within
// 1.5 cm; stage 3 fits a RANSAC plane with 1 cm inliers and refits it on them.
inline HandleSegment segment_handle(const std::vector<Vec3>& cloud, const Rect& handle_bbox,
                                    const PinholeCamera& camera,
                                    const SegmentationParams& params = {},
                                    std::uint64_t seed = 4242) {
    require(!cloud.empty(), "degenerate-input", "empty cloud");

    // Crop to the handle region in image space, then the depth gate.
    std::vector<Vec3> pts;
    for (const Vec3& p : cloud) {
        if (p.z <= 0.0 || p.z > params.max_camera_distance) continue;
        const auto [u, v] = camera.project(p);
        if (!handle_bbox.contains(static_cast<int>(std::floor(u)),
                                  static_cast<int>(std::floor(v))))
            continue;
        pts.push_back(p);
    }
    require(pts.size() >= params.min_points, "segmentation-failure",
            "too few points after the distance filter");

    double zbar = 0.0;
    for (const Vec3& p : pts) zbar += p.z;
    zbar /= static_cast<double>(pts.size());
    std::vector<Vec3> banded;
    for (const Vec3& p : pts)
        if (std::fabs(p.z - zbar) <= params.mean_band) banded.push_back(p);
    require(banded.size() >= params.min_points, "segmentation-failure",
            "too few points after the mean-distance filter");

    Rng rng(seed);
    std::vector<std::size_t> best;
    for (int it = 0; it < params.ransac_iters; ++it) {
        const std::size_t a = rng.below(banded.size());
        const std::size_t b = rng.below(banded.size());
        const std::size_t c = rng.below(banded.size());
        if (a == b || b == c || a == c) continue;
        Plane hyp;
        try {
            hyp = detail::plane_from_points(banded[a], banded[b], banded[c]);
        } catch (const Error&) {
            continue;
        }
        std::vector<std::size_t> inliers;
        for (std::size_t i = 0; i < banded.size(); ++i)
            if (std::fabs(hyp.signed_distance(banded[i])) <= params.plane_inlier_dist)
                inliers.push_back(i);
        if (inliers.size() > best.size()) best = std::move(inliers);
    }
    require(best.size() >= params.min_points, "segmentation-failure",
            "plane consensus too small");

    HandleSegment seg;
    seg.inliers.reserve(best.size());
    for (std::size_t i : best) seg.inliers.push_back(banded[i]);
    seg.plane = detail::refit_plane(seg.inliers);
    return seg;
}

inline Vec3 grasp_point(const std::vector<Vec3>& inliers) {
    require(!inliers.empty(), "degenerate-input", "grasp point of empty inlier set");
    Vec3 c;
    for (const Vec3& p : inliers) c = c + p;
    return c / static_cast<double>(inliers.size());
}

// ---------------------------------------------------------------------------
// Head analysis: grip center and deep point from the jaw convexity defect
// ---------------------------------------------------------------------------

struct GripCenter {
    double center_u = 0.0, center_v = 0.0;  // centroid of (tip1, tip2, deep)
    double deep_u = 0.0, deep_v = 0.0;
    double aperture_px = 0.0;  // prong tip separation
};

struct HeadAnalysisParams {
    double min_defect_depth_px = 6.0;
};

// Otsu binarize (dark tool on light panel), trace the largest outer contour,
// take its convex hull, and read the jaw as the deepest convexity defect.
inline GripCenter head_grip_center(const RasterImage& roi,
                                   const HeadAnalysisParams& params = {}) {
    require(roi.width >= 8 && roi.height >= 8, "degenerate-input", "roi too small");

    auto [thr, above] = vision::otsu_threshold(roi);
    const vision::BinaryImage fg = vision::invert(above);  // foreground = dark

    const auto contours = vision::trace_contours(fg);
    const vision::Contour* largest = nullptr;
    for (const auto& c : contours) {
        if (c.hole) continue;
        if (!largest || c.points.size() > largest->points.size()) largest = &c;
    }
    require(largest && largest->points.size() >= 8, "open-jaw-not-found",
            "no usable silhouette contour");

    std::vector<vision::ConvexityDefect> defects;
    try {
        defects = vision::convexity_defects(largest->points);
    } catch (const Error&) {
        fail("open-jaw-not-found", "degenerate silhouette");
    }
    const vision::ConvexityDefect* jaw = nullptr;
    for (const auto& d : defects)
        if (!jaw || d.depth > jaw->depth) jaw = &d;
    require(jaw && jaw->depth >= params.min_defect_depth_px, "open-jaw-not-found",
            "no convexity defect above the depth threshold");

    GripCenter g;
    g.deep_u = jaw->deep_u;
    g.deep_v = jaw->deep_v;
    g.center_u = (jaw->hull_start.x + jaw->hull_end.x + jaw->deep_u) / 3.0;
    g.center_v = (jaw->hull_start.y + jaw->hull_end.y + jaw->deep_v) / 3.0;
    g.aperture_px = std::hypot(static_cast<double>(jaw->hull_end.x - jaw->hull_start.x),
                               static_cast<double>(jaw->hull_end.y - jaw->hull_start.y));
    return g;
}

// Full-quadrant angle of the grip-center -> deep-point direction.
inline double head_orientation(double center_u, double center_v, double deep_u, double deep_v) {
    return geom::two_point_angle(center_u, center_v, deep_u, deep_v);
}

inline Vec3 lift_center_to_3d(double u, double v, const Plane& plane,
                              const PinholeCamera& camera) {
    return geom::ray_plane_intersection(u, v, camera, plane);
}

// ---------------------------------------------------------------------------
// Per-frame observation and median accumulation
// ---------------------------------------------------------------------------

struct WrenchObservation {
    Rect head_bbox;
    Rect handle_bbox;
    double grip_center_u = 0.0, grip_center_v = 0.0;
    Vec3 grip_center_3d;
    double orientation_deg = 0.0;
    Vec3 grasp_point;
    Plane handle_plane;
    double jaw_width_mm = 0.0;  // metric aperture estimate
};

struct AccumulatedEstimate {
    Vec3 grip_center_3d;
    Vec3 grasp_point;
    double orientation_deg = 0.0;
    std::size_t frame_count = 0;
};

// Component-wise medians over the frame window; orientation is unwrapped to
// the first frame's branch before the scalar median.
inline AccumulatedEstimate accumulate_median(const std::vector<WrenchObservation>& frames,
                                             std::size_t window = 10) {
    require(frames.size() == window, "incomplete-window",
            "expected exactly " + std::to_string(window) + " frames, got " +
                std::to_string(frames.size()));

    auto med = [&](auto&& get) {
        std::vector<double> v;
        v.reserve(frames.size());
        for (const auto& f : frames) v.push_back(get(f));
        return median_of(std::move(v));
    };

    AccumulatedEstimate acc;
    acc.frame_count = frames.size();
    acc.grip_center_3d = {med([](const auto& f) { return f.grip_center_3d.x; }),
                          med([](const auto& f) { return f.grip_center_3d.y; }),
                          med([](const auto& f) { return f.grip_center_3d.z; })};
    acc.grasp_point = {med([](const auto& f) { return f.grasp_point.x; }),
                       med([](const auto& f) { return f.grasp_point.y; }),
                       med([](const auto& f) { return f.grasp_point.z; })};

    const double base = frames.front().orientation_deg;
    std::vector<double> angles;
    angles.reserve(frames.size());
    for (const auto& f : frames) angles.push_back(base + wrap_deg(f.orientation_deg - base));
    acc.orientation_deg = median_of(std::move(angles));
    return acc;
}

// ---------------------------------------------------------------------------
// Target and backup selection by commanded jaw width
// ---------------------------------------------------------------------------

struct TargetSelection {
    int target = -1;
    int backup = -1;  // -1 when no second candidate is in tolerance
};

// Candidates within tolerance of the commanded width, ranked by |width -
// target|; the best is the target, the runner-up the backup.
inline TargetSelection select_target(const std::vector<double>& jaw_widths_mm,
                                     double target_width_mm, double tolerance_mm) {
    require(!jaw_widths_mm.empty(), "degenerate-input", "no width estimates");
    std::vector<std::pair<double, int>> in_tol;
    for (std::size_t i = 0; i < jaw_widths_mm.size(); ++i) {
        const double err = std::fabs(jaw_widths_mm[i] - target_width_mm);
        if (err <= tolerance_mm) in_tol.emplace_back(err, static_cast<int>(i));
    }
    require(!in_tol.empty(), "target-not-found",
            "no wrench within tolerance of the commanded width");
    std::sort(in_tol.begin(), in_tol.end());
    TargetSelection sel;
    sel.target = in_tol[0].second;
    if (in_tol.size() > 1) sel.backup = in_tol[1].second;
    return sel;
}

// ---------------------------------------------------------------------------
// Single-frame observation assembly
// ---------------------------------------------------------------------------

struct ObserveParams {
    SegmentationParams segmentation;
    HeadAnalysisParams head;
    int roi_margin_px = 6;
};

// Runs the full per-frame analysis for one detected head: handle segmentation
// from the cloud, jaw analysis on the head ROI, 3D lifting onto the fitted
// plane, and the metric jaw width (aperture * depth / fx).
inline WrenchObservation observe_wrench(const RasterImage& frame, const Rect& head_bbox,
                                        const std::vector<Vec3>& cloud,
                                        const PinholeCamera& camera,
                                        const ObserveParams& params = {},
                                        std::uint64_t seed = 905) {
    WrenchObservation obs;
    obs.head_bbox = head_bbox;
    obs.handle_bbox = extend_handle_bbox(head_bbox, frame.width, frame.height).bbox;

    const HandleSegment seg =
        segment_handle(cloud, obs.handle_bbox, camera, params.segmentation, seed);
    obs.handle_plane = seg.plane;
    obs.grasp_point = grasp_point(seg.inliers);

    Rect roi_box = head_bbox;
    roi_box.x -= params.roi_margin_px;
    roi_box.y -= params.roi_margin_px;
    roi_box.w += 2 * params.roi_margin_px;
    roi_box.h += 2 * params.roi_margin_px;
    img::clip_rect(roi_box, frame.width, frame.height);
    const RasterImage roi = img::crop(frame, roi_box);

    const GripCenter grip = head_grip_center(roi, params.head);
    obs.grip_center_u = grip.center_u + roi_box.x;
    obs.grip_center_v = grip.center_v + roi_box.y;
    obs.orientation_deg = head_orientation(grip.center_u, grip.center_v, grip.deep_u, grip.deep_v);
    obs.grip_center_3d =
        lift_center_to_3d(obs.grip_center_u, obs.grip_center_v, seg.plane, camera);
    const double depth = obs.grip_center_3d.z;
    obs.jaw_width_mm = grip.aperture_px * depth / camera.fx * 1000.0;
    return obs;
}

}  // namespace panelbot::wrench
