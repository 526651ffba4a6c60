#pragma once

// Seeded scenario generation: arena with panel and distractor barriers, a
// patrol-range observation pose in the panel's front sector, and the panel
// close-up scene (six wrenches, two usable, one valve).

#include <cmath>
#include <string>

#include "panelbot/core.hpp"
#include "panelbot/scene.hpp"

namespace panelbot::sim {

struct GenParams {
    double panel_width = 4.0;
    double panel_thickness = 0.25;
    int distractors = 4;
    double scan_noise_sigma = 0.01;
    double render_noise_sigma = 6.0;
    double render_gradient = 14.0;
    double valve_stem_angle_deg = -1.0;  // < 0: randomized
    bool wrenches_on_front = true;
    double target_width_mm = 24.0;
};

namespace detail {
inline double pose_segment_clearance(double x, double y, const Seg2d& s) {
    const double ex = s.x2 - s.x1, ey = s.y2 - s.y1;
    const double len2 = ex * ex + ey * ey;
    double t = len2 > 0.0 ? ((x - s.x1) * ex + (y - s.y1) * ey) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(x - (s.x1 + t * ex), y - (s.y1 + t * ey));
}

inline bool segments_intersect(const Seg2d& a, const Seg2d& b) {
    auto orient = [](double ax, double ay, double bx, double by, double cx, double cy) {
        const double v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
        return v > 0 ? 1 : v < 0 ? -1 : 0;
    };
    const int o1 = orient(a.x1, a.y1, a.x2, a.y2, b.x1, b.y1);
    const int o2 = orient(a.x1, a.y1, a.x2, a.y2, b.x2, b.y2);
    const int o3 = orient(b.x1, b.y1, b.x2, b.y2, a.x1, a.y1);
    const int o4 = orient(b.x1, b.y1, b.x2, b.y2, a.x2, a.y2);
    return o1 != o2 && o3 != o4;
}

inline double segment_segment_distance(const Seg2d& a, const Seg2d& b) {
    if (segments_intersect(a, b)) return 0.0;
    return std::min({pose_segment_clearance(a.x1, a.y1, b), pose_segment_clearance(a.x2, a.y2, b),
                     pose_segment_clearance(b.x1, b.y1, a), pose_segment_clearance(b.x2, b.y2, a)});
}
}  // namespace detail

// Observation pose in the panel's front sector at patrol range, facing the
// panel, inside the arena, clear of every obstacle segment, and with an
// unoccluded line of sight to the whole panel face.
inline Pose2 observation_pose(const ArenaSpec& arena, Rng& rng) {
    const PanelPose& panel = arena.panel;
    const auto [nx, ny] = panel_normal(panel);
    const auto faces = panel_faces(panel);
    Pose2 pose;
    for (int attempt = 0; attempt < 128; ++attempt) {
        const double bear = deg2rad(rng.uniform(-50.0, 50.0));
        const double c = std::cos(bear), s = std::sin(bear);
        const double dx = c * nx - s * ny, dy = s * nx + c * ny;
        const double r = rng.uniform(8.0, 18.0);
        pose.x = std::clamp(panel.x + r * dx, 0.5, arena.bounds_w - 0.5);
        pose.y = std::clamp(panel.y + r * dy, 0.5, arena.bounds_h - 0.5);
        pose.theta_deg = rad2deg(std::atan2(panel.y - pose.y, panel.x - pose.x)) +
                         rng.uniform(-25.0, 25.0);

        double clearance = 1e300;
        for (const Seg2d& s2 : arena.distractors)
            clearance = std::min(clearance, detail::pose_segment_clearance(pose.x, pose.y, s2));
        for (const Seg2d& s2 : arena.walls)
            clearance = std::min(clearance, detail::pose_segment_clearance(pose.x, pose.y, s2));
        if (clearance < 1.5) continue;

        bool occluded = false;
        const Seg2d sights[3] = {{pose.x, pose.y, faces[0].x1, faces[0].y1},
                                 {pose.x, pose.y, faces[0].x2, faces[0].y2},
                                 {pose.x, pose.y, panel.x, panel.y}};
        for (const Seg2d& sight : sights) {
            for (const Seg2d& s2 : arena.distractors)
                if (detail::segments_intersect(sight, s2)) occluded = true;
            for (const Seg2d& s2 : arena.walls)
                if (detail::segments_intersect(sight, s2)) occluded = true;
        }
        if (!occluded) return pose;
    }
    return pose;
}

inline Scenario generate_scenario(const GenParams& params, std::uint64_t seed) {
    Rng rng = derived_rng(seed, "scenario");
    Scenario sc;

    sc.arena.bounds_w = 50.0;
    sc.arena.bounds_h = 60.0;
    sc.arena.panel = {rng.uniform(12.0, 38.0), rng.uniform(40.0, 52.0),
                      rng.uniform(0.0, 180.0), params.panel_width, params.panel_thickness};

    // Distractor barriers, kept clear of the panel and of each other so the
    // euclidean clusters stay separate.
    const auto faces = panel_faces(sc.arena.panel);
    for (int d = 0; d < params.distractors; ++d) {
        for (int attempt = 0; attempt < 64; ++attempt) {
            const double x = rng.uniform(4.0, 46.0);
            const double y = rng.uniform(6.0, 56.0);
            const double ang = rng.uniform(0.0, std::numbers::pi);
            const double len = rng.uniform(6.0, 12.0);
            const Seg2d seg{x, y, x + len * std::cos(ang), y + len * std::sin(ang)};
            if (seg.x2 < 1.0 || seg.x2 > sc.arena.bounds_w - 1.0 || seg.y2 < 1.0 ||
                seg.y2 > sc.arena.bounds_h - 1.0)
                continue;
            double clear = std::min(detail::segment_segment_distance(seg, faces[0]),
                                    detail::segment_segment_distance(seg, faces[1]));
            for (const Seg2d& other : sc.arena.distractors)
                clear = std::min(clear, detail::segment_segment_distance(seg, other));
            if (clear < 2.0) continue;
            sc.arena.distractors.push_back(seg);
            break;
        }
    }

    sc.laser.range_noise_sigma = params.scan_noise_sigma;
    sc.laser.min_range = 0.3;

    // Six wrenches in a row, random order and orientation; the two usable
    // ones share the commanded width.
    std::vector<double> widths{19.0, 22.0, params.target_width_mm, params.target_width_mm,
                               27.0, 30.0};
    rng.shuffle(widths);
    PanelSceneSpec& ps = sc.scene;
    ps.wrenches.clear();
    const double pitch = 0.105;
    for (int i = 0; i < 6; ++i) {
        WrenchSpec w;
        w.head_width_mm = widths[static_cast<std::size_t>(i)];
        // Handle length grows with the head size; the sway stays inside the
        // paper's handle-extension box.
        w.handle_length_mm = w.head_width_mm * rng.uniform(3.8, 5.0);
        w.x_m = (i - 2.5) * pitch + rng.uniform(-0.010, 0.010);
        w.y_m = 0.08 + rng.uniform(-0.01, 0.01);
        // Hanging from pegs: handles up, heads down, small sway.
        w.orientation_deg = -90.0 + rng.uniform(-12.0, 12.0);
        ps.wrenches.push_back(w);
    }
    ps.target_index = -1;
    ps.backup_index = -1;
    for (int i = 0; i < 6; ++i) {
        if (widths[static_cast<std::size_t>(i)] != params.target_width_mm) continue;
        if (ps.target_index < 0)
            ps.target_index = i;
        else
            ps.backup_index = i;
    }

    ps.valve.edge_mm = 40.0;
    ps.valve.x_m = rng.uniform(-0.05, 0.05);
    ps.valve.y_m = -0.12;
    ps.valve.stem_angle_deg = params.valve_stem_angle_deg >= 0.0
                                  ? params.valve_stem_angle_deg
                                  : std::floor(rng.uniform(0.0, 90.0));
    ps.wrenches_on_front = params.wrenches_on_front;
    ps.render.noise_sigma = params.render_noise_sigma;
    ps.render.gradient = params.render_gradient;

    validate_scenario(sc);
    return sc;
}

}  // namespace panelbot::sim
