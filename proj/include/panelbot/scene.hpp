#pragma once

// Deterministic synthetic world: 2D arena with panel and distractor segments,
// simulated lidar, rasterized panel close-ups (wrenches + valve), synthesized
// handle point clouds, and exported ground truth for scoring estimators.
//
// Panel-scene frame: origin at the panel board center, x right (m), y down
// (m), z into the panel. The camera sits at negative z looking along +z, so
// image (u, v) axes align with scene (x, y) and angles transfer verbatim.

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "panelbot/core.hpp"
#include "panelbot/geometry.hpp"
#include "panelbot/image.hpp"

namespace panelbot::sim {

using geom::PinholeCamera;
using geom::Plane;
using geom::Vec3;

// ---------------------------------------------------------------------------
// Arena
// ---------------------------------------------------------------------------

struct Pose2 {
    double x = 0.0, y = 0.0;
    double theta_deg = 0.0;
};

struct Seg2d {
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
};

struct PanelPose {
    double x = 0.0, y = 0.0;      // center, meters
    double heading_deg = 0.0;     // board direction
    double width = 4.0;           // meters
    double thickness = 0.25;      // meters
};

struct ArenaSpec {
    double bounds_w = 50.0;  // arena rectangle [0, w] x [0, h]
    double bounds_h = 60.0;
    std::vector<Seg2d> walls;
    PanelPose panel;
    std::vector<Seg2d> distractors;
};

inline void validate_arena(const ArenaSpec& a) {
    require(a.bounds_w > 0.0 && a.bounds_h > 0.0, "config-error", "arena bounds must be positive");
    require(a.panel.x >= 0.0 && a.panel.x <= a.bounds_w && a.panel.y >= 0.0 &&
                a.panel.y <= a.bounds_h,
            "config-error", "panel outside arena bounds");
    require(a.panel.width > a.panel.thickness && a.panel.thickness > 0.0, "config-error",
            "panel needs width > thickness > 0");
}

// The two long faces of the panel board (thin board seen by the lidar).
inline std::array<Seg2d, 2> panel_faces(const PanelPose& p) {
    const double c = std::cos(deg2rad(p.heading_deg)), s = std::sin(deg2rad(p.heading_deg));
    const double dx = c * p.width / 2, dy = s * p.width / 2;
    const double nx = -s * p.thickness / 2, ny = c * p.thickness / 2;
    return {Seg2d{p.x + nx - dx, p.y + ny - dy, p.x + nx + dx, p.y + ny + dy},
            Seg2d{p.x - nx - dx, p.y - ny - dy, p.x - nx + dx, p.y - ny + dy}};
}

// Outward normal of the panel front face.
inline std::pair<double, double> panel_normal(const PanelPose& p) {
    return {-std::sin(deg2rad(p.heading_deg)), std::cos(deg2rad(p.heading_deg))};
}

// ---------------------------------------------------------------------------
// Lidar
// ---------------------------------------------------------------------------

struct LaserSpec {
    double fov_deg = 270.0;
    double angular_resolution_deg = 0.25;
    double max_range = 50.0;
    double min_range = 0.5;
    double range_noise_sigma = 0.0;
};

inline void validate_laser(const LaserSpec& s) {
    require(s.fov_deg > 0.0 && s.fov_deg <= 360.0, "config-error", "laser fov must be in (0, 360]");
    require(s.angular_resolution_deg > 0.0, "config-error", "laser resolution must be positive");
    require(s.max_range > 0.0, "config-error", "laser max range must be positive");
}

struct LaserScan {
    Pose2 origin;               // sensor pose at capture
    double start_angle_deg = 0.0;  // relative to the sensor heading
    double resolution_deg = 0.25;
    std::vector<double> ranges;  // meters; +inf = no return

    std::size_t beam_count() const { return ranges.size(); }
    double beam_angle_deg(std::size_t i) const {
        return start_angle_deg + static_cast<double>(i) * resolution_deg;
    }
};

namespace detail {

// Distance along the ray (origin + t * dir) to the segment, or +inf.
inline double ray_segment_distance(double ox, double oy, double dx, double dy,
                                   const Seg2d& s) {
    const double ex = s.x2 - s.x1, ey = s.y2 - s.y1;
    const double denom = dx * ey - dy * ex;
    if (std::fabs(denom) < 1e-15) return std::numeric_limits<double>::infinity();
    const double sx = s.x1 - ox, sy = s.y1 - oy;
    const double t = (sx * ey - sy * ex) / denom;
    const double u = (sx * dy - sy * dx) / denom;
    if (t < 0.0 || u < 0.0 || u > 1.0) return std::numeric_limits<double>::infinity();
    return t;
}

}  // namespace detail

inline std::vector<Seg2d> arena_segments(const ArenaSpec& arena) {
    std::vector<Seg2d> segs = arena.walls;
    for (const Seg2d& d : arena.distractors) segs.push_back(d);
    for (const Seg2d& f : panel_faces(arena.panel)) segs.push_back(f);
    return segs;
}

// Per beam: nearest ray-segment intersection plus clamped gaussian noise.
// Deterministic for a fixed seed; misses and out-of-range returns are +inf.
inline LaserScan simulate_scan(const ArenaSpec& arena, const Pose2& robot,
                               const LaserSpec& spec, std::uint64_t seed) {
    validate_arena(arena);
    validate_laser(spec);
    require(robot.x >= 0.0 && robot.x <= arena.bounds_w && robot.y >= 0.0 &&
                robot.y <= arena.bounds_h,
            "config-error", "robot outside arena bounds");

    const auto segs = arena_segments(arena);
    const std::size_t beams =
        static_cast<std::size_t>(std::floor(spec.fov_deg / spec.angular_resolution_deg)) + 1;

    LaserScan scan;
    scan.origin = robot;
    scan.start_angle_deg = -spec.fov_deg / 2.0;
    scan.resolution_deg = spec.angular_resolution_deg;
    scan.ranges.resize(beams);

    Rng rng(seed);
    for (std::size_t i = 0; i < beams; ++i) {
        const double ang = deg2rad(robot.theta_deg + scan.beam_angle_deg(i));
        const double dx = std::cos(ang), dy = std::sin(ang);
        double best = std::numeric_limits<double>::infinity();
        for (const Seg2d& s : segs)
            best = std::min(best, detail::ray_segment_distance(robot.x, robot.y, dx, dy, s));

        // Noise is drawn per beam whether or not it hit, keeping the stream
        // aligned across arenas with differing geometry.
        const double noise =
            spec.range_noise_sigma > 0.0 ? rng.normal_clamped(spec.range_noise_sigma) : 0.0;
        if (!std::isfinite(best) || best > spec.max_range || best < spec.min_range) {
            scan.ranges[i] = std::numeric_limits<double>::infinity();
        } else {
            scan.ranges[i] = std::clamp(best + noise, spec.min_range, spec.max_range);
        }
    }
    return scan;
}

// Cartesian hit points of a scan in its capture frame (z = 0); misses dropped.
inline std::vector<Vec3> scan_points(const LaserScan& scan) {
    std::vector<Vec3> pts;
    pts.reserve(scan.ranges.size());
    for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
        const double r = scan.ranges[i];
        if (!std::isfinite(r)) continue;
        const double ang = deg2rad(scan.origin.theta_deg + scan.beam_angle_deg(i));
        pts.push_back({scan.origin.x + r * std::cos(ang), scan.origin.y + r * std::sin(ang), 0.0});
    }
    return pts;
}

// Union of both scans' hit points in one base frame; transform_ab is the rigid
// mount transform applied to scan_b's points. No deduplication.
inline std::vector<Vec3> merge_scans(const LaserScan& scan_a, const LaserScan& scan_b,
                                     const geom::RigidTransform& transform_ab) {
    std::vector<Vec3> merged = scan_points(scan_a);
    for (const Vec3& p : scan_points(scan_b)) merged.push_back(transform_ab.apply(p));
    return merged;
}

// ---------------------------------------------------------------------------
// Panel scene
// ---------------------------------------------------------------------------

struct WrenchSpec {
    double head_width_mm = 24.0;    // jaw gap (aperture)
    double handle_length_mm = 140.0;
    double x_m = 0.0, y_m = 0.0;    // head center on the board
    double orientation_deg = 90.0;  // grip-center -> deep-point direction, image convention
};

struct ValveSpec {
    double edge_mm = 40.0;  // stem square edge
    double x_m = 0.0, y_m = 0.0;
    double stem_angle_deg = 0.0;  // in [0, 90)
};

struct RenderSpec {
    int width_px = 1100;
    int height_px = 620;
    double fx = 760.0, fy = 760.0;
    double camera_depth_m = 0.50;  // camera-to-board distance
    double baseline_m = 0.10;      // stereo
    double noise_sigma = 6.0;      // gray levels
    double gradient = 16.0;        // gray levels across the image
};

struct PanelSceneSpec {
    std::vector<WrenchSpec> wrenches;  // exactly 6 in a valid scenario
    int target_index = 0;
    int backup_index = 1;
    ValveSpec valve;
    bool wrenches_on_front = true;
    double standoff_mm = 40.0;  // tool plane sits this far in front of the board
    double board_w_m = 1.10;
    double board_h_m = 0.70;
    RenderSpec render;
};

inline void validate_panel_scene(const PanelSceneSpec& s) {
    require(s.wrenches.size() == 6, "config-error", "panel scene needs exactly 6 wrenches");
    require(s.target_index >= 0 && s.target_index < 6 && s.backup_index >= 0 &&
                s.backup_index < 6 && s.target_index != s.backup_index,
            "config-error", "target/backup indices must be distinct and in [0, 6)");
    require(s.valve.stem_angle_deg >= 0.0 && s.valve.stem_angle_deg < 90.0, "config-error",
            "valve stem angle must be in [0, 90)");
    require(s.standoff_mm > 0.0, "config-error", "standoff must be positive");
    for (const WrenchSpec& w : s.wrenches)
        require(w.head_width_mm > 0.0 && w.handle_length_mm > 0.0, "config-error",
                "wrench dimensions must be positive");
}

struct Scenario {
    ArenaSpec arena;
    LaserSpec laser;
    PanelSceneSpec scene;
};

// ---------------------------------------------------------------------------
// Wrench silhouette geometry
// ---------------------------------------------------------------------------
//
// Open-jaw model in the wrench frame: head disk of radius Ro = head_width with
// a jaw slot of width head_width cut from the rim on the opening side; the
// slot reaches slightly past the disk center so the deepest contour point is
// well defined. The handle rod extends on the closed side. The distance
// between the two prong tips equals head_width exactly, which pins the
// aperture-in-pixels invariant.

namespace wrenchgeom {

inline double outer_radius(double head_width_m) { return head_width_m; }
// The jaw slot runs from the rim to a rounded root (half-disk of radius
// head_width/2), so the deepest contour point is unique and centered.
inline double slot_wall_reach(double head_width_m) { return 0.05 * head_width_m; }
inline double slot_root_reach(double head_width_m) {
    return slot_wall_reach(head_width_m) + 0.5 * head_width_m;
}
// A thin neck spans the head-box zone; the graspable rod starts where the
// paper's handle-extension box begins, so the cropped cloud covers it fully.
inline double neck_halfwidth(double head_width_m) { return 0.11 * head_width_m; }
inline double neck_start(double head_width_m) { return 0.80 * head_width_m; }
inline double handle_halfwidth(double head_width_m) { return 0.30 * head_width_m; }
inline double handle_start(double head_width_m) { return 1.70 * head_width_m; }

// Along-axis coordinate of the prong tips (negative: opening side).
inline double tip_s(double head_width_m) {
    const double ro = outer_radius(head_width_m);
    return -std::sqrt(ro * ro - 0.25 * head_width_m * head_width_m);
}

// True (x, y) board positions of the named head landmarks, meters.
struct Landmarks {
    double deep_x, deep_y;
    double grip_x, grip_y;  // centroid of (tip1, tip2, deep)
    double tip1_x, tip1_y;
    double tip2_x, tip2_y;
};

inline Landmarks landmarks(const WrenchSpec& w) {
    const double g = w.head_width_mm / 1000.0;
    const double c = std::cos(deg2rad(w.orientation_deg));
    const double s = std::sin(deg2rad(w.orientation_deg));
    const double ts = tip_s(g);
    const double ds = slot_root_reach(g);
    Landmarks lm{};
    lm.deep_x = w.x_m + c * ds;
    lm.deep_y = w.y_m + s * ds;
    lm.tip1_x = w.x_m + c * ts - s * (g / 2);
    lm.tip1_y = w.y_m + s * ts + c * (g / 2);
    lm.tip2_x = w.x_m + c * ts + s * (g / 2);
    lm.tip2_y = w.y_m + s * ts - c * (g / 2);
    lm.grip_x = (lm.deep_x + lm.tip1_x + lm.tip2_x) / 3.0;
    lm.grip_y = (lm.deep_y + lm.tip1_y + lm.tip2_y) / 3.0;
    return lm;
}

// Membership test for a board point (meters).
inline bool inside_silhouette(const WrenchSpec& w, double x, double y) {
    const double g = w.head_width_mm / 1000.0;
    const double c = std::cos(deg2rad(w.orientation_deg));
    const double sn = std::sin(deg2rad(w.orientation_deg));
    const double px = x - w.x_m, py = y - w.y_m;
    const double s = px * c + py * sn;   // along axis, + toward handle
    const double t = -px * sn + py * c;  // across axis

    const double ro = outer_radius(g);
    const double wall = slot_wall_reach(g);
    const double root_s = slot_wall_reach(g);  // half-disk center along the axis
    const bool in_slot =
        (std::fabs(t) <= g / 2 && s <= wall) ||
        ((s - root_s) * (s - root_s) + t * t <= 0.25 * g * g);
    const bool in_disk = px * px + py * py <= ro * ro;
    const double h0 = handle_start(g);
    const bool in_handle = std::fabs(t) <= handle_halfwidth(g) && s >= h0 &&
                           s <= h0 + w.handle_length_mm / 1000.0;
    const bool in_neck = std::fabs(t) <= neck_halfwidth(g) && s >= neck_start(g) && s <= h0;
    return !in_slot && (in_disk || in_handle || in_neck);
}

}  // namespace wrenchgeom

inline bool inside_valve_square(const ValveSpec& v, double x, double y) {
    const double e = v.edge_mm / 1000.0;
    const double c = std::cos(deg2rad(v.stem_angle_deg));
    const double s = std::sin(deg2rad(v.stem_angle_deg));
    const double px = x - v.x_m, py = y - v.y_m;
    const double a = px * c + py * s;
    const double b = -px * s + py * c;
    return std::fabs(a) <= e / 2 && std::fabs(b) <= e / 2;
}

// ---------------------------------------------------------------------------
// Cameras and ground truth
// ---------------------------------------------------------------------------

// Fronto-parallel camera at board offset (shift_x, shift_y), looking along +z.
inline PinholeCamera make_camera(const PanelSceneSpec& scene, double shift_x_m = 0.0,
                                 double shift_y_m = 0.0) {
    PinholeCamera cam;
    cam.fx = scene.render.fx;
    cam.fy = scene.render.fy;
    cam.cx = scene.render.width_px / 2.0;
    cam.cy = scene.render.height_px / 2.0;
    cam.pose.translation = {shift_x_m, shift_y_m, -scene.render.camera_depth_m};
    return cam;
}

inline geom::StereoRig make_rig(const PanelSceneSpec& scene, double shift_x_m = 0.0,
                                double shift_y_m = 0.0) {
    geom::StereoRig rig;
    rig.baseline = scene.render.baseline_m;
    rig.left = make_camera(scene, shift_x_m - rig.baseline / 2, shift_y_m);
    rig.right = make_camera(scene, shift_x_m + rig.baseline / 2, shift_y_m);
    return rig;
}

struct WrenchTruth {
    img::Rect head_bbox;           // pixels
    double head_u = 0, head_v = 0;
    double grip_u = 0, grip_v = 0;
    double deep_u = 0, deep_v = 0;
    double aperture_px = 0;
    double orientation_deg = 0;
    double head_width_mm = 0;
    Vec3 grip_center_cam;   // camera frame, meters
    Vec3 grasp_point_cam;   // handle centroid
    Plane handle_plane_cam;
};

struct ValveTruth {
    double center_u = 0, center_v = 0;
    double edge_px = 0;
    double stem_angle_deg = 0;
    Vec3 center_cam;
};

struct PanelTruth {
    std::vector<WrenchTruth> wrenches;
    ValveTruth valve;
    bool wrenches_visible = true;
    double tool_depth_m = 0;  // camera-to-tool-plane distance
};

namespace detail {
inline std::pair<double, double> project_board(const PinholeCamera& cam, double x, double y,
                                               double z_scene) {
    const Vec3 pc{x - cam.pose.translation.x, y - cam.pose.translation.y,
                  z_scene - cam.pose.translation.z};
    return cam.project(pc);
}
}  // namespace detail

inline PanelTruth compute_truth(const PanelSceneSpec& scene, const PinholeCamera& camera) {
    PanelTruth truth;
    truth.wrenches_visible = scene.wrenches_on_front;
    const double z_tool = -scene.standoff_mm / 1000.0;
    truth.tool_depth_m = z_tool - camera.pose.translation.z;

    for (const WrenchSpec& w : scene.wrenches) {
        const double g = w.head_width_mm / 1000.0;
        const auto lm = wrenchgeom::landmarks(w);
        WrenchTruth t;
        t.head_width_mm = w.head_width_mm;
        t.orientation_deg = w.orientation_deg;
        std::tie(t.head_u, t.head_v) = detail::project_board(camera, w.x_m, w.y_m, z_tool);
        std::tie(t.grip_u, t.grip_v) = detail::project_board(camera, lm.grip_x, lm.grip_y, z_tool);
        std::tie(t.deep_u, t.deep_v) = detail::project_board(camera, lm.deep_x, lm.deep_y, z_tool);
        const auto [t1u, t1v] = detail::project_board(camera, lm.tip1_x, lm.tip1_y, z_tool);
        const auto [t2u, t2v] = detail::project_board(camera, lm.tip2_x, lm.tip2_y, z_tool);
        t.aperture_px = std::hypot(t2u - t1u, t2v - t1v);

        // Truth box: square around the head disk with margin for context.
        const double ro_px = wrenchgeom::outer_radius(g) * camera.fx / truth.tool_depth_m;
        const int side = static_cast<int>(std::lround(3.4 * ro_px));
        t.head_bbox = {static_cast<int>(std::lround(t.head_u - side / 2.0)),
                       static_cast<int>(std::lround(t.head_v - side / 2.0)), side, side};

        t.grip_center_cam = {lm.grip_x - camera.pose.translation.x,
                             lm.grip_y - camera.pose.translation.y, truth.tool_depth_m};
        const double c = std::cos(deg2rad(w.orientation_deg));
        const double s = std::sin(deg2rad(w.orientation_deg));
        const double mid_s = wrenchgeom::handle_start(g) + w.handle_length_mm / 2000.0;
        t.grasp_point_cam = {w.x_m + c * mid_s - camera.pose.translation.x,
                             w.y_m + s * mid_s - camera.pose.translation.y, truth.tool_depth_m};
        t.handle_plane_cam = Plane::from_point_normal({0, 0, truth.tool_depth_m}, {0, 0, 1});
        truth.wrenches.push_back(t);
    }

    ValveTruth v;
    v.stem_angle_deg = scene.valve.stem_angle_deg;
    std::tie(v.center_u, v.center_v) =
        detail::project_board(camera, scene.valve.x_m, scene.valve.y_m, z_tool);
    v.edge_px = scene.valve.edge_mm / 1000.0 * camera.fx / truth.tool_depth_m;
    v.center_cam = {scene.valve.x_m - camera.pose.translation.x,
                    scene.valve.y_m - camera.pose.translation.y, truth.tool_depth_m};
    truth.valve = v;
    return truth;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

inline constexpr std::uint8_t kInkLevel = 45;
inline constexpr std::uint8_t kBoardLevel = 205;
inline constexpr std::uint8_t kBackdropLevel = 150;

namespace detail {

// Pixel <-> board-plane mapping for a fronto-parallel camera (identity
// rotation): board = origin + scale * pixel, one map per plane depth.
struct PlaneMap {
    double scale = 0.0;
    double x0 = 0.0, y0 = 0.0;

    std::pair<double, double> board(double u, double v) const {
        return {x0 + scale * u, y0 + scale * v};
    }
    std::pair<double, double> pixel(double bx, double by) const {
        return {(bx - x0) / scale, (by - y0) / scale};
    }
};

inline PlaneMap plane_map(const PinholeCamera& cam, double plane_z) {
    const double depth = plane_z - cam.pose.translation.z;
    PlaneMap m;
    m.scale = depth / cam.fx;
    m.x0 = cam.pose.translation.x - cam.cx * m.scale;
    m.y0 = cam.pose.translation.y - cam.cy * m.scale;
    return m;
}

// Ink coverage of one silhouette over its pixel bounding box: binary pass
// first, 4x supersampling only where the 3x3 neighborhood is mixed.
template <typename Member>
inline void splat_coverage(std::vector<float>& coverage, int w, int h, const PlaneMap& map,
                           double bx_lo, double by_lo, double bx_hi, double by_hi,
                           Member&& inside) {
    const auto [u_lo, v_lo] = map.pixel(bx_lo, by_lo);
    const auto [u_hi, v_hi] = map.pixel(bx_hi, by_hi);
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(u_lo, u_hi))) - 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(v_lo, v_hi))) - 1);
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max(u_lo, u_hi))) + 1);
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max(v_lo, v_hi))) + 1);
    if (x1 < x0 || y1 < y0) return;

    const int bw = x1 - x0 + 1, bh = y1 - y0 + 1;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(bw) * bh, 0);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const auto [bx, by] = map.board(x + 0.5, y + 0.5);
            mask[static_cast<std::size_t>(y - y0) * bw + (x - x0)] = inside(bx, by) ? 1 : 0;
        }
    auto mask_at = [&](int x, int y) -> int {
        if (x < x0 || x > x1 || y < y0 || y > y1) return 0;
        return mask[static_cast<std::size_t>(y - y0) * bw + (x - x0)];
    };
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const int m = mask_at(x, y);
            bool uniform = true;
            for (int dy = -1; dy <= 1 && uniform; ++dy)
                for (int dx = -1; dx <= 1 && uniform; ++dx)
                    if (mask_at(x + dx, y + dy) != m) uniform = false;
            float cov;
            if (uniform) {
                cov = static_cast<float>(m);
            } else {
                int inside_n = 0;
                for (int sy = 0; sy < 2; ++sy)
                    for (int sx = 0; sx < 2; ++sx) {
                        const auto [bx, by] =
                            map.board(x + 0.25 + 0.5 * sx, y + 0.25 + 0.5 * sy);
                        if (inside(bx, by)) ++inside_n;
                    }
                cov = inside_n / 4.0f;
            }
            float& c = coverage[static_cast<std::size_t>(y) * w + x];
            c = std::max(c, cov);
        }
}

}  // namespace detail

// Dark-on-light rasterization of the tool plane and board, with a seeded
// intensity gradient and additive noise. Deterministic per seed. Cameras are
// fronto-parallel (identity rotation); silhouette edges are supersampled so
// they carry fractional coverage.
inline img::RasterImage render_panel_image(const PanelSceneSpec& scene,
                                           const PinholeCamera& camera,
                                           std::uint64_t lighting_seed) {
    require(camera.pose.translation.z < 0.0, "config-error", "camera behind panel plane");
    const int w = scene.render.width_px, h = scene.render.height_px;
    img::RasterImage out(w, h);

    const double z_tool = -scene.standoff_mm / 1000.0;
    const auto tool_map = detail::plane_map(camera, z_tool);
    const auto board_map = detail::plane_map(camera, 0.0);

    // Ink coverage on the tool plane.
    std::vector<float> ink(static_cast<std::size_t>(w) * h, 0.0f);
    if (scene.wrenches_on_front) {
        for (const WrenchSpec& wr : scene.wrenches) {
            const double g = wr.head_width_mm / 1000.0;
            const double reach =
                std::max(wrenchgeom::outer_radius(g),
                         wrenchgeom::handle_start(g) + wr.handle_length_mm / 1000.0);
            detail::splat_coverage(ink, w, h, tool_map, wr.x_m - reach, wr.y_m - reach,
                                   wr.x_m + reach, wr.y_m + reach, [&](double bx, double by) {
                                       return wrenchgeom::inside_silhouette(wr, bx, by);
                                   });
        }
        const double vr = scene.valve.edge_mm / 1000.0;  // covers any rotation
        detail::splat_coverage(ink, w, h, tool_map, scene.valve.x_m - vr, scene.valve.y_m - vr,
                               scene.valve.x_m + vr, scene.valve.y_m + vr,
                               [&](double bx, double by) {
                                   return inside_valve_square(scene.valve, bx, by);
                               });
    }

    Rng rng(lighting_seed);
    const double grad_ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double gx = std::cos(grad_ang), gy = std::sin(grad_ang);
    const double grad_amp = scene.render.gradient;
    const double noise_sigma = scene.render.noise_sigma;

    for (int py = 0; py < h; ++py) {
        for (int px = 0; px < w; ++px) {
            const auto [bx, by] = board_map.board(px + 0.5, py + 0.5);
            double level =
                (std::fabs(bx) <= scene.board_w_m / 2 && std::fabs(by) <= scene.board_h_m / 2)
                    ? kBoardLevel
                    : kBackdropLevel;
            const float cov = ink[static_cast<std::size_t>(py) * w + px];
            if (cov > 0.0f) level = cov * kInkLevel + (1.0 - cov) * level;

            const double u = static_cast<double>(px) / w - 0.5;
            const double v = static_cast<double>(py) / h - 0.5;
            level += grad_amp * (u * gx + v * gy);
            if (noise_sigma > 0.0) level += rng.normal_clamped(noise_sigma);
            out.at(px, py) = static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Handle point cloud (stand-in for dense stereo reconstruction)
// ---------------------------------------------------------------------------

// Camera-frame points sampled on the wrench handle surface with gaussian
// depth noise, plus floor(outlier_fraction * n) points at board depth.
// wrench_index < 0 selects the scene target.
inline std::vector<Vec3> synthesize_handle_cloud(const PanelSceneSpec& scene,
                                                 const PinholeCamera& camera,
                                                 double noise_sigma, double outlier_fraction,
                                                 std::uint64_t seed, int wrench_index = -1,
                                                 std::size_t n_points = 1600) {
    require(outlier_fraction >= 0.0 && outlier_fraction < 0.5, "contract-violation",
            "outlier fraction must be in [0, 0.5)");
    const int idx = wrench_index < 0 ? scene.target_index : wrench_index;
    require(idx >= 0 && idx < static_cast<int>(scene.wrenches.size()), "config-error",
            "wrench index out of range");
    const WrenchSpec& w = scene.wrenches[static_cast<std::size_t>(idx)];

    const double g = w.head_width_mm / 1000.0;
    const double c = std::cos(deg2rad(w.orientation_deg));
    const double s = std::sin(deg2rad(w.orientation_deg));
    const double s0 = wrenchgeom::handle_start(g);
    const double len = w.handle_length_mm / 1000.0;
    const double hw = wrenchgeom::handle_halfwidth(g);

    const double z_tool = -scene.standoff_mm / 1000.0 - camera.pose.translation.z;
    const double z_board = 0.0 - camera.pose.translation.z;

    Rng rng(seed);
    std::vector<Vec3> cloud;
    cloud.reserve(n_points);
    const std::size_t n_out = static_cast<std::size_t>(outlier_fraction * n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double along = rng.uniform(s0, s0 + len);
        const double across = rng.uniform(-hw, hw);
        const double bx = w.x_m + c * along - s * across;
        const double by = w.y_m + s * along + c * across;
        if (i < n_out) {
            // Board-depth outlier seen around the handle region.
            cloud.push_back({bx - camera.pose.translation.x, by - camera.pose.translation.y,
                             z_board});
        } else {
            const double dz = noise_sigma > 0.0 ? rng.normal_clamped(noise_sigma) : 0.0;
            cloud.push_back({bx - camera.pose.translation.x, by - camera.pose.translation.y,
                             z_tool + dz});
        }
    }
    return cloud;
}

inline void write_xyz(const std::vector<Vec3>& cloud, const std::string& path) {
    std::ofstream f(path);
    require(f.good(), "config-error", "cannot open " + path + " for writing");
    char line[128];
    for (const Vec3& p : cloud) {
        std::snprintf(line, sizeof(line), "%.9g %.9g %.9g\n", p.x, p.y, p.z);
        f << line;
    }
}

// ---------------------------------------------------------------------------
// Scenario file (JSON, units explicit in key names)
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const Scenario& sc) {
    nlohmann::json j;
    auto& arena = j["arena"];
    arena["bounds_w_m"] = sc.arena.bounds_w;
    arena["bounds_h_m"] = sc.arena.bounds_h;
    auto seg_list = [](const std::vector<Seg2d>& segs) {
        nlohmann::json a = nlohmann::json::array();
        for (const Seg2d& s : segs)
            a.push_back({{"x1_m", s.x1}, {"y1_m", s.y1}, {"x2_m", s.x2}, {"y2_m", s.y2}});
        return a;
    };
    arena["walls"] = seg_list(sc.arena.walls);
    arena["distractors"] = seg_list(sc.arena.distractors);
    arena["panel"] = {{"x_m", sc.arena.panel.x},
                      {"y_m", sc.arena.panel.y},
                      {"heading_deg", sc.arena.panel.heading_deg},
                      {"width_m", sc.arena.panel.width},
                      {"thickness_m", sc.arena.panel.thickness}};

    j["laser"] = {{"fov_deg", sc.laser.fov_deg},
                  {"angular_resolution_deg", sc.laser.angular_resolution_deg},
                  {"max_range_m", sc.laser.max_range},
                  {"min_range_m", sc.laser.min_range},
                  {"range_noise_sigma_m", sc.laser.range_noise_sigma}};

    auto& ps = j["panel_scene"];
    ps["wrenches"] = nlohmann::json::array();
    for (const WrenchSpec& w : sc.scene.wrenches)
        ps["wrenches"].push_back({{"head_width_mm", w.head_width_mm},
                                  {"handle_length_mm", w.handle_length_mm},
                                  {"x_m", w.x_m},
                                  {"y_m", w.y_m},
                                  {"orientation_deg", w.orientation_deg}});
    ps["target_index"] = sc.scene.target_index;
    ps["backup_index"] = sc.scene.backup_index;
    ps["valve"] = {{"edge_mm", sc.scene.valve.edge_mm},
                   {"x_m", sc.scene.valve.x_m},
                   {"y_m", sc.scene.valve.y_m},
                   {"stem_angle_deg", sc.scene.valve.stem_angle_deg}};
    ps["wrenches_on_front"] = sc.scene.wrenches_on_front;
    ps["standoff_mm"] = sc.scene.standoff_mm;
    ps["board_w_m"] = sc.scene.board_w_m;
    ps["board_h_m"] = sc.scene.board_h_m;
    ps["render"] = {{"width_px", sc.scene.render.width_px},
                    {"height_px", sc.scene.render.height_px},
                    {"fx_px", sc.scene.render.fx},
                    {"fy_px", sc.scene.render.fy},
                    {"camera_depth_m", sc.scene.render.camera_depth_m},
                    {"baseline_m", sc.scene.render.baseline_m},
                    {"noise_sigma", sc.scene.render.noise_sigma},
                    {"gradient", sc.scene.render.gradient}};
    return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario sc;
    const auto& arena = j.at("arena");
    sc.arena.bounds_w = arena.at("bounds_w_m");
    sc.arena.bounds_h = arena.at("bounds_h_m");
    auto read_segs = [](const nlohmann::json& a) {
        std::vector<Seg2d> segs;
        for (const auto& s : a)
            segs.push_back({s.at("x1_m"), s.at("y1_m"), s.at("x2_m"), s.at("y2_m")});
        return segs;
    };
    sc.arena.walls = read_segs(arena.at("walls"));
    sc.arena.distractors = read_segs(arena.at("distractors"));
    const auto& p = arena.at("panel");
    sc.arena.panel = {p.at("x_m"), p.at("y_m"), p.at("heading_deg"), p.at("width_m"),
                      p.at("thickness_m")};

    const auto& l = j.at("laser");
    sc.laser = {l.at("fov_deg"), l.at("angular_resolution_deg"), l.at("max_range_m"),
                l.at("min_range_m"), l.at("range_noise_sigma_m")};

    const auto& ps = j.at("panel_scene");
    for (const auto& w : ps.at("wrenches"))
        sc.scene.wrenches.push_back({w.at("head_width_mm"), w.at("handle_length_mm"),
                                     w.at("x_m"), w.at("y_m"), w.at("orientation_deg")});
    sc.scene.target_index = ps.at("target_index");
    sc.scene.backup_index = ps.at("backup_index");
    const auto& v = ps.at("valve");
    sc.scene.valve = {v.at("edge_mm"), v.at("x_m"), v.at("y_m"), v.at("stem_angle_deg")};
    sc.scene.wrenches_on_front = ps.at("wrenches_on_front");
    sc.scene.standoff_mm = ps.at("standoff_mm");
    sc.scene.board_w_m = ps.at("board_w_m");
    sc.scene.board_h_m = ps.at("board_h_m");
    const auto& r = ps.at("render");
    sc.scene.render.width_px = r.at("width_px");
    sc.scene.render.height_px = r.at("height_px");
    sc.scene.render.fx = r.at("fx_px");
    sc.scene.render.fy = r.at("fy_px");
    sc.scene.render.camera_depth_m = r.at("camera_depth_m");
    sc.scene.render.baseline_m = r.at("baseline_m");
    sc.scene.render.noise_sigma = r.at("noise_sigma");
    sc.scene.render.gradient = r.at("gradient");
    return sc;
}

inline void validate_scenario(const Scenario& sc) {
    validate_arena(sc.arena);
    validate_laser(sc.laser);
    validate_panel_scene(sc.scene);
}

inline std::string serialize_scenario(const Scenario& sc) { return to_json(sc).dump(2) + "\n"; }

inline Scenario parse_scenario(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail("config-error", std::string("scenario parse failure: ") + e.what());
    }
    try {
        Scenario sc = scenario_from_json(j);
        validate_scenario(sc);
        return sc;
    } catch (const nlohmann::json::exception& e) {
        fail("config-error", std::string("scenario field failure: ") + e.what());
    }
}

inline void save_scenario(const Scenario& sc, const std::string& path) {
    std::ofstream f(path);
    require(f.good(), "config-error", "cannot open " + path + " for writing");
    f << serialize_scenario(sc);
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "config-error", "cannot open scenario " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_scenario(ss.str());
}

}  // namespace panelbot::sim
