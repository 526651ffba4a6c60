#pragma once

// Mission finite state machine M = (S, A, t) and the closed-loop autonomous
// run: patrol, panel search, docking, panel inspection (with one change-side
// retry), wrench recognition and grasping with the backup-wrench recovery,
// valve alignment, and the 360-degree rotation waypoint sweep.

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "panelbot/cascade.hpp"
#include "panelbot/core.hpp"
#include "panelbot/geometry.hpp"
#include "panelbot/panel.hpp"
#include "panelbot/scene.hpp"
#include "panelbot/valve.hpp"
#include "panelbot/vision.hpp"
#include "panelbot/wrench.hpp"

namespace panelbot::mission {

using geom::Vec3;

// ---------------------------------------------------------------------------
// States, events, transition table
// ---------------------------------------------------------------------------

enum class MissionState {
    NavigatePatrol,
    ApproachPanel,
    Dock,
    InspectPanel,
    ChangeSide,
    RecognizeWrench,
    GraspWrench,
    AlignValve,
    OperateValve,
    WrenchLostRecovery,
    EmergencyStop,
    Done,
};

enum class MissionEvent {
    PanelFound,
    PanelNotFound,
    Docked,
    WrenchesVisible,
    WrenchesNotVisible,
    TargetRecognized,
    GraspOk,
    GraspWeak,
    WrenchLost,
    ValveAligned,
    RotationComplete,
    Emergency,
    Tick,
};

inline constexpr std::array<MissionState, 12> kAllStates = {
    MissionState::NavigatePatrol,  MissionState::ApproachPanel,
    MissionState::Dock,            MissionState::InspectPanel,
    MissionState::ChangeSide,      MissionState::RecognizeWrench,
    MissionState::GraspWrench,     MissionState::AlignValve,
    MissionState::OperateValve,    MissionState::WrenchLostRecovery,
    MissionState::EmergencyStop,   MissionState::Done,
};

inline constexpr std::array<MissionEvent, 13> kAllEvents = {
    MissionEvent::PanelFound,     MissionEvent::PanelNotFound,
    MissionEvent::Docked,         MissionEvent::WrenchesVisible,
    MissionEvent::WrenchesNotVisible, MissionEvent::TargetRecognized,
    MissionEvent::GraspOk,        MissionEvent::GraspWeak,
    MissionEvent::WrenchLost,     MissionEvent::ValveAligned,
    MissionEvent::RotationComplete, MissionEvent::Emergency,
    MissionEvent::Tick,
};

inline const char* to_string(MissionState s) {
    switch (s) {
        case MissionState::NavigatePatrol: return "NavigatePatrol";
        case MissionState::ApproachPanel: return "ApproachPanel";
        case MissionState::Dock: return "Dock";
        case MissionState::InspectPanel: return "InspectPanel";
        case MissionState::ChangeSide: return "ChangeSide";
        case MissionState::RecognizeWrench: return "RecognizeWrench";
        case MissionState::GraspWrench: return "GraspWrench";
        case MissionState::AlignValve: return "AlignValve";
        case MissionState::OperateValve: return "OperateValve";
        case MissionState::WrenchLostRecovery: return "WrenchLostRecovery";
        case MissionState::EmergencyStop: return "EmergencyStop";
        case MissionState::Done: return "Done";
    }
    return "?";
}

inline const char* to_string(MissionEvent e) {
    switch (e) {
        case MissionEvent::PanelFound: return "PanelFound";
        case MissionEvent::PanelNotFound: return "PanelNotFound";
        case MissionEvent::Docked: return "Docked";
        case MissionEvent::WrenchesVisible: return "WrenchesVisible";
        case MissionEvent::WrenchesNotVisible: return "WrenchesNotVisible";
        case MissionEvent::TargetRecognized: return "TargetRecognized";
        case MissionEvent::GraspOk: return "GraspOk";
        case MissionEvent::GraspWeak: return "GraspWeak";
        case MissionEvent::WrenchLost: return "WrenchLost";
        case MissionEvent::ValveAligned: return "ValveAligned";
        case MissionEvent::RotationComplete: return "RotationComplete";
        case MissionEvent::Emergency: return "Emergency";
        case MissionEvent::Tick: return "Tick";
    }
    return "?";
}

struct TransitionTable {
    std::map<std::pair<MissionState, MissionEvent>, MissionState> map;

    std::optional<MissionState> lookup(MissionState s, MissionEvent e) const {
        auto it = map.find({s, e});
        if (it == map.end()) return std::nullopt;
        return it->second;
    }
};

inline TransitionTable default_transition_table() {
    using S = MissionState;
    using E = MissionEvent;
    TransitionTable t;
    auto add = [&](S s, E e, S next) { t.map[{s, e}] = next; };

    add(S::NavigatePatrol, E::PanelNotFound, S::NavigatePatrol);
    add(S::NavigatePatrol, E::PanelFound, S::ApproachPanel);
    add(S::ApproachPanel, E::Tick, S::Dock);
    add(S::ApproachPanel, E::PanelNotFound, S::NavigatePatrol);
    add(S::Dock, E::Docked, S::InspectPanel);
    add(S::InspectPanel, E::WrenchesVisible, S::RecognizeWrench);
    add(S::InspectPanel, E::WrenchesNotVisible, S::ChangeSide);
    add(S::ChangeSide, E::Tick, S::InspectPanel);
    add(S::RecognizeWrench, E::TargetRecognized, S::GraspWrench);
    add(S::RecognizeWrench, E::WrenchesNotVisible, S::ChangeSide);
    add(S::GraspWrench, E::GraspOk, S::AlignValve);
    add(S::GraspWrench, E::GraspWeak, S::AlignValve);
    add(S::GraspWrench, E::WrenchLost, S::WrenchLostRecovery);
    add(S::WrenchLostRecovery, E::TargetRecognized, S::GraspWrench);
    add(S::AlignValve, E::ValveAligned, S::OperateValve);
    add(S::OperateValve, E::RotationComplete, S::Done);
    add(S::OperateValve, E::WrenchLost, S::WrenchLostRecovery);
    add(S::Done, E::Tick, S::Done);

    // Emergency is absorbing and reachable from everywhere in one step.
    for (MissionState s : kAllStates) add(s, E::Emergency, S::EmergencyStop);
    for (MissionEvent e : kAllEvents) add(S::EmergencyStop, e, S::EmergencyStop);
    return t;
}

// Pure lookup; undefined pairs self-loop with a logged warning.
inline MissionState step(MissionState state, MissionEvent event, const TransitionTable& table,
                         std::vector<std::string>* warnings = nullptr) {
    if (auto next = table.lookup(state, event)) return *next;
    if (warnings)
        warnings->push_back(std::string("undefined transition (") + to_string(state) + ", " +
                            to_string(event) + "): self-loop");
    return state;
}

// ---------------------------------------------------------------------------
// Patrol and rotation waypoints
// ---------------------------------------------------------------------------

inline const sim::Pose2& patrol_next(const std::vector<sim::Pose2>& waypoints,
                                     std::size_t current_index) {
    require(!waypoints.empty(), "config-error", "empty patrol waypoint list");
    return waypoints[(current_index + 1) % waypoints.size()];
}

struct EePose {
    Vec3 position;
    double tangent_deg = 0.0;
};

// n poses uniformly sampled on the circle of radius r about the valve center,
// sweeping exactly 360 degrees (the wrap back to the first pose closes it).
// The circle lies in the panel plane (x, y at the center's z).
inline std::vector<EePose> valve_rotation_waypoints(const Vec3& center, double r, int n,
                                                    bool clockwise,
                                                    double start_angle_deg = 0.0) {
    require(r > 0.0, "config-error", "rotation radius must be positive");
    require(n >= 4, "config-error", "need at least 4 rotation waypoints");
    const double dir = clockwise ? -1.0 : 1.0;
    std::vector<EePose> poses;
    poses.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double ang = start_angle_deg + dir * 360.0 * k / n;
        EePose p;
        p.position = {center.x + r * std::cos(deg2rad(ang)),
                      center.y + r * std::sin(deg2rad(ang)), center.z};
        p.tangent_deg = wrap_deg(ang + dir * 90.0);
        poses.push_back(p);
    }
    return poses;
}

// ---------------------------------------------------------------------------
// Mission run
// ---------------------------------------------------------------------------

enum class GraspOutcome { NotAttempted, CorrectGrasp, WeakGrasp, Loss };

inline const char* to_string(GraspOutcome o) {
    switch (o) {
        case GraspOutcome::NotAttempted: return "NotAttempted";
        case GraspOutcome::CorrectGrasp: return "CorrectGrasp";
        case GraspOutcome::WeakGrasp: return "Grasp";
        case GraspOutcome::Loss: return "Loss";
    }
    return "?";
}

struct TraceRow {
    int tick = 0;
    MissionState state = MissionState::NavigatePatrol;
    MissionEvent event = MissionEvent::Tick;
    MissionState next = MissionState::NavigatePatrol;
    std::string payload;
};

struct MissionReport {
    std::vector<TraceRow> trace;
    std::vector<std::string> warnings;
    MissionState final_state = MissionState::EmergencyStop;
    bool correct_recognition = false;
    GraspOutcome outcome = GraspOutcome::NotAttempted;
    int change_side_count = 0;
    int recovery_count = 0;
    panel::DockingEstimate docking;
    double grasp_error_mm = -1.0;
    double orientation_error_deg = -1.0;
    double valve_angle_error_deg = -1.0;

    bool scored() const {
        return outcome == GraspOutcome::CorrectGrasp || outcome == GraspOutcome::WeakGrasp;
    }
};

struct MissionConfig {
    std::vector<sim::Pose2> patrol_waypoints;  // default derived from the arena
    double dock_distance = 0.80;
    double dock_sigma_pos = 0.008;  // actuation noise, meters
    double dock_sigma_deg = 0.4;
    panel::FinderParams finder;
    double panel_accept_similarity = 0.85;
    double docking_bearing_window_deg = 70.0;
    double target_tolerance_mm = 1.5;
    double slip_probability = 0.10;
    double correct_grasp_mm = 5.0;
    double weak_grasp_mm = 15.0;
    std::size_t frames = 10;
    double cloud_noise_sigma = 0.002;
    double cloud_outlier_fraction = 0.15;
    std::size_t cloud_points = 400;
    int rotation_waypoints = 36;
    bool rotation_clockwise = true;
    cascade::Cascade detector;
    cascade::DetectParams detect;
    valve::CannyParams canny;
    vision::HoughParams hough{1.0, 1.0, 18, 25.0, 4.0};
    int max_ticks = 200;
};

namespace detail {

struct PanelEstimate {
    Vec3 center_line;  // panel center-line midpoint estimate
    Vec3 direction;    // unit, along the panel
    Vec3 toward_robot;  // unit normal pointing at the robot
};

inline PanelEstimate estimate_panel(const panel::PanelCandidate& cand, const sim::Pose2& robot,
                                    double thickness) {
    PanelEstimate e;
    e.direction = cand.line.direction;
    Vec3 n{-e.direction.y, e.direction.x, 0.0};
    const Vec3 to_robot{robot.x - cand.center.x, robot.y - cand.center.y, 0.0};
    if (n.dot(to_robot) < 0.0) n = n * -1.0;
    e.toward_robot = n;
    e.center_line = cand.center - n * (thickness / 2.0);
    return e;
}

inline std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

}  // namespace detail

// Place the robot at the desired dock pose relative to an estimated panel,
// with gaussian actuation noise.
inline sim::Pose2 dock_robot(const detail::PanelEstimate& est, double dock_distance, Rng& rng,
                             double sigma_pos, double sigma_deg) {
    const Vec3 pos = est.center_line + est.toward_robot * dock_distance;
    sim::Pose2 pose;
    pose.x = pos.x + rng.normal_clamped(sigma_pos);
    pose.y = pos.y + rng.normal_clamped(sigma_pos);
    pose.theta_deg = rad2deg(std::atan2(est.direction.y, est.direction.x)) +
                     rng.normal_clamped(sigma_deg);
    return pose;
}

// Full closed loop. Deterministic per seed. The trace always starts at
// NavigatePatrol and ends at Done or EmergencyStop.
inline MissionReport run_mission(const sim::Scenario& scenario, const MissionConfig& config,
                                 std::uint64_t seed) {
    sim::validate_scenario(scenario);
    require(config.detector.trained(), "config-error", "mission needs a trained detector");

    const sim::ArenaSpec& arena = scenario.arena;
    const sim::PanelSceneSpec& scene = scenario.scene;

    std::vector<sim::Pose2> waypoints = config.patrol_waypoints;
    if (waypoints.empty()) {
        waypoints.push_back({arena.bounds_w * 0.35, arena.bounds_h * 0.30, 60.0});
        waypoints.push_back({arena.bounds_w * 0.65, arena.bounds_h * 0.45, 120.0});
        waypoints.push_back({arena.bounds_w * 0.50, arena.bounds_h * 0.60, 90.0});
    }

    MissionReport report;
    Rng slip_rng = derived_rng(seed, "slip");
    Rng dock_rng = derived_rng(seed, "dock");
    const TransitionTable table = default_transition_table();

    MissionState state = MissionState::NavigatePatrol;
    int tick = 0;
    std::size_t wp_index = 0;
    sim::Pose2 robot = waypoints[0];
    auto clamp_pose = [&](sim::Pose2 p) {
        p.x = std::clamp(p.x, 0.3, arena.bounds_w - 0.3);
        p.y = std::clamp(p.y, 0.3, arena.bounds_h - 0.3);
        return p;
    };
    std::optional<detail::PanelEstimate> panel_est;

    // Docked-side bookkeeping: +1 = front face of the panel.
    int docked_side = 1;
    int change_side_used = 0;
    int recovery_used = 0;
    std::set<int> lost_detections;

    // Perception results carried across states.
    std::vector<cascade::Detection> detections;
    std::vector<double> jaw_widths;
    std::vector<int> truth_match;  // detection -> truth wrench index (or -1)
    int chosen_detection = -1;
    int chosen_truth = -1;
    std::optional<wrench::AccumulatedEstimate> wrench_estimate;
    std::optional<Vec3> valve_center;
    geom::PinholeCamera camera;
    sim::PanelTruth truth;

    auto emit = [&](MissionEvent event, std::string payload = "") {
        const MissionState next = step(state, event, table, &report.warnings);
        report.trace.push_back({tick, state, event, next, std::move(payload)});
        state = next;
        ++tick;
    };

    // Merged 360-degree coverage from the two opposed 270-degree scanners; a
    // single scanner's blind wedge truncates walls into panel-sized fragments.
    auto merged_scan_points = [&](const sim::Pose2& pose, std::string_view tag) {
        const auto fore = sim::simulate_scan(arena, pose, scenario.laser,
                                             derive_seed(seed, std::string(tag) + "-fore"));
        sim::Pose2 aft_pose = pose;
        aft_pose.theta_deg += 180.0;
        const auto aft = sim::simulate_scan(arena, aft_pose, scenario.laser,
                                            derive_seed(seed, std::string(tag) + "-aft"));
        return sim::merge_scans(fore, aft, geom::RigidTransform::identity());
    };

    // Scene as rendered from the side the robot is currently docked at: the
    // tools are visible when the docked side matches the scene's tool face.
    auto scene_for_side = [&](int side) {
        sim::PanelSceneSpec s = scene;
        s.wrenches_on_front = (side > 0) == scene.wrenches_on_front;
        return s;
    };

    while (tick < config.max_ticks && state != MissionState::Done &&
           state != MissionState::EmergencyStop) {
        switch (state) {
            case MissionState::NavigatePatrol: {
                const auto points = merged_scan_points(robot, "scan-" + std::to_string(tick));
                const auto candidates =
                    panel::find_panel(points, arena.panel.width, arena.panel.thickness,
                                      config.finder, derive_seed(seed, "finder"));
                if (!candidates.empty() &&
                    candidates.front().similarity >= config.panel_accept_similarity) {
                    panel_est = detail::estimate_panel(candidates.front(), robot,
                                                       arena.panel.thickness);
                    emit(MissionEvent::PanelFound,
                         detail::fmt("similarity=%.3f", candidates.front().similarity));
                } else {
                    // Arrival at a waypoint is never exact; the jitter also
                    // varies the viewpoint across patrol laps.
                    const sim::Pose2& next = patrol_next(waypoints, wp_index);
                    wp_index = (wp_index + 1) % waypoints.size();
                    Rng jitter = derived_rng(seed, "waypoint-" + std::to_string(tick));
                    robot.x = std::clamp(next.x + jitter.uniform(-4.0, 4.0), 0.5,
                                         arena.bounds_w - 0.5);
                    robot.y = std::clamp(next.y + jitter.uniform(-4.0, 4.0), 0.5,
                                         arena.bounds_h - 0.5);
                    robot.theta_deg = next.theta_deg + jitter.uniform(-25.0, 25.0);
                    emit(MissionEvent::PanelNotFound);
                }
                break;
            }
            case MissionState::ApproachPanel: {
                // Pre-dock staging point, 2 m out along the estimated normal.
                const Vec3 stage = panel_est->center_line + panel_est->toward_robot * 2.0;
                robot = clamp_pose({stage.x, stage.y,
                                    rad2deg(std::atan2(panel_est->direction.y,
                                                       panel_est->direction.x))});
                // Re-estimate from close range; the patrol-distance fit is too
                // coarse to dock against.
                const auto points =
                    merged_scan_points(robot, "approach-scan-" + std::to_string(tick));
                const auto candidates = panel::find_panel(
                    points, arena.panel.width, arena.panel.thickness, config.finder,
                    derive_seed(seed, "approach-finder"));
                const bool consistent =
                    !candidates.empty() &&
                    candidates.front().similarity >= config.panel_accept_similarity &&
                    (candidates.front().center - panel_est->center_line).norm() <= 3.0;
                if (!consistent) {
                    panel_est.reset();
                    emit(MissionEvent::PanelNotFound, "lost at approach");
                    break;
                }
                panel_est =
                    detail::estimate_panel(candidates.front(), robot, arena.panel.thickness);
                emit(MissionEvent::Tick);
                break;
            }
            case MissionState::Dock: {
                robot = clamp_pose(dock_robot(*panel_est, config.dock_distance, dock_rng,
                                              config.dock_sigma_pos, config.dock_sigma_deg));
                report.docking = panel::docking_report(robot, arena.panel);

                // Which face of the panel the robot ended up on.
                const auto [nx, ny] = sim::panel_normal(arena.panel);
                docked_side =
                    (nx * (robot.x - arena.panel.x) + ny * (robot.y - arena.panel.y)) >= 0.0 ? 1
                                                                                             : -1;
                // Exercise the scan-based docking angle estimate at the dock.
                const auto scan = sim::simulate_scan(arena, robot, scenario.laser,
                                                     derive_seed(seed, "dock-scan"));
                double alpha_est = 0.0;
                try {
                    alpha_est = panel::estimate_docking_angle(
                        scan, panel::robot_side_plane_for_heading(),
                        config.docking_bearing_window_deg, {}, derive_seed(seed, "dock-angle"));
                } catch (const Error&) {
                    alpha_est = report.docking.alpha;
                }
                emit(MissionEvent::Docked,
                     detail::fmt("d=%.3f o=%.3f alpha=%.2f", report.docking.d, report.docking.o,
                                 alpha_est));
                break;
            }
            case MissionState::InspectPanel: {
                const sim::PanelSceneSpec side_scene = scene_for_side(docked_side);
                camera = sim::make_camera(side_scene, report.docking.o, 0.0);
                const auto frame = sim::render_panel_image(
                    side_scene, camera, derive_seed(seed, "inspect-" + std::to_string(tick)));
                detections = cascade::detect(frame, config.detector, config.detect);
                if (!detections.empty()) {
                    // Align the camera to the detected tool area (the arm
                    // centers the view), then re-detect.
                    double mean_u = 0.0;
                    for (const auto& d : detections) mean_u += d.bbox.x + d.bbox.w / 2.0;
                    mean_u /= static_cast<double>(detections.size());
                    const double tool_depth = side_scene.render.camera_depth_m -
                                              side_scene.standoff_mm / 1000.0;
                    const double shift = (mean_u - camera.cx) * tool_depth / camera.fx;
                    camera = sim::make_camera(side_scene,
                                              camera.pose.translation.x + shift, 0.0);
                    const auto centered = sim::render_panel_image(
                        side_scene, camera,
                        derive_seed(seed, "inspect2-" + std::to_string(tick)));
                    detections = cascade::detect(centered, config.detector, config.detect);
                }
                truth = sim::compute_truth(side_scene, camera);
                if (!detections.empty()) {
                    emit(MissionEvent::WrenchesVisible,
                         detail::fmt("detections=%.0f", static_cast<double>(detections.size())));
                } else if (change_side_used == 0) {
                    emit(MissionEvent::WrenchesNotVisible);
                } else {
                    emit(MissionEvent::Emergency, "tools not found on either side");
                }
                break;
            }
            case MissionState::ChangeSide: {
                ++change_side_used;
                report.change_side_count = change_side_used;
                docked_side = -docked_side;
                // Mirror the dock pose around the panel center line.
                const auto [nx, ny] = sim::panel_normal(arena.panel);
                const double dist =
                    nx * (robot.x - arena.panel.x) + ny * (robot.y - arena.panel.y);
                robot.x -= 2.0 * dist * nx;
                robot.y -= 2.0 * dist * ny;
                robot = clamp_pose(robot);
                emit(MissionEvent::Tick);
                break;
            }
            case MissionState::RecognizeWrench:
            case MissionState::WrenchLostRecovery: {
                const bool recovering = state == MissionState::WrenchLostRecovery;
                if (recovering) {
                    ++recovery_used;
                    report.recovery_count = recovery_used;
                    if (recovery_used > 1) {
                        emit(MissionEvent::Emergency, "backup wrench also lost");
                        break;
                    }
                }
                const sim::PanelSceneSpec side_scene = scene_for_side(docked_side);
                if (detections.empty()) {
                    if (change_side_used == 0 && !recovering)
                        emit(MissionEvent::WrenchesNotVisible);
                    else
                        emit(MissionEvent::Emergency, "no wrench candidates");
                    break;
                }

                // Match detections to truth and measure jaw widths as the
                // median over a few probe frames (single-frame apertures
                // quantize to the pixel grid).
                std::array<img::RasterImage, 3> probes;
                for (int p = 0; p < 3; ++p)
                    probes[static_cast<std::size_t>(p)] = sim::render_panel_image(
                        side_scene, camera,
                        derive_seed(seed, "probe-" + std::to_string(tick) + "-" +
                                              std::to_string(p)));
                jaw_widths.assign(detections.size(), -1000.0);
                truth_match.assign(detections.size(), -1);
                for (std::size_t i = 0; i < detections.size(); ++i) {
                    if (lost_detections.count(static_cast<int>(i))) continue;
                    for (std::size_t t = 0; t < truth.wrenches.size(); ++t)
                        if (img::iou(detections[i].bbox, truth.wrenches[t].head_bbox) >= 0.3)
                            truth_match[i] = static_cast<int>(t);
                    std::vector<double> widths;
                    for (int p = 0; p < 3; ++p) {
                        try {
                            const auto cloud = sim::synthesize_handle_cloud(
                                side_scene, camera, config.cloud_noise_sigma,
                                config.cloud_outlier_fraction,
                                derive_seed(seed, "width-cloud-" + std::to_string(i) + "-" +
                                                      std::to_string(p)),
                                truth_match[i] >= 0 ? truth_match[i] : -1, config.cloud_points);
                            const auto obs = wrench::observe_wrench(
                                probes[static_cast<std::size_t>(p)], detections[i].bbox, cloud,
                                camera, {},
                                derive_seed(seed, "width-seg-" + std::to_string(i)));
                            widths.push_back(obs.jaw_width_mm);
                        } catch (const Error&) {
                        }
                    }
                    if (!widths.empty()) jaw_widths[i] = median_of(widths);
                }

                const double commanded =
                    scene.wrenches[static_cast<std::size_t>(scene.target_index)].head_width_mm;
                wrench::TargetSelection sel;
                try {
                    sel = wrench::select_target(jaw_widths, commanded, config.target_tolerance_mm);
                } catch (const Error& e) {
                    if (change_side_used == 0 && !recovering)
                        emit(MissionEvent::WrenchesNotVisible, e.label());
                    else
                        emit(MissionEvent::Emergency, e.what());
                    break;
                }
                chosen_detection = sel.target;

                // Ten-frame accumulation on the chosen wrench.
                const int truth_idx = truth_match[static_cast<std::size_t>(sel.target)];
                chosen_truth = truth_idx;
                std::vector<wrench::WrenchObservation> frames;
                bool frames_ok = true;
                for (std::size_t f = 0; f < config.frames; ++f) {
                    const auto frame = sim::render_panel_image(
                        side_scene, camera,
                        derive_seed(seed, "frame-" + std::to_string(tick) + "-" + std::to_string(f)));
                    const auto cloud = sim::synthesize_handle_cloud(
                        side_scene, camera, config.cloud_noise_sigma,
                        config.cloud_outlier_fraction,
                        derive_seed(seed, "cloud-" + std::to_string(tick) + "-" + std::to_string(f)),
                        truth_idx, config.cloud_points);
                    try {
                        frames.push_back(wrench::observe_wrench(
                            frame, detections[static_cast<std::size_t>(sel.target)].bbox, cloud,
                            camera, {}, derive_seed(seed, "seg-" + std::to_string(f))));
                    } catch (const Error&) {
                        frames_ok = false;
                        break;
                    }
                }
                if (!frames_ok || frames.size() != config.frames) {
                    emit(MissionEvent::Emergency, "wrench observation failed");
                    break;
                }
                wrench_estimate = wrench::accumulate_median(frames, config.frames);

                report.correct_recognition =
                    truth_idx == scene.target_index || truth_idx == scene.backup_index;
                if (truth_idx >= 0) {
                    const auto& wt = truth.wrenches[static_cast<std::size_t>(truth_idx)];
                    report.grasp_error_mm =
                        (wrench_estimate->grasp_point - wt.grasp_point_cam).norm() * 1000.0;
                    report.orientation_error_deg = circ_dist_deg(
                        wrench_estimate->orientation_deg, wt.orientation_deg, 360.0);
                } else {
                    report.grasp_error_mm = 1000.0;
                }
                emit(MissionEvent::TargetRecognized,
                     detail::fmt("width=%.1fmm grasp_err=%.2fmm",
                                 jaw_widths[static_cast<std::size_t>(sel.target)],
                                 report.grasp_error_mm));
                break;
            }
            case MissionState::GraspWrench: {
                const bool slipped = slip_rng.bernoulli(config.slip_probability);
                const double err = report.grasp_error_mm;
                if (slipped || err > config.weak_grasp_mm) {
                    report.outcome = GraspOutcome::Loss;
                    if (chosen_detection >= 0) lost_detections.insert(chosen_detection);
                    emit(MissionEvent::WrenchLost, slipped ? "slip" : "grasp error too large");
                } else if (err <= config.correct_grasp_mm) {
                    report.outcome = GraspOutcome::CorrectGrasp;
                    emit(MissionEvent::GraspOk, detail::fmt("err=%.2fmm", err));
                } else {
                    report.outcome = GraspOutcome::WeakGrasp;
                    emit(MissionEvent::GraspWeak, detail::fmt("err=%.2fmm", err));
                }
                break;
            }
            case MissionState::AlignValve: {
                const sim::PanelSceneSpec side_scene = scene_for_side(docked_side);
                // The arm centers the cameras on the valve: its position on
                // the panel is rule-known and fixed relative to the wrenches.
                // A small residual of the docking offset remains.
                const auto rig = sim::make_rig(side_scene,
                                               scene.valve.x_m + 0.05 * report.docking.o,
                                               scene.valve.y_m);
                const auto truth_l = sim::compute_truth(side_scene, rig.left);
                const auto truth_r = sim::compute_truth(side_scene, rig.right);

                bool aligned = false;
                std::string why;
                for (int attempt = 0; attempt < 2 && !aligned; ++attempt) {
                    try {
                        auto analyze = [&](const geom::PinholeCamera& cam,
                                           const sim::ValveTruth& vt, const std::string& att) {
                            const auto image = sim::render_panel_image(
                                side_scene, cam, derive_seed(seed, "valve-" + att));
                            img::Rect roi{
                                static_cast<int>(vt.center_u - vt.edge_px * 1.6),
                                static_cast<int>(vt.center_v - vt.edge_px * 1.6),
                                static_cast<int>(vt.edge_px * 3.2),
                                static_cast<int>(vt.edge_px * 3.2)};
                            img::clip_rect(roi, image.width, image.height);
                            const auto roi_img = img::crop(image, roi);
                            const auto segs = valve::extract_segments(
                                roi_img, config.canny, config.hough,
                                derive_seed(seed, "hough-" + att));
                            valve::SquareParams sq;
                            sq.expected_edge_px = vt.edge_px;
                            const auto hyp = valve::find_square(segs, sq);
                            const auto [center, angle] = valve::valve_center_orientation(hyp);
                            return std::tuple<double, double, double>{center.first + roi.x,
                                                                      center.second + roi.y, angle};
                        };
                        const std::string tag = std::to_string(attempt);
                        const auto [ul, vl, angle_l] = analyze(rig.left, truth_l.valve, "L" + tag);
                        const auto [ur, vr, angle_r] = analyze(rig.right, truth_r.valve, "R" + tag);
                        valve_center = valve::triangulate_valve(ul, vl, ur, vr, rig);
                        report.valve_angle_error_deg =
                            circ_dist_deg(angle_l, scene.valve.stem_angle_deg, 90.0);
                        aligned = true;
                    } catch (const Error& e) {
                        why = e.what();
                    }
                }
                if (aligned)
                    emit(MissionEvent::ValveAligned,
                         detail::fmt("angle_err=%.2fdeg", report.valve_angle_error_deg));
                else
                    emit(MissionEvent::Emergency, "valve alignment failed: " + why);
                break;
            }
            case MissionState::OperateValve: {
                // A wrong-size wrench does not seat on the stem; the fault
                // surfaces here and triggers the recovery path.
                const double commanded_w =
                    scene.wrenches[static_cast<std::size_t>(scene.target_index)].head_width_mm;
                const bool fits =
                    chosen_truth >= 0 &&
                    std::fabs(scene.wrenches[static_cast<std::size_t>(chosen_truth)]
                                  .head_width_mm -
                              commanded_w) < 0.5;
                if (!fits) {
                    report.outcome = GraspOutcome::Loss;
                    if (chosen_detection >= 0) lost_detections.insert(chosen_detection);
                    emit(MissionEvent::WrenchLost, "wrench does not fit the valve");
                    break;
                }
                const Vec3 grip = wrench_estimate->grip_center_3d;
                const Vec3 grasp = wrench_estimate->grasp_point;
                const double r = (grasp - grip).norm();
                const double start =
                    rad2deg(std::atan2(grasp.y - valve_center->y, grasp.x - valve_center->x));
                const auto sweep = valve_rotation_waypoints(
                    *valve_center, std::max(r, 0.01), config.rotation_waypoints,
                    config.rotation_clockwise, start);
                emit(MissionEvent::RotationComplete,
                     detail::fmt("r=%.3f waypoints=%.0f", std::max(r, 0.01),
                                 static_cast<double>(sweep.size())));
                break;
            }
            default:
                emit(MissionEvent::Emergency, "unexpected state in mission loop");
                break;
        }
    }

    if (state != MissionState::Done && state != MissionState::EmergencyStop)
        emit(MissionEvent::Emergency, "tick budget exhausted");
    report.final_state = state;
    return report;
}

// ---------------------------------------------------------------------------
// Report text
// ---------------------------------------------------------------------------

inline std::string mission_report_text(const MissionReport& r) {
    std::ostringstream out;
    out << "tick  state                 event                 next                  payload\n";
    char buf[256];
    for (const TraceRow& row : r.trace) {
        std::snprintf(buf, sizeof(buf), "%-5d %-21s %-21s %-21s %s\n", row.tick,
                      to_string(row.state), to_string(row.event), to_string(row.next),
                      row.payload.c_str());
        out << buf;
    }
    out << "\nsummary\n";
    out << "  final_state         " << to_string(r.final_state) << "\n";
    out << "  correct_recognition " << (r.correct_recognition ? "yes" : "no") << "\n";
    out << "  outcome             " << to_string(r.outcome) << "\n";
    std::snprintf(buf, sizeof(buf), "  docking_d_m         %.4f\n", r.docking.d);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  docking_o_m         %.4f\n", r.docking.o);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  docking_alpha_deg   %.3f\n", r.docking.alpha);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  grasp_error_mm      %.3f\n", r.grasp_error_mm);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  valve_err_deg       %.3f\n", r.valve_angle_error_deg);
    out << buf;
    out << "  change_side         " << r.change_side_count << "\n";
    out << "  recoveries          " << r.recovery_count << "\n";
    for (const std::string& w : r.warnings) out << "  warning: " << w << "\n";
    return out.str();
}

}  // namespace panelbot::mission
