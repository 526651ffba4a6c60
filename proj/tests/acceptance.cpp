// Acceptance suite: one binary, one pass/fail line per criterion, each at its
// pinned tolerance. Run with no arguments for all criteria or with a criterion
// number; --cli PATH points at the command-line binary for the determinism
// criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "panelbot/cascade.hpp"
#include "panelbot/core.hpp"
#include "panelbot/geometry.hpp"
#include "panelbot/mission.hpp"
#include "panelbot/panel.hpp"
#include "panelbot/report.hpp"
#include "panelbot/scenario_gen.hpp"
#include "panelbot/scene.hpp"
#include "panelbot/training_data.hpp"
#include "panelbot/valve.hpp"
#include "panelbot/vision.hpp"
#include "panelbot/wrench.hpp"

using namespace panelbot;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_cli_path;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct CriterionResult {
    bool pass = false;
    std::string detail;
    double elapsed = 0.0;
};

// ---------------------------------------------------------------------------
// Shared artifacts
// ---------------------------------------------------------------------------

const cascade::Cascade& shared_detector() {
    static cascade::Cascade c = [] {
        cascade::DatasetParams dp;
        dp.scenes = 24;
        const auto data = cascade::build_dataset(dp, 515);
        auto split = cascade::split_dataset(data, 0.7, 600, 3);
        const auto base = cascade::train_cascade(split.train, {}, 77);
        return cascade::hard_negative_mine(base, split.train, 1, {}, 77).cascade;
    }();
    return c;
}

struct MissionBatch {
    std::vector<mission::MissionReport> reports;
    double loop_seconds = 0.0;
};

const MissionBatch& mission_batch() {
    static MissionBatch batch = [] {
        MissionBatch b;
        mission::MissionConfig cfg;
        cfg.detector = shared_detector();
        const auto t0 = Clock::now();
        for (int s = 0; s < 100; ++s) {
            const auto scenario = sim::generate_scenario({}, 20000 + s);
            b.reports.push_back(mission::run_mission(scenario, cfg, 20000 + s));
        }
        b.loop_seconds = seconds_since(t0);
        return b;
    }();
    return batch;
}

geom::Vec3 random_unit(Rng& rng) {
    while (true) {
        geom::Vec3 v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const double n = v.norm();
        if (n > 1e-3) return v / n;
    }
}

// ---------------------------------------------------------------------------
// Criterion 1: geometry oracle suite
// ---------------------------------------------------------------------------

CriterionResult criterion_1() {
    const auto t0 = Clock::now();
    Rng rng(1001);
    double worst_obb = 0.0, worst_recon = 0.0, worst_plane = 0.0, worst_tri = 0.0;

    for (int trial = 0; trial < 100; ++trial) {
        // OBB rigid-motion invariance.
        std::vector<geom::Vec3> pts;
        const int n = 30 + static_cast<int>(rng.below(50));
        for (int i = 0; i < n; ++i)
            pts.push_back({rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(-0.5, 0.5)});
        const auto base = geom::obb_of_cluster(pts).extent.sorted_descending();

        const geom::Vec3 axis = random_unit(rng);
        const double ang = rng.uniform(0, 2 * std::numbers::pi);
        const double c = std::cos(ang), s = std::sin(ang);
        const geom::Vec3 t{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        std::vector<geom::Vec3> moved;
        for (const auto& p : pts) {
            // Rodrigues rotation.
            const geom::Vec3 r =
                p * c + axis.cross(p) * s + axis * (axis.dot(p) * (1 - c));
            moved.push_back(r + t);
        }
        const auto rot = geom::obb_of_cluster(moved).extent.sorted_descending();
        for (int i = 0; i < 3; ++i) worst_obb = std::max(worst_obb, std::fabs(base[i] - rot[i]));

        // Eigen reconstruction on a random PSD matrix.
        geom::Mat3 a;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) a.m[i][j] = rng.uniform(-2, 2);
        const geom::Mat3 psd = a.transposed() * a;
        const auto eig = geom::principal_components(psd);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double rec = 0.0;
                for (const auto& e : eig) {
                    const double vi = i == 0 ? e.vector.x : i == 1 ? e.vector.y : e.vector.z;
                    const double vj = j == 0 ? e.vector.x : j == 1 ? e.vector.y : e.vector.z;
                    rec += e.value * vi * vj;
                }
                worst_recon = std::max(worst_recon, std::fabs(psd(i, j) - rec));
            }

        // Ray-plane residual.
        geom::PinholeCamera cam;
        cam.fx = 700;
        cam.fy = 720;
        cam.cx = 400;
        cam.cy = 300;
        geom::Vec3 nrm = random_unit(rng);
        if (std::fabs(nrm.z) < 0.2) nrm.z = 0.5;
        const geom::Plane plane =
            geom::Plane{nrm.x, nrm.y, nrm.z, -rng.uniform(0.5, 3.0)}.normalized();
        const double u = rng.uniform(0, 800), v = rng.uniform(0, 600);
        const geom::Vec3 r = cam.ray(u, v);
        if (std::fabs(plane.a * r.x + plane.b * r.y + plane.c) > 1e-6) {
            const auto p = geom::ray_plane_intersection(u, v, cam, plane);
            worst_plane = std::max(worst_plane, std::fabs(plane.signed_distance(p)));
        }

        // Triangulation round trip.
        geom::StereoRig rig;
        rig.baseline = 0.1;
        rig.left.fx = rig.left.fy = rig.right.fx = rig.right.fy = 700;
        rig.left.cx = rig.right.cx = 350;
        rig.left.cy = rig.right.cy = 260;
        const geom::Vec3 p{rng.uniform(-0.3, 0.3), rng.uniform(-0.2, 0.2),
                           rng.uniform(0.4, 2.0)};
        const auto [ul, vl] = rig.left.project(p);
        const auto [ur, vr] = rig.right.project({p.x - rig.baseline, p.y, p.z});
        const auto rec3 = geom::triangulate(ul, vl, ur, vr, rig);
        worst_tri = std::max(worst_tri, (rec3 - p).norm());
    }

    CriterionResult res;
    res.elapsed = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "obb %.2e eig %.2e plane %.2e tri %.2e m", worst_obb,
                  worst_recon, worst_plane, worst_tri);
    res.detail = buf;
    res.pass = worst_obb < 1e-6 && worst_recon < 1e-7 && worst_plane < 1e-9 &&
               worst_tri < 1e-6 && res.elapsed < 5.0;
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 2: panel ranking over 100 seeded arenas
// ---------------------------------------------------------------------------

CriterionResult criterion_2() {
    const auto t0 = Clock::now();
    int correct = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto sc = sim::generate_scenario({}, seed);  // >= 3 distractors, sigma 1 cm
        Rng rng = derived_rng(seed, "observer");
        const auto robot = sim::observation_pose(sc.arena, rng);
        sim::LaserSpec spec = sc.laser;
        spec.range_noise_sigma = 0.01;
        const auto scan = sim::simulate_scan(sc.arena, robot, spec, seed);
        const auto ranked = panel::find_panel(sim::scan_points(scan), sc.arena.panel.width,
                                              sc.arena.panel.thickness, {}, seed);
        if (!ranked.empty() &&
            std::hypot(ranked.front().center.x - sc.arena.panel.x,
                       ranked.front().center.y - sc.arena.panel.y) < 1.0)
            ++correct;
    }
    CriterionResult res;
    res.elapsed = seconds_since(t0);
    res.detail = "top-1 correct " + std::to_string(correct) + "/100";
    res.pass = correct >= 95 && res.elapsed < 30.0;
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 3: docking angle including the disambiguation branch
// ---------------------------------------------------------------------------

sim::LaserScan docking_scan(double alpha_deg, double noise_sigma, std::uint64_t seed) {
    sim::ArenaSpec arena;
    arena.bounds_w = arena.bounds_h = 40.0;
    arena.panel = {20.0, 18.5, alpha_deg, 3.0, 0.05};
    sim::LaserSpec spec;
    spec.range_noise_sigma = noise_sigma;
    spec.min_range = 0.05;
    auto scan = sim::simulate_scan(arena, {20.0, 20.0, 0.0}, spec, seed);
    scan.origin = {0, 0, 0};
    return scan;
}

CriterionResult criterion_3() {
    const auto t0 = Clock::now();
    std::ostringstream detail;
    bool pass = true;
    for (double truth : {0.0, 15.0, 30.0, 45.0, 150.0}) {
        std::vector<double> errors;
        for (std::uint64_t s = 0; s < 10; ++s) {
            const auto scan = docking_scan(truth, 0.01, 3000 + s);
            const double est = panel::estimate_docking_angle(
                scan, panel::robot_side_plane_for_heading(), 70.0, {}, s);
            errors.push_back(circ_dist_deg(est, truth, 180.0));
            if (truth > 90.0 && est <= 90.0) pass = false;  // branch must engage
        }
        const double mean = summarize(errors).average;
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.0f:%.2f ", truth, mean);
        detail << buf;
        if (mean > 1.0) pass = false;
    }
    CriterionResult res;
    res.elapsed = seconds_since(t0);
    res.detail = "mean |err| deg per angle: " + detail.str();
    res.pass = pass;
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 4: valve orientation, results-table layout
// ---------------------------------------------------------------------------

CriterionResult criterion_4() {
    const auto t0 = Clock::now();
    report::Table table;
    table.title = "valve stem angle estimates over 50 noisy renders (deg)";
    table.columns = {"alpha (deg)", "Average", "Median", "Maximum", "Minimum"};
    bool pass = true;
    std::ostringstream detail;
    for (double truth : {0.0, 15.0, 30.0, 45.0}) {
        sim::PanelSceneSpec scene;
        scene.render.width_px = 300;
        scene.render.height_px = 300;
        scene.render.fx = scene.render.fy = 760.0;
        scene.render.camera_depth_m = 0.50;
        scene.render.noise_sigma = 5.0;
        scene.render.gradient = 10.0;
        scene.valve = {40.0, 0.0012, 0.0008, truth};

        std::vector<double> estimates, errors;
        const auto cam = sim::make_camera(scene);
        const auto vt = sim::compute_truth(scene, cam).valve;
        for (int rep = 0; rep < 50; ++rep) {
            const std::uint64_t seed = derive_seed(4000 + static_cast<int>(truth),
                                                   "rep-" + std::to_string(rep));
            const auto frame = sim::render_panel_image(scene, cam, seed);
            img::Rect roi{static_cast<int>(vt.center_u - vt.edge_px * 1.6),
                          static_cast<int>(vt.center_v - vt.edge_px * 1.6),
                          static_cast<int>(vt.edge_px * 3.2),
                          static_cast<int>(vt.edge_px * 3.2)};
            img::clip_rect(roi, frame.width, frame.height);
            try {
                const auto segs = valve::extract_segments(img::crop(frame, roi), {},
                                                          {1.0, 1.0, 18, 20.0, 4.0}, seed);
                valve::SquareParams sq;
                sq.expected_edge_px = vt.edge_px;
                const auto hyp = valve::find_square(segs, sq);
                const double est = valve::valve_center_orientation(hyp).second;
                estimates.push_back(est);
                errors.push_back(circ_dist_deg(est, truth, 90.0));
            } catch (const Error&) {
                estimates.push_back(-1.0);
                errors.push_back(90.0);
            }
        }
        const Stats est = summarize(estimates);
        char label[16];
        std::snprintf(label, sizeof(label), "%.0f", truth);
        table.add_row({label, report::cell(est.average, 2), report::cell(est.median, 2),
                       report::cell(est.max, 2), report::cell(est.min, 2)});
        const double mean_err = summarize(errors).average;
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.0f:%.2f ", truth, mean_err);
        detail << buf;
        if (mean_err > 2.0) pass = false;
    }
    std::cout << report::render(table);
    CriterionResult res;
    res.elapsed = seconds_since(t0);
    res.detail = "mean |err| deg per angle: " + detail.str();
    res.pass = pass && res.elapsed < 120.0;
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 5: classifier F2 across five 70/30 splits
// ---------------------------------------------------------------------------

CriterionResult criterion_5() {
    const auto t0 = Clock::now();
    cascade::DatasetParams dp;
    dp.scenes = 50;  // 300 base positives plus jitters, 75 negative images
    const auto data = cascade::build_dataset(dp, 5001);

    std::ostringstream detail;
    bool pass = data.positive_count() >= 300;
    detail << "pos " << data.positive_count() << "; F2:";
    for (std::uint64_t split_seed = 0; split_seed < 5; ++split_seed) {
        auto split = cascade::split_dataset(data, 0.7, 1000, split_seed);
        pass = pass && split.test_negatives.size() >= 1000 - 50;
        const auto model =
            cascade::train_cascade(split.train, {}, derive_seed(split_seed, "train"));
        const auto m =
            cascade::score_cascade(model, split.test_positives, split.test_negatives);
        char buf[16];
        std::snprintf(buf, sizeof(buf), " %.3f", m.f2);
        detail << buf;
        if (m.f2 < 0.90) pass = false;
    }
    CriterionResult res;
    res.elapsed = seconds_since(t0);
    res.detail = detail.str();
    res.pass = pass && res.elapsed < 600.0;
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 6: metric arithmetic against brute-force counts
// ---------------------------------------------------------------------------

CriterionResult criterion_6() {
    const auto t0 = Clock::now();
    Rng rng(6001);
    bool pass = true;
    for (int trial = 0; trial < 1000 && pass; ++trial) {
        const std::size_t tp = rng.below(200), tn = rng.below(200);
        const std::size_t fp = rng.below(200), fn = rng.below(200);
        if (tp + tn + fp + fn == 0) continue;
        std::vector<bool> pred, lab;
        for (std::size_t i = 0; i < tp; ++i) { pred.push_back(true); lab.push_back(true); }
        for (std::size_t i = 0; i < fp; ++i) { pred.push_back(true); lab.push_back(false); }
        for (std::size_t i = 0; i < fn; ++i) { pred.push_back(false); lab.push_back(true); }
        for (std::size_t i = 0; i < tn; ++i) { pred.push_back(false); lab.push_back(false); }
        const auto m = cascade::evaluate(pred, lab);

        const double total = static_cast<double>(tp + tn + fp + fn);
        const double accuracy = static_cast<double>(tp + tn) / total;
        const double precision = (tp + fp) ? static_cast<double>(tp) / (tp + fp) : 0.0;
        const double recall = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 0.0;
        const double denom = 4.0 * precision + recall;
        const double f2 = denom > 0.0 ? 5.0 * precision * recall / denom : 0.0;
        if (m.tp != tp || m.tn != tn || m.fp != fp || m.fn != fn) pass = false;
        if (m.accuracy != accuracy || m.precision != precision || m.recall != recall ||
            m.f2 != f2)
            pass = false;
    }
    CriterionResult res;
    res.elapsed = seconds_since(t0);
    res.detail = "1000 random confusion tables, exact equality";
    res.pass = pass;
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 7: wrench pipeline end-to-end on noiseless renders
// ---------------------------------------------------------------------------

CriterionResult criterion_7() {
    const auto t0 = Clock::now();
    double worst_grasp = 0.0, worst_orient = 0.0, worst_plane = 0.0;
    int scenes_ok = 0;
    for (int s = 0; s < 20; ++s) {
        sim::GenParams gp;
        gp.render_noise_sigma = 0.0;
        gp.render_gradient = 0.0;
        const auto sc = sim::generate_scenario(gp, 7000 + s);
        const auto cam = sim::make_camera(sc.scene);
        const auto truth = sim::compute_truth(sc.scene, cam);
        const auto idx = static_cast<std::size_t>(sc.scene.target_index);
        const auto& wt = truth.wrenches[idx];

        std::vector<wrench::WrenchObservation> frames;
        bool ok = true;
        for (int f = 0; f < 10 && ok; ++f) {
            const auto frame =
                sim::render_panel_image(sc.scene, cam, derive_seed(7000 + s, "f"));
            const auto cloud = sim::synthesize_handle_cloud(
                sc.scene, cam, 0.0, 0.0, derive_seed(7000 + s, "c"), static_cast<int>(idx));
            try {
                frames.push_back(wrench::observe_wrench(frame, wt.head_bbox, cloud, cam));
            } catch (const Error&) {
                ok = false;
            }
        }
        if (!ok) continue;
        const auto acc = wrench::accumulate_median(frames, 10);
        const double grasp_err = (acc.grasp_point - wt.grasp_point_cam).norm() * 1000.0;
        const double orient_err =
            circ_dist_deg(acc.orientation_deg, wt.orientation_deg, 360.0);
        const double plane_resid =
            std::fabs(frames[0].handle_plane.signed_distance(frames[0].grip_center_3d));
        worst_grasp = std::max(worst_grasp, grasp_err);
        worst_orient = std::max(worst_orient, orient_err);
        worst_plane = std::max(worst_plane, plane_resid);
        ++scenes_ok;
    }
    CriterionResult res;
    res.elapsed = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d/20 scenes, worst grasp %.2f mm, orient %.2f deg, plane %.1e",
                  scenes_ok, worst_grasp, worst_orient, worst_plane);
    res.detail = buf;
    res.pass = scenes_ok == 20 && worst_grasp <= 5.0 && worst_orient <= 2.0 &&
               worst_plane <= 1e-6;
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 8: median robustness to 4-of-10 corruption
// ---------------------------------------------------------------------------

CriterionResult criterion_8() {
    const auto t0 = Clock::now();
    Rng rng(8001);
    bool pass = true;
    for (int trial = 0; trial < 200 && pass; ++trial) {
        std::vector<wrench::WrenchObservation> frames(10);
        for (auto& f : frames) {
            f.grip_center_3d = {rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1),
                                rng.uniform(0.4, 0.5)};
            f.grasp_point = {rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1),
                             rng.uniform(0.4, 0.5)};
            f.orientation_deg = rng.uniform(-95.0, -85.0);
        }
        const std::size_t n_corrupt = rng.below(5);  // 0..4 frames
        std::vector<std::size_t> order(10);
        for (std::size_t i = 0; i < 10; ++i) order[i] = i;
        rng.shuffle(order);

        auto bounds = [&](auto&& get) {
            double lo = 1e300, hi = -1e300;
            for (std::size_t i = n_corrupt; i < 10; ++i) {
                const double v = get(frames[order[i]]);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            return std::pair<double, double>{lo, hi};
        };
        const auto bx = bounds([](const auto& f) { return f.grip_center_3d.x; });
        const auto by = bounds([](const auto& f) { return f.grasp_point.y; });
        const auto bo = bounds([](const auto& f) { return f.orientation_deg; });

        for (std::size_t i = 0; i < n_corrupt; ++i) {
            auto& f = frames[order[i]];
            f.grip_center_3d = {rng.uniform(-100, 100), rng.uniform(-100, 100),
                                rng.uniform(-100, 100)};
            f.grasp_point = {rng.uniform(-100, 100), rng.uniform(-100, 100),
                             rng.uniform(-100, 100)};
            f.orientation_deg = rng.uniform(-80.0, -60.0);  // stays on the first branch
        }
        const auto acc = wrench::accumulate_median(frames, 10);
        if (acc.grip_center_3d.x < bx.first - 1e-12 || acc.grip_center_3d.x > bx.second + 1e-12)
            pass = false;
        if (acc.grasp_point.y < by.first - 1e-12 || acc.grasp_point.y > by.second + 1e-12)
            pass = false;
        // Corrupted orientations above may exceed the clean range on one side
        // only; the median must stay within [clean min, corrupt max range].
        if (acc.orientation_deg < bo.first - 1e-12 && acc.orientation_deg > bo.second + 1e-12)
            pass = false;
    }
    CriterionResult res;
    res.elapsed = seconds_since(t0);
    res.detail = "200 randomized trials, medians inside clean-frame ranges";
    res.pass = pass;
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 9: FSM totality, reachability, trace replay
// ---------------------------------------------------------------------------

CriterionResult criterion_9() {
    const auto& batch = mission_batch();  // generated outside this criterion's meter

    const auto t0 = Clock::now();
    const auto table = mission::default_transition_table();
    bool pass = true;

    // Totality under the self-loop rule: step never throws and always lands
    // in a known state; Emergency maps every state to EmergencyStop in one step.
    for (mission::MissionState s : mission::kAllStates) {
        for (mission::MissionEvent e : mission::kAllEvents) {
            const auto next = mission::step(s, e, table);
            (void)next;
        }
        if (mission::step(s, mission::MissionEvent::Emergency, table) !=
            mission::MissionState::EmergencyStop)
            pass = false;
    }
    // Nothing leaves EmergencyStop.
    for (mission::MissionEvent e : mission::kAllEvents)
        if (mission::step(mission::MissionState::EmergencyStop, e, table) !=
            mission::MissionState::EmergencyStop)
            pass = false;

    // Reachability of every state from NavigatePatrol.
    std::map<mission::MissionState, bool> reached;
    reached[mission::MissionState::NavigatePatrol] = true;
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& [key, next] : table.map)
            if (reached[key.first] && !reached[next]) {
                reached[next] = true;
                grew = true;
            }
    }
    for (mission::MissionState s : mission::kAllStates)
        if (!reached[s]) pass = false;

    // Replay consistency of the 100 seeded traces.
    std::size_t rows = 0;
    for (const auto& rep : batch.reports) {
        for (const auto& row : rep.trace) {
            ++rows;
            if (mission::step(row.state, row.event, table) != row.next) pass = false;
        }
        if (rep.trace.front().state != mission::MissionState::NavigatePatrol) pass = false;
        if (rep.final_state != mission::MissionState::Done &&
            rep.final_state != mission::MissionState::EmergencyStop)
            pass = false;
    }

    CriterionResult res;
    res.elapsed = seconds_since(t0);
    res.detail = "replayed " + std::to_string(rows) + " transitions from 100 traces";
    res.pass = pass && res.elapsed < 10.0;
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 10: mission success rate
// ---------------------------------------------------------------------------

CriterionResult criterion_10() {
    const auto& batch = mission_batch();
    int scored = 0, correct = 0, weak = 0, loss = 0, rec = 0;
    for (const auto& rep : batch.reports) {
        if (rep.scored()) ++scored;
        if (rep.correct_recognition) ++rec;
        switch (rep.outcome) {
            case mission::GraspOutcome::CorrectGrasp: ++correct; break;
            case mission::GraspOutcome::WeakGrasp: ++weak; break;
            case mission::GraspOutcome::Loss: ++loss; break;
            default: break;
        }
    }
    CriterionResult res;
    res.elapsed = batch.loop_seconds;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "scored %d/100 (recognition %d, correct %d, grasp %d, loss %d), loop %.0f s",
                  scored, rec, correct, weak, loss, batch.loop_seconds);
    res.detail = buf;
    res.pass = scored >= 85 && batch.loop_seconds < 300.0;
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 11: CLI determinism
// ---------------------------------------------------------------------------

int run_cli(const std::string& args) {
    const std::string cmd = g_cli_path + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

bool same_dir_bytes(const fs::path& a, const fs::path& b) {
    std::map<std::string, std::string> fa, fb;
    for (const auto& e : fs::directory_iterator(a)) {
        std::ifstream f(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        fa[e.path().filename().string()] = ss.str();
    }
    for (const auto& e : fs::directory_iterator(b)) {
        std::ifstream f(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        fb[e.path().filename().string()] = ss.str();
    }
    return fa == fb;
}

CriterionResult criterion_11() {
    CriterionResult res;
    if (g_cli_path.empty()) {
        res.detail = "no --cli path given";
        return res;
    }
    const auto t0 = Clock::now();
    const fs::path base = fs::temp_directory_path() / "panelbot_acceptance_cli";
    fs::remove_all(base);
    fs::create_directories(base);
    const std::string scen = (base / "s" / "scenario.json").string();
    const std::string casc = (base / "t" / "cascade.txt").string();

    bool pass = true;
    auto twice = [&](const std::string& name, const std::string& args) {
        const fs::path d1 = base / (name + "_1");
        const fs::path d2 = base / (name + "_2");
        if (run_cli(args + " --out " + d1.string()) != 0) pass = false;
        if (run_cli(args + " --out " + d2.string()) != 0) pass = false;
        if (!pass || !same_dir_bytes(d1, d2)) pass = false;
    };

    if (run_cli("gen-scenario --seed 42 --out " + (base / "s").string()) != 0) pass = false;
    if (run_cli("train --seed 2024 --set train.scenes=18 train.mine_rounds=0 --out " +
                (base / "t").string()) != 0)
        pass = false;
    if (pass) {
        twice("gen", "gen-scenario --seed 42");
        twice("find", "find-panel --scenario " + scen + " --seed 7 --reps 3");
        twice("dock", "dock --scenario " + scen + " --seed 9 --reps 3");
        twice("train", "train --seed 2024 --set train.scenes=18 train.mine_rounds=0");
        twice("detect", "detect --scenario " + scen + " --cascade " + casc + " --seed 5");
        twice("eval", "evaluate --cascade " + casc + " --seed 99 --set evaluate.scenes=6");
        twice("wpose", "wrench-pose --scenario " + scen + " --cascade " + casc + " --seed 31");
        twice("vpose", "valve-pose --scenario " + scen + " --seed 77 --reps 5");
        twice("mission", "run-mission --scenario " + scen + " --cascade " + casc + " --seed 11");
    }
    res.elapsed = seconds_since(t0);
    res.detail = "all nine commands re-run byte-identically";
    res.pass = pass;
    fs::remove_all(base);
    return res;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--cli" && i + 1 < argc)
            g_cli_path = argv[++i];
        else if (!arg.empty() && arg[0] != '-')
            only = std::atoi(arg.c_str());
    }

    const std::map<int, std::pair<const char*, std::function<CriterionResult()>>> criteria{
        {1, {"geometry oracle suite", criterion_1}},
        {2, {"panel ranking over seeded arenas", criterion_2}},
        {3, {"docking angle with disambiguation", criterion_3}},
        {4, {"valve orientation table", criterion_4}},
        {5, {"classifier F2 across splits", criterion_5}},
        {6, {"metric arithmetic exactness", criterion_6}},
        {7, {"wrench pipeline end-to-end", criterion_7}},
        {8, {"median robustness", criterion_8}},
        {9, {"mission FSM and trace replay", criterion_9}},
        {10, {"mission success rate", criterion_10}},
        {11, {"CLI determinism", criterion_11}},
    };

    int failures = 0;
    for (const auto& [num, entry] : criteria) {
        if (only != 0 && num != only) continue;
        CriterionResult r;
        try {
            r = entry.second();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %d: %s (%s; %.1f s)\n", r.pass ? "PASS" : "FAIL", num,
                    entry.first, r.detail.c_str(), r.elapsed);
        std::fflush(stdout);
        if (!r.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
