// Command-line front end: scenario generation, each pipeline stage standalone,
// detector training/evaluation, and full mission runs. Every stochastic
// command takes a mandatory seed; report bodies are deterministic and each
// run writes a manifest sufficient to reproduce it bit-identically.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "panelbot/cascade.hpp"
#include "panelbot/core.hpp"
#include "panelbot/mission.hpp"
#include "panelbot/panel.hpp"
#include "panelbot/report.hpp"
#include "panelbot/scenario_gen.hpp"
#include "panelbot/scene.hpp"
#include "panelbot/training_data.hpp"
#include "panelbot/valve.hpp"
#include "panelbot/wrench.hpp"

namespace fs = std::filesystem;
using namespace panelbot;

namespace {

struct RunConfig {
    std::string scenario_path;
    std::string cascade_path;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    int reps = 1;
    std::vector<std::string> overrides;  // key=value

    std::map<std::string, std::string> override_map() const {
        std::map<std::string, std::string> m;
        for (const std::string& kv : overrides) {
            const auto eq = kv.find('=');
            require(eq != std::string::npos && eq > 0, "usage-error",
                    "--set expects key=value, got '" + kv + "'");
            m[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
        return m;
    }

    double get(const std::string& key, double fallback) const {
        const auto m = override_map();
        auto it = m.find(key);
        return it == m.end() ? fallback : std::stod(it->second);
    }
    std::string get(const std::string& key, const std::string& fallback) const {
        const auto m = override_map();
        auto it = m.find(key);
        return it == m.end() ? fallback : it->second;
    }
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), "config-error", "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), "config-error", "cannot open " + path + " for writing");
    f << body;
}

// Report bundle: named text outputs plus a manifest with input/output hashes.
class Bundle {
public:
    Bundle(const RunConfig& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {
        fs::create_directories(cfg.out_dir);
    }

    void note_input(const std::string& label, const std::string& path) {
        inputs_.push_back(label + " " + path + " fnv64:" + hash_hex(read_file(path)));
    }

    void add(const std::string& filename, const std::string& body, bool echo = true) {
        const std::string path = (fs::path(cfg_.out_dir) / filename).string();
        write_file(path, body);
        outputs_.push_back(filename + " fnv64:" + hash_hex(body));
        if (echo) std::cout << body;
    }

    void finish(const std::vector<double>& rep_seconds) {
        std::ostringstream m;
        m << "manifest v1\n";
        m << "command " << command_ << "\n";
        m << "seed " << cfg_.seed << "\n";
        m << "reps " << cfg_.reps << "\n";
        for (const auto& [k, v] : cfg_.override_map()) m << "set " << k << "=" << v << "\n";
        for (const std::string& in : inputs_) m << "input " << in << "\n";
        for (const std::string& out : outputs_) m << "output " << out << "\n";
        write_file((fs::path(cfg_.out_dir) / "manifest.txt").string(), m.str());

        if (!rep_seconds.empty()) {
            const Stats t = summarize(rep_seconds);
            report::Table timing;
            timing.title = "timing (s)";
            timing.columns = {"", "Average", "Median", "Maximum", "Minimum", "Std. deviation"};
            timing.add_row({command_ + " time (s)", report::cell(t.average), report::cell(t.median),
                            report::cell(t.max), report::cell(t.min), report::cell(t.stddev)});
            std::cout << "\n" << report::render(timing);
        }
    }

private:
    static std::string hash_hex(const std::string& bytes) {
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(bytes)));
        return buf;
    }

    const RunConfig& cfg_;
    std::string command_;
    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;
};

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

sim::Scenario load_scenario_input(const RunConfig& cfg, Bundle& bundle) {
    require(!cfg.scenario_path.empty(), "usage-error", "--scenario is required");
    bundle.note_input("scenario", cfg.scenario_path);
    return sim::load_scenario(cfg.scenario_path);
}

cascade::Cascade load_cascade_input(const RunConfig& cfg, Bundle& bundle) {
    require(!cfg.cascade_path.empty(), "usage-error", "--cascade is required");
    bundle.note_input("cascade", cfg.cascade_path);
    return cascade::load_cascade(cfg.cascade_path);
}

// Merged 360-degree coverage from the two opposed 270-degree scanners.
std::vector<geom::Vec3> merged_points(const sim::ArenaSpec& arena, const sim::Pose2& pose,
                                      const sim::LaserSpec& laser, std::uint64_t seed) {
    const auto fore = sim::simulate_scan(arena, pose, laser, derive_seed(seed, "fore"));
    sim::Pose2 aft_pose = pose;
    aft_pose.theta_deg += 180.0;
    const auto aft = sim::simulate_scan(arena, aft_pose, laser, derive_seed(seed, "aft"));
    return sim::merge_scans(fore, aft, geom::RigidTransform::identity());
}

sim::GenParams gen_params_from(const RunConfig& cfg) {
    sim::GenParams gp;
    gp.panel_width = cfg.get("panel.width_m", gp.panel_width);
    gp.panel_thickness = cfg.get("panel.thickness_m", gp.panel_thickness);
    gp.distractors = static_cast<int>(cfg.get("arena.distractors", gp.distractors));
    gp.scan_noise_sigma = cfg.get("laser.noise_sigma_m", gp.scan_noise_sigma);
    gp.render_noise_sigma = cfg.get("render.noise_sigma", gp.render_noise_sigma);
    gp.render_gradient = cfg.get("render.gradient", gp.render_gradient);
    gp.valve_stem_angle_deg = cfg.get("valve.stem_angle_deg", gp.valve_stem_angle_deg);
    gp.wrenches_on_front = cfg.get("panel.wrenches_on_front", 1.0) != 0.0;
    gp.target_width_mm = cfg.get("wrench.target_width_mm", gp.target_width_mm);
    return gp;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_gen_scenario(const RunConfig& cfg) {
    Bundle bundle(cfg, "gen-scenario");
    const auto t0 = now_seconds();
    const auto sc = sim::generate_scenario(gen_params_from(cfg), cfg.seed);
    bundle.add("scenario.json", sim::serialize_scenario(sc), false);
    bundle.finish({now_seconds() - t0});
    return 0;
}

int cmd_find_panel(const RunConfig& cfg) {
    Bundle bundle(cfg, "find-panel");
    const auto scenario = load_scenario_input(cfg, bundle);

    report::Table table;
    table.title = "panel candidates";
    table.columns = {"rep", "rank", "cluster", "ext0_m", "ext1_m", "similarity", "x_m",
                     "y_m", "dist_to_truth_m"};
    std::vector<double> times;
    int top_hits = 0;
    for (int rep = 0; rep < cfg.reps; ++rep) {
        const std::uint64_t rep_seed = derive_seed(cfg.seed, "rep-" + std::to_string(rep));
        Rng rng = derived_rng(rep_seed, "observer");
        const auto robot = sim::observation_pose(scenario.arena, rng);
        const auto t0 = now_seconds();
        const auto scan = sim::simulate_scan(scenario.arena, robot, scenario.laser, rep_seed);
        const auto ranked =
            panel::find_panel(sim::scan_points(scan), scenario.arena.panel.width,
                              scenario.arena.panel.thickness, {}, rep_seed);
        times.push_back(now_seconds() - t0);
        for (std::size_t k = 0; k < ranked.size(); ++k) {
            const auto& c = ranked[k];
            const auto e = c.obb.extent.sorted_descending();
            const double dist = std::hypot(c.center.x - scenario.arena.panel.x,
                                           c.center.y - scenario.arena.panel.y);
            table.add_row({report::cell(rep), report::cell(static_cast<int>(k)),
                           report::cell(c.cluster_id), report::cell(e[0]), report::cell(e[1]),
                           report::cell(c.similarity), report::cell(c.center.x, 2),
                           report::cell(c.center.y, 2), report::cell(dist, 2)});
            if (k == 0 && dist < 1.0) ++top_hits;
        }
    }
    std::ostringstream body;
    body << report::render(table);
    body << "top1_correct " << top_hits << "/" << cfg.reps << "\n";
    bundle.add("find_panel.txt", body.str());
    bundle.finish(times);
    return 0;
}

int cmd_dock(const RunConfig& cfg) {
    Bundle bundle(cfg, "dock");
    const auto scenario = load_scenario_input(cfg, bundle);

    report::Table table;
    table.title = "docking";
    table.columns = {"metric", "Desired Value", "Average", "Median", "Max", "Min"};
    std::vector<double> d_vals, o_vals, a_vals, times;
    const double desired_d = cfg.get("dock.distance_m", 0.80);
    for (int rep = 0; rep < cfg.reps; ++rep) {
        const std::uint64_t rep_seed = derive_seed(cfg.seed, "rep-" + std::to_string(rep));
        Rng rng = derived_rng(rep_seed, "observer");
        const auto observe = sim::observation_pose(scenario.arena, rng);
        const auto t0 = now_seconds();

        const auto points = merged_points(scenario.arena, observe, scenario.laser, rep_seed);
        const auto ranked = panel::find_panel(points, scenario.arena.panel.width,
                                              scenario.arena.panel.thickness, {}, rep_seed);
        require(!ranked.empty(), "insufficient-data", "no panel candidate found");
        auto est =
            mission::detail::estimate_panel(ranked.front(), observe, scenario.arena.panel.thickness);

        // Close-range re-estimate from the staging point before docking.
        const geom::Vec3 stage = est.center_line + est.toward_robot * 2.0;
        const sim::Pose2 stage_pose{
            std::clamp(stage.x, 0.3, scenario.arena.bounds_w - 0.3),
            std::clamp(stage.y, 0.3, scenario.arena.bounds_h - 0.3),
            rad2deg(std::atan2(est.direction.y, est.direction.x))};
        const auto near_points = merged_points(scenario.arena, stage_pose, scenario.laser,
                                               derive_seed(rep_seed, "approach"));
        const auto near_ranked =
            panel::find_panel(near_points, scenario.arena.panel.width,
                              scenario.arena.panel.thickness, {}, derive_seed(rep_seed, "near"));
        if (!near_ranked.empty() &&
            (near_ranked.front().center - est.center_line).norm() <= 3.0)
            est = mission::detail::estimate_panel(near_ranked.front(), stage_pose,
                                                  scenario.arena.panel.thickness);

        Rng act = derived_rng(rep_seed, "actuation");
        const auto docked = mission::dock_robot(est, desired_d, act, 0.008, 0.4);
        const auto rp = panel::docking_report(docked, scenario.arena.panel);
        times.push_back(now_seconds() - t0);
        d_vals.push_back(rp.d);
        o_vals.push_back(rp.o);
        a_vals.push_back(std::min(rp.alpha, 180.0 - rp.alpha));
    }
    table.add_row({"d (m)", report::cell(desired_d, 2), report::cell(summarize(d_vals).average, 3),
                   report::cell(summarize(d_vals).median, 3), report::cell(summarize(d_vals).max, 3),
                   report::cell(summarize(d_vals).min, 3)});
    table.add_row({"o (m)", "0.00", report::cell(summarize(o_vals).average, 3),
                   report::cell(summarize(o_vals).median, 3), report::cell(summarize(o_vals).max, 3),
                   report::cell(summarize(o_vals).min, 3)});
    table.add_row({"alpha (deg)", "0.0", report::cell(summarize(a_vals).average, 2),
                   report::cell(summarize(a_vals).median, 2), report::cell(summarize(a_vals).max, 2),
                   report::cell(summarize(a_vals).min, 2)});
    bundle.add("dock.txt", report::render(table));
    bundle.finish(times);
    return 0;
}

int cmd_detect(const RunConfig& cfg) {
    Bundle bundle(cfg, "detect");
    const auto scenario = load_scenario_input(cfg, bundle);
    const auto detector = load_cascade_input(cfg, bundle);

    report::Table table;
    table.title = "detections";
    table.columns = {"rep", "x", "y", "w", "h", "score", "best_iou_vs_truth"};
    std::vector<double> times;
    for (int rep = 0; rep < cfg.reps; ++rep) {
        const std::uint64_t rep_seed = derive_seed(cfg.seed, "rep-" + std::to_string(rep));
        const auto cam = sim::make_camera(scenario.scene);
        const auto truth = sim::compute_truth(scenario.scene, cam);
        const auto frame = sim::render_panel_image(scenario.scene, cam, rep_seed);
        const auto t0 = now_seconds();
        const auto dets = cascade::detect(frame, detector);
        times.push_back(now_seconds() - t0);
        for (const auto& d : dets) {
            double best = 0.0;
            for (const auto& wt : truth.wrenches)
                best = std::max(best, img::iou(d.bbox, wt.head_bbox));
            table.add_row({report::cell(rep), report::cell(d.bbox.x), report::cell(d.bbox.y),
                           report::cell(d.bbox.w), report::cell(d.bbox.h),
                           report::cell(d.score, 2), report::cell(best, 2)});
        }
        if (rep == 0) {
            img::write_pgm(frame, (fs::path(cfg.out_dir) / "detect_frame.pgm").string());
        }
    }
    bundle.add("detect.txt", report::render(table));
    bundle.finish(times);
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    Bundle bundle(cfg, "train");
    cascade::DatasetParams dp;
    dp.scenes = static_cast<int>(cfg.get("train.scenes", 40.0));
    dp.kind = cfg.get("train.type", std::string("wrench")) == std::string("valve")
                  ? cascade::DetectorKind::Valve
                  : cascade::DetectorKind::Wrench;
    const int mine_rounds = static_cast<int>(cfg.get("train.mine_rounds", 1.0));

    const auto t0 = now_seconds();
    const auto data = cascade::build_dataset(dp, cfg.seed);
    auto split = cascade::split_dataset(data, 0.7, 1000, derive_seed(cfg.seed, "split"));
    auto model = cascade::train_cascade(split.train, {}, derive_seed(cfg.seed, "train"));
    if (mine_rounds > 0)
        model = cascade::hard_negative_mine(model, split.train, mine_rounds, {},
                                            derive_seed(cfg.seed, "mine"))
                    .cascade;
    const double train_s = now_seconds() - t0;

    const auto m = cascade::score_cascade(model, split.test_positives, split.test_negatives);
    report::Table table;
    table.title = "classifier test-set performance";
    table.columns = {"Classifier", "Accuracy", "Precision", "Recall", "F2"};
    table.add_row({dp.kind == cascade::DetectorKind::Valve ? "Valve" : "Wrench",
                   report::cell(m.accuracy, 4), report::cell(m.precision, 4),
                   report::cell(m.recall, 4), report::cell(m.f2, 4)});
    std::ostringstream body;
    body << report::render(table);
    body << "dataset positives " << data.positive_count() << " negative_images "
         << data.negative_count() << "\n";
    body << "counts tp " << m.tp << " tn " << m.tn << " fp " << m.fp << " fn " << m.fn << "\n";
    body << "stages " << model.stages.size() << "\n";
    bundle.add("train_report.txt", body.str());
    bundle.add("cascade.txt", cascade::serialize_cascade(model), false);
    bundle.finish({train_s});
    return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
    Bundle bundle(cfg, "evaluate");
    const auto detector = load_cascade_input(cfg, bundle);
    cascade::DatasetParams dp;
    dp.scenes = static_cast<int>(cfg.get("evaluate.scenes", 12.0));
    dp.kind = cfg.get("train.type", std::string("wrench")) == std::string("valve")
                  ? cascade::DetectorKind::Valve
                  : cascade::DetectorKind::Wrench;

    const auto t0 = now_seconds();
    const auto probe = cascade::build_dataset(dp, derive_seed(cfg.seed, "probe"));
    auto split = cascade::split_dataset(probe, 0.0, 1000, derive_seed(cfg.seed, "probe-split"));
    const auto m = cascade::score_cascade(detector, split.test_positives, split.test_negatives);
    const double secs = now_seconds() - t0;

    report::Table table;
    table.title = "classifier probe-set performance";
    table.columns = {"Classifier", "Accuracy", "Precision", "Recall", "F2"};
    table.add_row({dp.kind == cascade::DetectorKind::Valve ? "Valve" : "Wrench",
                   report::cell(m.accuracy, 4), report::cell(m.precision, 4),
                   report::cell(m.recall, 4), report::cell(m.f2, 4)});
    std::ostringstream body;
    body << report::render(table);
    body << "counts tp " << m.tp << " tn " << m.tn << " fp " << m.fp << " fn " << m.fn << "\n";
    bundle.add("evaluate.txt", body.str());
    bundle.finish({secs});
    return 0;
}

int cmd_wrench_pose(const RunConfig& cfg) {
    Bundle bundle(cfg, "wrench-pose");
    const auto scenario = load_scenario_input(cfg, bundle);
    const auto detector = load_cascade_input(cfg, bundle);

    report::Table table;
    table.title = "wrench pose (10-frame medians)";
    table.columns = {"rep", "grip_x_m", "grip_y_m", "grip_z_m", "orient_deg", "grasp_x_m",
                     "grasp_y_m", "grasp_z_m", "width_mm", "grasp_err_mm", "orient_err_deg"};
    std::vector<double> times;
    for (int rep = 0; rep < cfg.reps; ++rep) {
        const std::uint64_t rep_seed = derive_seed(cfg.seed, "rep-" + std::to_string(rep));
        const auto cam = sim::make_camera(scenario.scene);
        const auto truth = sim::compute_truth(scenario.scene, cam);
        const auto t0 = now_seconds();

        const auto frame0 = sim::render_panel_image(scenario.scene, cam,
                                                    derive_seed(rep_seed, "frame-0"));
        const auto dets = cascade::detect(frame0, detector);
        require(!dets.empty(), "target-not-found", "no wrench detections");

        // Measure widths, select the commanded wrench.
        std::vector<double> widths(dets.size(), -1000.0);
        for (std::size_t i = 0; i < dets.size(); ++i) {
            try {
                int truth_idx = -1;
                for (std::size_t t = 0; t < truth.wrenches.size(); ++t)
                    if (img::iou(dets[i].bbox, truth.wrenches[t].head_bbox) >= 0.3)
                        truth_idx = static_cast<int>(t);
                const auto cloud = sim::synthesize_handle_cloud(
                    scenario.scene, cam, 0.002, 0.15,
                    derive_seed(rep_seed, "wcloud-" + std::to_string(i)), truth_idx);
                widths[i] = wrench::observe_wrench(frame0, dets[i].bbox, cloud, cam).jaw_width_mm;
            } catch (const Error&) {
            }
        }
        const double commanded =
            scenario.scene.wrenches[static_cast<std::size_t>(scenario.scene.target_index)]
                .head_width_mm;
        const auto sel = wrench::select_target(widths, commanded, 1.5);

        int truth_idx = -1;
        for (std::size_t t = 0; t < truth.wrenches.size(); ++t)
            if (img::iou(dets[static_cast<std::size_t>(sel.target)].bbox,
                         truth.wrenches[t].head_bbox) >= 0.3)
                truth_idx = static_cast<int>(t);

        std::vector<wrench::WrenchObservation> frames;
        for (int f = 0; f < 10; ++f) {
            const auto frame = sim::render_panel_image(
                scenario.scene, cam, derive_seed(rep_seed, "frame-" + std::to_string(f)));
            const auto cloud = sim::synthesize_handle_cloud(
                scenario.scene, cam, 0.002, 0.15,
                derive_seed(rep_seed, "cloud-" + std::to_string(f)), truth_idx);
            frames.push_back(wrench::observe_wrench(
                frame, dets[static_cast<std::size_t>(sel.target)].bbox, cloud, cam, {},
                derive_seed(rep_seed, "seg-" + std::to_string(f))));
        }
        const auto acc = wrench::accumulate_median(frames, 10);
        times.push_back(now_seconds() - t0);

        double grasp_err = -1.0, orient_err = -1.0;
        if (truth_idx >= 0) {
            const auto& wt = truth.wrenches[static_cast<std::size_t>(truth_idx)];
            grasp_err = (acc.grasp_point - wt.grasp_point_cam).norm() * 1000.0;
            orient_err = circ_dist_deg(acc.orientation_deg, wt.orientation_deg, 360.0);
        }
        table.add_row({report::cell(rep), report::cell(acc.grip_center_3d.x, 4),
                       report::cell(acc.grip_center_3d.y, 4), report::cell(acc.grip_center_3d.z, 4),
                       report::cell(acc.orientation_deg, 2), report::cell(acc.grasp_point.x, 4),
                       report::cell(acc.grasp_point.y, 4), report::cell(acc.grasp_point.z, 4),
                       report::cell(widths[static_cast<std::size_t>(sel.target)], 1),
                       report::cell(grasp_err, 2), report::cell(orient_err, 2)});
    }
    bundle.add("wrench_pose.txt", report::render(table));
    bundle.finish(times);
    return 0;
}

int cmd_valve_pose(const RunConfig& cfg) {
    Bundle bundle(cfg, "valve-pose");
    const auto scenario = load_scenario_input(cfg, bundle);

    std::vector<double> estimates, errors, times;
    for (int rep = 0; rep < cfg.reps; ++rep) {
        const std::uint64_t rep_seed = derive_seed(cfg.seed, "rep-" + std::to_string(rep));
        const auto t0 = now_seconds();
        const auto rig = sim::make_rig(scenario.scene, scenario.scene.valve.x_m,
                                       scenario.scene.valve.y_m);
        auto analyze = [&](const geom::PinholeCamera& cam, std::string_view tag) {
            const auto truth = sim::compute_truth(scenario.scene, cam);
            const auto frame = sim::render_panel_image(
                scenario.scene, cam, derive_seed(rep_seed, std::string("valve-") + tag.data()));
            img::Rect roi{static_cast<int>(truth.valve.center_u - truth.valve.edge_px * 1.6),
                          static_cast<int>(truth.valve.center_v - truth.valve.edge_px * 1.6),
                          static_cast<int>(truth.valve.edge_px * 3.2),
                          static_cast<int>(truth.valve.edge_px * 3.2)};
            img::clip_rect(roi, frame.width, frame.height);
            const auto segs =
                valve::extract_segments(img::crop(frame, roi), {}, {1.0, 1.0, 18, 25.0, 4.0},
                                        derive_seed(rep_seed, std::string("hough-") + tag.data()));
            valve::SquareParams sq;
            sq.expected_edge_px = truth.valve.edge_px;
            const auto hyp = valve::find_square(segs, sq);
            const auto [center, angle] = valve::valve_center_orientation(hyp);
            return std::tuple<double, double, double>{center.first + roi.x,
                                                      center.second + roi.y, angle};
        };
        const auto [ul, vl, angle_l] = analyze(rig.left, "L");
        const auto [ur, vr, angle_r] = analyze(rig.right, "R");
        const auto center3d = valve::triangulate_valve(ul, vl, ur, vr, rig);
        (void)center3d;
        (void)angle_r;
        times.push_back(now_seconds() - t0);
        estimates.push_back(angle_l);
        errors.push_back(circ_dist_deg(angle_l, scenario.scene.valve.stem_angle_deg, 90.0));
    }

    report::Table table;
    table.title = "valve stem angle estimates (deg)";
    table.columns = {"alpha (deg)", "Average", "Median", "Maximum", "Minimum"};
    const Stats est = summarize(estimates);
    char label[32];
    std::snprintf(label, sizeof(label), "%.0f", scenario.scene.valve.stem_angle_deg);
    table.add_row({label, report::cell(est.average, 2), report::cell(est.median, 2),
                   report::cell(est.max, 2), report::cell(est.min, 2)});
    std::ostringstream body;
    body << report::render(table);
    const Stats err = summarize(errors);
    body << "mean_abs_error_deg " << report::cell(err.average, 3) << "\n";
    bundle.add("valve_pose.txt", body.str());
    bundle.finish(times);
    return 0;
}

int cmd_run_mission(const RunConfig& cfg) {
    Bundle bundle(cfg, "run-mission");
    const auto scenario = load_scenario_input(cfg, bundle);
    mission::MissionConfig mc;
    mc.detector = load_cascade_input(cfg, bundle);
    mc.slip_probability = cfg.get("mission.slip_probability", mc.slip_probability);

    report::Table table;
    table.title = "mission outcomes";
    table.columns = {"rep", "final", "recognition", "outcome", "d_m", "o_m", "alpha_deg",
                     "grasp_err_mm", "valve_err_deg"};
    int correct_rec = 0, correct_grasp = 0, weak_grasp = 0, loss = 0;
    std::vector<double> times;
    std::string first_trace;
    for (int rep = 0; rep < cfg.reps; ++rep) {
        const std::uint64_t rep_seed = derive_seed(cfg.seed, "rep-" + std::to_string(rep));
        const auto t0 = now_seconds();
        const auto rp = mission::run_mission(scenario, mc, rep_seed);
        times.push_back(now_seconds() - t0);
        if (rp.correct_recognition) ++correct_rec;
        switch (rp.outcome) {
            case mission::GraspOutcome::CorrectGrasp: ++correct_grasp; break;
            case mission::GraspOutcome::WeakGrasp: ++weak_grasp; break;
            case mission::GraspOutcome::Loss: ++loss; break;
            default: break;
        }
        table.add_row({report::cell(rep), to_string(rp.final_state),
                       rp.correct_recognition ? "yes" : "no", to_string(rp.outcome),
                       report::cell(rp.docking.d, 3), report::cell(rp.docking.o, 3),
                       report::cell(std::min(rp.docking.alpha, 180.0 - rp.docking.alpha), 2),
                       report::cell(rp.grasp_error_mm, 2),
                       report::cell(rp.valve_angle_error_deg, 2)});
        if (rep == 0) first_trace = mission::mission_report_text(rp);
    }
    std::ostringstream body;
    body << report::render(table);
    const double n = static_cast<double>(cfg.reps);
    report::Table summary;
    summary.title = "scoring categories";
    summary.columns = {"Correct Recognition", "Correct Grasp", "Grasp", "Loss"};
    char pct[4][16];
    std::snprintf(pct[0], 16, "%.0f%%", 100.0 * correct_rec / n);
    std::snprintf(pct[1], 16, "%.0f%%", 100.0 * correct_grasp / n);
    std::snprintf(pct[2], 16, "%.0f%%", 100.0 * weak_grasp / n);
    std::snprintf(pct[3], 16, "%.0f%%", 100.0 * loss / n);
    summary.add_row({pct[0], pct[1], pct[2], pct[3]});
    body << "\n" << report::render(summary);
    body << "score_rate " << report::cell((correct_grasp + weak_grasp) / n, 3) << "\n";
    bundle.add("mission_report.txt", body.str());
    bundle.add("mission_trace_rep0.txt", first_trace, false);
    bundle.finish(times);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Panel-servicing robot stack: synthetic arena, perception, and mission control"};
    app.require_subcommand(1);

    RunConfig cfg;
    bool seed_set = false;
    app.add_option_function<std::uint64_t>(
           "--seed", [&](std::uint64_t s) { cfg.seed = s; seed_set = true; },
           "master seed (required; all randomness derives from it)")
        ->expected(1);
    app.add_option("--scenario", cfg.scenario_path, "scenario file (JSON)");
    app.add_option("--cascade", cfg.cascade_path, "trained cascade file");
    app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
    app.add_option("--reps", cfg.reps, "repetitions")->capture_default_str();
    app.add_option("--set", cfg.overrides, "parameter overrides key=value")->take_all();

    std::map<std::string, int (*)(const RunConfig&)> commands{
        {"gen-scenario", cmd_gen_scenario}, {"find-panel", cmd_find_panel},
        {"dock", cmd_dock},                 {"detect", cmd_detect},
        {"train", cmd_train},               {"evaluate", cmd_evaluate},
        {"wrench-pose", cmd_wrench_pose},   {"valve-pose", cmd_valve_pose},
        {"run-mission", cmd_run_mission}};
    for (auto& [name, fn] : commands) app.add_subcommand(name, "")->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        require(seed_set, "usage-error", "--seed is required");
        require(cfg.reps >= 1, "usage-error", "--reps must be at least 1");
        for (auto& [name, fn] : commands)
            if (app.got_subcommand(name)) return fn(cfg);
        fail("usage-error", "no command given");
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        const bool usage = e.label() == "usage-error" || e.label() == "config-error";
        return usage ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
