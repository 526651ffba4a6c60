#include <catch2/catch_amalgamated.hpp>

#include "panelbot/scenario_gen.hpp"
#include "panelbot/wrench.hpp"

using namespace panelbot;
using geom::Plane;
using geom::Vec3;
using img::RasterImage;
using img::Rect;

namespace {

sim::PanelSceneSpec one_wrench_scene(double orientation_deg, double noise = 0.0) {
    sim::PanelSceneSpec s;
    s.render.width_px = 460;
    s.render.height_px = 600;
    s.render.fx = s.render.fy = 760.0;
    s.render.camera_depth_m = 0.50;
    s.render.noise_sigma = noise;
    s.render.gradient = 0.0;
    s.valve = {40.0, 10.0, 0.0, 10.0};  // out of view
    sim::WrenchSpec w;
    w.head_width_mm = 24.0;
    w.handle_length_mm = 120.0;
    w.x_m = 0.0021;
    w.y_m = 0.0513;  // head low in frame so tilted handles stay in view
    w.orientation_deg = orientation_deg;
    s.wrenches.push_back(w);
    return s;
}

}  // namespace

TEST_CASE("extend_handle_bbox: exactly the (x, y-2h, w, 2h) formula") {
    const auto hb = wrench::extend_handle_bbox({100, 300, 40, 60}, 1000, 1000);
    CHECK(hb.bbox.x == 100);
    CHECK(hb.bbox.y == 180);
    CHECK(hb.bbox.w == 40);
    CHECK(hb.bbox.h == 120);
    CHECK_FALSE(hb.clipped);
}

TEST_CASE("extend_handle_bbox: clipping at the image top and degenerate input") {
    const auto hb = wrench::extend_handle_bbox({10, 30, 20, 40}, 200, 200);
    CHECK(hb.clipped);
    CHECK(hb.bbox.y == 0);
    CHECK(hb.bbox.h == 30);  // 30 - 2*40 = -50 clipped to 0, ends at y=30
    CHECK_THROWS_AS(wrench::extend_handle_bbox({10, 30, 20, 0}, 200, 200), Error);
}

TEST_CASE("segment_handle: outliers removed, plane within 2 degrees of truth") {
    const auto scene = one_wrench_scene(-90.0);
    const auto cam = sim::make_camera(scene);
    const auto truth = sim::compute_truth(scene, cam);
    const auto cloud = sim::synthesize_handle_cloud(scene, cam, 0.002, 0.2, 33, 0);

    // Handle bbox from the truth head box.
    const auto hb = wrench::extend_handle_bbox(truth.wrenches[0].head_bbox, 460, 600);
    const auto seg = wrench::segment_handle(cloud, hb.bbox, cam);

    // All board-depth outliers removed: inlier depths near the tool plane.
    for (const Vec3& p : seg.inliers)
        CHECK(std::fabs(p.z - truth.tool_depth_m) < 0.012);

    const Vec3 n_est = seg.plane.normal();
    const Vec3 n_true = truth.wrenches[0].handle_plane_cam.normal();
    const double cosang = std::clamp(std::fabs(n_est.dot(n_true)), 0.0, 1.0);
    CHECK(rad2deg(std::acos(cosang)) <= 2.0);
}

TEST_CASE("segment_handle: all points beyond a meter fails") {
    std::vector<Vec3> cloud;
    for (int i = 0; i < 100; ++i) cloud.push_back({0.0, 0.0, 1.5 + 0.001 * i});
    geom::PinholeCamera cam;
    cam.fx = cam.fy = 700;
    cam.cx = cam.cy = 200;
    CHECK_THROWS_AS(wrench::segment_handle(cloud, {0, 0, 400, 400}, cam), Error);
}

TEST_CASE("segment_handle: noiseless cloud recovered exactly with nothing discarded") {
    const auto scene = one_wrench_scene(-90.0);
    const auto cam = sim::make_camera(scene);
    const auto truth = sim::compute_truth(scene, cam);
    const auto cloud = sim::synthesize_handle_cloud(scene, cam, 0.0, 0.0, 7, 0);
    const auto hb = wrench::extend_handle_bbox(truth.wrenches[0].head_bbox, 460, 600);
    const auto seg = wrench::segment_handle(cloud, hb.bbox, cam);
    // Planar fit is exact and keeps every cropped point.
    for (const Vec3& p : seg.inliers) CHECK(std::fabs(seg.plane.signed_distance(p)) < 1e-9);
    std::size_t in_box = 0;
    for (const Vec3& p : cloud) {
        const auto [u, v] = cam.project(p);
        if (hb.bbox.contains(static_cast<int>(std::floor(u)), static_cast<int>(std::floor(v))))
            ++in_box;
    }
    CHECK(seg.inliers.size() == in_box);
}

TEST_CASE("grasp_point: centroid basics") {
    CHECK_THROWS_AS(wrench::grasp_point({}), Error);
    const Vec3 single{0.4, -0.2, 0.8};
    const Vec3 got = wrench::grasp_point({single});
    CHECK((got - single).norm() == 0.0);

    // Symmetric rod: centroid at the midpoint.
    std::vector<Vec3> rod;
    for (int i = 0; i <= 100; ++i) rod.push_back({-0.05 + 0.001 * i, 0.02, 0.46});
    const Vec3 mid = wrench::grasp_point(rod);
    CHECK(mid.x == Catch::Approx(0.0).margin(1e-12));
    CHECK(mid.y == Catch::Approx(0.02));
    CHECK(mid.z == Catch::Approx(0.46));
}

TEST_CASE("head_grip_center: rendered jaw within 2 px of the analytic centroid") {
    for (double orientation : {-90.0, 0.0, 35.0, -140.0}) {
        const auto scene = one_wrench_scene(orientation);
        const auto cam = sim::make_camera(scene);
        const auto truth = sim::compute_truth(scene, cam);
        const auto frame = sim::render_panel_image(scene, cam, 17);

        Rect roi_box = truth.wrenches[0].head_bbox;
        img::clip_rect(roi_box, frame.width, frame.height);
        const auto roi = img::crop(frame, roi_box);
        const auto grip = wrench::head_grip_center(roi);

        CHECK(std::fabs(grip.center_u + roi_box.x - truth.wrenches[0].grip_u) <= 2.0);
        CHECK(std::fabs(grip.center_v + roi_box.y - truth.wrenches[0].grip_v) <= 2.0);
        CHECK(std::fabs(grip.aperture_px - truth.wrenches[0].aperture_px) <= 2.5);
    }
}

TEST_CASE("head_grip_center: filled disk has no jaw") {
    RasterImage roi(120, 120, 210);
    for (int y = 0; y < 120; ++y)
        for (int x = 0; x < 120; ++x)
            if ((x - 60) * (x - 60) + (y - 60) * (y - 60) <= 40 * 40) roi.at(x, y) = 40;
    CHECK_THROWS_AS(wrench::head_grip_center(roi), Error);
}

TEST_CASE("head_orientation: pinned directions and antisymmetry") {
    CHECK(wrench::head_orientation(0, 0, 1, 0) == Catch::Approx(0.0));
    CHECK(wrench::head_orientation(0, 0, 1, 1) == Catch::Approx(45.0));
    const double fwd = wrench::head_orientation(3, 7, -2, 5);
    const double rev = wrench::head_orientation(-2, 5, 3, 7);
    CHECK(circ_dist_deg(fwd + 180.0, rev, 360.0) < 1e-9);
    CHECK_THROWS_AS(wrench::head_orientation(1, 1, 1, 1), Error);
}

TEST_CASE("head_orientation: render parameter round trip within 2 degrees") {
    for (double orientation : {45.0, -90.0, -120.0, 160.0}) {
        const auto scene = one_wrench_scene(orientation);
        const auto cam = sim::make_camera(scene);
        const auto truth = sim::compute_truth(scene, cam);
        const auto frame = sim::render_panel_image(scene, cam, 23);
        Rect roi_box = truth.wrenches[0].head_bbox;
        img::clip_rect(roi_box, frame.width, frame.height);
        const auto grip = wrench::head_grip_center(img::crop(frame, roi_box));
        const double est =
            wrench::head_orientation(grip.center_u, grip.center_v, grip.deep_u, grip.deep_v);
        CHECK(circ_dist_deg(est, orientation, 360.0) <= 2.0);
    }
}

TEST_CASE("lift_center_to_3d: lands on the plane") {
    geom::PinholeCamera cam;
    cam.fx = cam.fy = 760;
    cam.cx = 210;
    cam.cy = 210;
    const Plane plane = Plane::from_point_normal({0, 0, 0.46}, {0.05, -0.02, 1.0});
    const Vec3 p = wrench::lift_center_to_3d(250.0, 180.0, plane, cam);
    CHECK(std::fabs(plane.signed_distance(p)) < 1e-9);
}

TEST_CASE("accumulate_median: identical frames, outlier robustness, window check") {
    wrench::WrenchObservation base;
    base.grip_center_3d = {0.10, 0.20, 0.46};
    base.grasp_point = {0.10, 0.05, 0.46};
    base.orientation_deg = -88.0;

    std::vector<wrench::WrenchObservation> frames(10, base);
    const auto acc = wrench::accumulate_median(frames);
    CHECK(acc.grip_center_3d.x == base.grip_center_3d.x);
    CHECK(acc.orientation_deg == base.orientation_deg);
    CHECK(acc.frame_count == 10);

    frames[7].grasp_point.x = 9.99;
    const auto acc2 = wrench::accumulate_median(frames);
    CHECK(acc2.grasp_point.x == Catch::Approx(0.10));

    frames.pop_back();
    CHECK_THROWS_AS(wrench::accumulate_median(frames), Error);
}

TEST_CASE("accumulate_median: corrupting 4 of 10 stays within the clean range") {
    Rng rng(2718);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<wrench::WrenchObservation> frames(10);
        for (auto& f : frames) {
            f.grip_center_3d = {0.1 + rng.uniform(-0.002, 0.002), 0.2, 0.46};
            f.grasp_point = {0.1, 0.05 + rng.uniform(-0.002, 0.002), 0.46};
            f.orientation_deg = -90.0 + rng.uniform(-1.5, 1.5);
        }
        double clean_min = 1e300, clean_max = -1e300;
        for (std::size_t i = 4; i < 10; ++i) {
            clean_min = std::min(clean_min, frames[i].grip_center_3d.x);
            clean_max = std::max(clean_max, frames[i].grip_center_3d.x);
        }
        // Corrupt the first four arbitrarily.
        for (std::size_t i = 0; i < 4; ++i) {
            frames[i].grip_center_3d.x = rng.uniform(-50, 50);
            frames[i].grasp_point.y = rng.uniform(-50, 50);
            frames[i].orientation_deg = rng.uniform(-720, 720);
        }
        const auto acc = wrench::accumulate_median(frames);
        CHECK(acc.grip_center_3d.x >= clean_min - 1e-12);
        CHECK(acc.grip_center_3d.x <= clean_max + 1e-12);
    }
}

TEST_CASE("select_target: commanded width, backup, and not-found") {
    const std::vector<double> widths{19, 22, 24, 27, 30, 32};
    const auto sel = wrench::select_target(widths, 24.0, 1.5);
    CHECK(sel.target == 2);
    CHECK(sel.backup == -1);

    const std::vector<double> two24{19, 24.2, 23.9, 27, 30, 32};
    const auto sel2 = wrench::select_target(two24, 24.0, 1.5);
    CHECK(sel2.target == 2);
    CHECK(sel2.backup == 1);

    CHECK_THROWS_AS(wrench::select_target(widths, 10.0, 1.0), Error);
}

TEST_CASE("observe_wrench: noiseless end-to-end within tolerances") {
    const auto scene = one_wrench_scene(-79.0);
    const auto cam = sim::make_camera(scene);
    const auto truth = sim::compute_truth(scene, cam);
    const auto frame = sim::render_panel_image(scene, cam, 29);
    const auto cloud = sim::synthesize_handle_cloud(scene, cam, 0.0, 0.0, 31, 0);

    const auto obs = wrench::observe_wrench(frame, truth.wrenches[0].head_bbox, cloud, cam);
    CHECK((obs.grasp_point - truth.wrenches[0].grasp_point_cam).norm() <= 0.005);
    CHECK(circ_dist_deg(obs.orientation_deg, -79.0, 360.0) <= 2.0);
    CHECK(std::fabs(obs.handle_plane.signed_distance(obs.grip_center_3d)) <= 1e-6);
    CHECK(std::fabs(obs.jaw_width_mm - 24.0) <= 1.2);
}
