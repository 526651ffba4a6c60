#pragma once

// Panel search from merged 2D scans: euclidean clustering, RANSAC line
// filtering, OBB similarity ranking against the known panel size, and the
// [0, 180] docking-angle estimate.

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "panelbot/core.hpp"
#include "panelbot/geometry.hpp"
#include "panelbot/scene.hpp"

namespace panelbot::panel {

using geom::Line3;
using geom::Plane;
using geom::Vec3;

struct Cluster {
    std::vector<Vec3> points;
    int id = 0;
};

struct PanelCandidate {
    int cluster_id = 0;
    geom::Obb obb;
    double similarity = 0.0;  // in (0, 1]
    Vec3 center;              // cluster mean
    Line3 line;               // refit panel line
};

struct DockingEstimate {
    double d = 0.0;      // meters, perpendicular robot-to-panel distance
    double o = 0.0;      // meters, along-panel offset
    double alpha = 0.0;  // degrees in [0, 180]
};

// ---------------------------------------------------------------------------
// Euclidean clustering (grid-bucketed neighbor search)
// ---------------------------------------------------------------------------

inline std::vector<Cluster> euclidean_cluster(const std::vector<Vec3>& points,
                                              double tolerance, std::size_t min_size) {
    require(tolerance > 0.0, "contract-violation", "clustering tolerance must be positive");
    std::vector<Cluster> clusters;
    if (points.empty()) return clusters;

    // Bucket points into tolerance-sized cells; neighbors live in the 3x3x3
    // cell block around a point.
    const double cell = tolerance;
    std::map<std::tuple<long, long, long>, std::vector<std::size_t>> grid;
    auto key = [&](const Vec3& p) {
        return std::tuple<long, long, long>{static_cast<long>(std::floor(p.x / cell)),
                                            static_cast<long>(std::floor(p.y / cell)),
                                            static_cast<long>(std::floor(p.z / cell))};
    };
    for (std::size_t i = 0; i < points.size(); ++i) grid[key(points[i])].push_back(i);

    std::vector<char> visited(points.size(), 0);
    const double tol2 = tolerance * tolerance;
    int next_id = 0;
    for (std::size_t seed = 0; seed < points.size(); ++seed) {
        if (visited[seed]) continue;
        std::vector<std::size_t> members{seed};
        visited[seed] = 1;
        for (std::size_t head = 0; head < members.size(); ++head) {
            const Vec3& p = points[members[head]];
            const auto [kx, ky, kz] = key(p);
            for (long dz = -1; dz <= 1; ++dz)
                for (long dy = -1; dy <= 1; ++dy)
                    for (long dx = -1; dx <= 1; ++dx) {
                        auto it = grid.find({kx + dx, ky + dy, kz + dz});
                        if (it == grid.end()) continue;
                        for (std::size_t j : it->second) {
                            if (visited[j]) continue;
                            if ((points[j] - p).squared_norm() <= tol2) {
                                visited[j] = 1;
                                members.push_back(j);
                            }
                        }
                    }
        }
        if (members.size() < min_size) continue;
        Cluster c;
        c.id = next_id++;
        c.points.reserve(members.size());
        for (std::size_t j : members) c.points.push_back(points[j]);
        clusters.push_back(std::move(c));
    }
    return clusters;
}

// ---------------------------------------------------------------------------
// RANSAC line filter
// ---------------------------------------------------------------------------

struct LineFitResult {
    bool kept = false;
    Line3 line;
    double outlier_ratio = 1.0;
    std::vector<std::size_t> inliers;
};

inline double point_line_distance(const Vec3& p, const Line3& line) {
    return (p - line.point).cross(line.direction).norm();
}

// Least-squares line through the points: mean + dominant principal axis.
inline Line3 fit_line_pca(const std::vector<Vec3>& pts) {
    auto [mean, cov] = geom::mean_and_covariance(pts);
    const auto eig = geom::principal_components(cov);
    Vec3 dir = eig[0].vector;
    const double n = dir.norm();
    require(n > 0.0, "degenerate-input", "line fit on degenerate cluster");
    return {mean, dir / n};
}

inline LineFitResult line_filter(const Cluster& cluster, int ransac_iters, double inlier_dist,
                                 double max_outlier_ratio, std::uint64_t seed = 12345) {
    require(cluster.points.size() >= 2, "degenerate-input", "line filter needs >= 2 points");
    const auto& pts = cluster.points;

    Rng rng(seed);
    std::vector<std::size_t> best;
    for (int it = 0; it < ransac_iters; ++it) {
        const std::size_t a = rng.below(pts.size());
        std::size_t b = rng.below(pts.size());
        if (a == b) continue;
        const Vec3 d = pts[b] - pts[a];
        const double dn = d.norm();
        if (dn < 1e-12) continue;
        const Line3 hyp{pts[a], d / dn};
        std::vector<std::size_t> inliers;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (point_line_distance(pts[i], hyp) <= inlier_dist) inliers.push_back(i);
        if (inliers.size() > best.size()) best = std::move(inliers);
    }

    LineFitResult res;
    if (best.size() < 2) return res;
    res.outlier_ratio = 1.0 - static_cast<double>(best.size()) / pts.size();
    res.kept = res.outlier_ratio <= max_outlier_ratio;
    std::vector<Vec3> sel;
    sel.reserve(best.size());
    for (std::size_t i : best) sel.push_back(pts[i]);
    res.line = fit_line_pca(sel);
    res.inliers = std::move(best);
    return res;
}

// ---------------------------------------------------------------------------
// OBB similarity ranking
// ---------------------------------------------------------------------------

// exp(-L1 distance of sorted extents vs sorted panel dims, normalized by the
// panel width). Bounded in (0, 1], monotone in the extent error.
inline double similarity_score(const geom::ObbExtent& extent, double panel_width,
                               double panel_thickness) {
    std::array<double, 3> dims{panel_width, panel_thickness, 0.0};
    std::sort(dims.begin(), dims.end(), std::greater<>());
    const auto ext = extent.sorted_descending();
    double l1 = 0.0;
    for (int i = 0; i < 3; ++i) l1 += std::fabs(ext[i] - dims[i]);
    return std::exp(-l1 / panel_width);
}

inline std::vector<PanelCandidate> rank_candidates(const std::vector<Cluster>& clusters,
                                                   double panel_width, double panel_thickness) {
    require(panel_width > 0.0 && panel_thickness > 0.0, "contract-violation",
            "panel dims must be positive");
    std::vector<PanelCandidate> out;
    for (const Cluster& c : clusters) {
        if (c.points.size() < 2) continue;
        PanelCandidate pc;
        pc.cluster_id = c.id;
        pc.obb = geom::obb_of_cluster(c.points);
        pc.similarity = similarity_score(pc.obb.extent, panel_width, panel_thickness);
        // Box midpoint, not the point mean: beam density varies along the
        // face and would bias the mean toward the sensor's foot point.
        pc.center = pc.obb.center;
        out.push_back(std::move(pc));
    }
    std::sort(out.begin(), out.end(), [](const PanelCandidate& a, const PanelCandidate& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.cluster_id < b.cluster_id;
    });
    return out;
}

struct FinderParams {
    double cluster_tolerance = 0.30;  // meters
    std::size_t cluster_min_size = 8;
    int ransac_iters = 200;
    double ransac_inlier_dist = 0.03;  // meters
    double max_outlier_ratio = 0.3;
};

// Full pipeline: cluster, keep line-like clusters, rank by panel similarity.
inline std::vector<PanelCandidate> find_panel(const std::vector<Vec3>& points,
                                              double panel_width, double panel_thickness,
                                              const FinderParams& params, std::uint64_t seed) {
    auto clusters = euclidean_cluster(points, params.cluster_tolerance, params.cluster_min_size);
    std::vector<Cluster> line_like;
    std::map<int, Line3> lines;
    for (const Cluster& c : clusters) {
        auto fit = line_filter(c, params.ransac_iters, params.ransac_inlier_dist,
                               params.max_outlier_ratio, derive_seed(seed, "line-filter"));
        if (fit.kept) {
            lines[c.id] = fit.line;
            line_like.push_back(c);
        }
    }
    auto ranked = rank_candidates(line_like, panel_width, panel_thickness);
    for (PanelCandidate& pc : ranked) pc.line = lines[pc.cluster_id];
    return ranked;
}

// ---------------------------------------------------------------------------
// Docking angle
// ---------------------------------------------------------------------------

// alpha' in [0, 90] from the line-plane formula against the given plane (its
// normal is the robot's heading axis), extended to [0, 180] by intersecting
// the panel line with the robot's physical side plane (the plane containing
// the heading axis, lateral normal), projecting the laser points onto it, and
// comparing the intersection coordinate with the closest projected point's
// coordinate along the heading axis.
inline double extend_docking_angle(const Line3& line, const Plane& heading_plane,
                                   const std::vector<Vec3>& panel_points) {
    const Vec3 heading = heading_plane.normalized().normal();
    const double alpha_prime = geom::line_plane_angle(line, heading_plane);

    Vec3 lateral = Vec3{0, 0, 1}.cross(heading);
    const double ln = lateral.norm();
    if (ln < 1e-9) return alpha_prime;  // heading along z: no 2D disambiguation
    lateral = lateral / ln;

    const double d_lat = line.direction.dot(lateral);
    const double d_head = line.direction.dot(heading);
    if (std::fabs(d_head) < 1e-9 || alpha_prime > 90.0 - 1e-9) return 90.0;
    if (std::fabs(d_lat) < 1e-12 || alpha_prime < 1e-9) return alpha_prime;

    // Which lateral side the panel lies on (it never straddles the robot's
    // own side plane while docked).
    double mean_lat = 0.0;
    for (const Vec3& p : panel_points) mean_lat += p.dot(lateral);
    mean_lat /= static_cast<double>(panel_points.size());
    const double side_sign = mean_lat >= 0.0 ? 1.0 : -1.0;

    // Panel line vs the side plane {lateral . p = 0}.
    const double t = -line.point.dot(lateral) / d_lat;
    const Vec3 p_int = line.point + line.direction * t;
    const double x_int = p_int.dot(heading);

    // Closest projected laser point to the intersection.
    double best_d2 = std::numeric_limits<double>::infinity();
    double x_near = 0.0;
    for (const Vec3& p : panel_points) {
        const Vec3 proj = p - lateral * p.dot(lateral);
        const double d2 = (proj - p_int).squared_norm();
        if (d2 < best_d2) {
            best_d2 = d2;
            x_near = proj.dot(heading);
        }
    }

    // Slope sign of the panel line in the (heading, lateral) frame.
    const double slope_sign = -side_sign * (x_int >= x_near ? 1.0 : -1.0);
    return slope_sign >= 0.0 ? alpha_prime : 180.0 - alpha_prime;
}

struct DockingAngleParams {
    int ransac_iters = 200;
    double ransac_inlier_dist = 0.03;
    double max_outlier_ratio = 0.5;
};

// Four steps: bearing-window filtering around the nearest return, RANSAC line
// fit, alpha' from the line-plane formula, then the [0, 180] extension.
inline double estimate_docking_angle(const sim::LaserScan& scan, const Plane& robot_side_plane,
                                     double panel_bearing_window_deg,
                                     const DockingAngleParams& params = {},
                                     std::uint64_t seed = 977) {
    require(panel_bearing_window_deg > 0.0, "contract-violation",
            "bearing window must be positive");

    // Nearest finite return marks the panel bearing.
    double best_r = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < scan.ranges.size(); ++i)
        if (scan.ranges[i] < best_r) {
            best_r = scan.ranges[i];
            best_i = i;
        }
    require(std::isfinite(best_r), "insufficient-data", "scan has no returns");

    const double center_bearing = scan.beam_angle_deg(best_i);
    std::vector<Vec3> window_points;
    for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
        const double r = scan.ranges[i];
        if (!std::isfinite(r)) continue;
        const double bearing = scan.beam_angle_deg(i);
        if (std::fabs(bearing - center_bearing) > panel_bearing_window_deg / 2.0) continue;
        const double a = deg2rad(bearing);
        window_points.push_back({r * std::cos(a), r * std::sin(a), 0.0});
    }
    require(window_points.size() >= 2, "insufficient-data",
            "fewer than 2 beams in the panel bearing window");

    Cluster c{window_points, 0};
    auto fit = line_filter(c, params.ransac_iters, params.ransac_inlier_dist,
                           params.max_outlier_ratio, seed);
    require(fit.inliers.size() >= 2, "insufficient-data", "docking line fit failed");
    return extend_docking_angle(fit.line, robot_side_plane, window_points);
}

// Robot side plane used for docking: normal along the robot heading axis, so
// a parallel-docked panel line yields alpha = 0.
inline Plane robot_side_plane_for_heading() { return {1.0, 0.0, 0.0, 0.0}; }

// ---------------------------------------------------------------------------
// Docking report vs ground truth
// ---------------------------------------------------------------------------

inline DockingEstimate docking_report(const sim::Pose2& robot_pose,
                                      const sim::PanelPose& panel_truth) {
    const double c = std::cos(deg2rad(panel_truth.heading_deg));
    const double s = std::sin(deg2rad(panel_truth.heading_deg));
    const double rx = robot_pose.x - panel_truth.x;
    const double ry = robot_pose.y - panel_truth.y;
    DockingEstimate e;
    e.d = std::fabs(-s * rx + c * ry);  // perpendicular distance to the panel center line
    e.o = c * rx + s * ry;              // along-panel offset from the panel center
    e.alpha = fold_deg(robot_pose.theta_deg - panel_truth.heading_deg, 180.0);
    return e;
}

}  // namespace panelbot::panel
