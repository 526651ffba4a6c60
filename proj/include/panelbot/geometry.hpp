#pragma once

// Closed-form geometry: covariance/PCA, oriented bounding boxes, line-plane
// angles, ray-plane intersection, pixel-pair angles, and sparse stereo
// triangulation. Pure functions over immutable inputs.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>

#include "panelbot/core.hpp"

namespace panelbot::geom {

// ---------------------------------------------------------------------------
// Basic types
// ---------------------------------------------------------------------------

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double squared_norm() const { return dot(*this); }
    double norm() const { return std::sqrt(squared_norm()); }

    Vec3 normalized() const {
        double n = norm();
        require(n > 0.0, "degenerate-input", "cannot normalize zero vector");
        return *this / n;
    }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

struct Mat3 {
    // Row-major.
    std::array<std::array<double, 3>, 3> m{};

    static Mat3 identity() {
        Mat3 r;
        r.m = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
        return r;
    }

    double& operator()(int r, int c) { return m[r][c]; }
    double operator()(int r, int c) const { return m[r][c]; }

    Vec3 row(int r) const { return {m[r][0], m[r][1], m[r][2]}; }
    Vec3 col(int c) const { return {m[0][c], m[1][c], m[2][c]}; }

    Vec3 operator*(const Vec3& v) const {
        return {row(0).dot(v), row(1).dot(v), row(2).dot(v)};
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += m[i][k] * o.m[k][j];
                r.m[i][j] = s;
            }
        return r;
    }

    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
        return r;
    }

    double determinant() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }
};

struct Plane {
    // a*x + b*y + c*z + d = 0; (a,b,c) unit length after normalize().
    double a = 0.0, b = 0.0, c = 1.0, d = 0.0;

    Vec3 normal() const { return {a, b, c}; }

    Plane normalized() const {
        double n = normal().norm();
        require(n > 0.0, "degenerate-input", "plane with zero normal");
        return {a / n, b / n, c / n, d / n};
    }

    double signed_distance(const Vec3& p) const {
        return a * p.x + b * p.y + c * p.z + d;
    }

    static Plane from_point_normal(const Vec3& point, const Vec3& normal) {
        Vec3 n = normal.normalized();
        return {n.x, n.y, n.z, -n.dot(point)};
    }
};

struct Line3 {
    Vec3 point;
    Vec3 direction;  // unit
};

struct RigidTransform {
    Mat3 rotation = Mat3::identity();
    Vec3 translation;

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

    RigidTransform inverse() const {
        Mat3 rt = rotation.transposed();
        return {rt, (rt * translation) * -1.0};
    }

    static RigidTransform identity() { return {}; }
};

struct ObbExtent {
    double sx = 0.0, sy = 0.0, sz = 0.0;

    std::array<double, 3> sorted_descending() const {
        std::array<double, 3> e{sx, sy, sz};
        std::sort(e.begin(), e.end(), std::greater<>());
        return e;
    }
};

struct PinholeCamera {
    double fx = 1.0, fy = 1.0;
    double cx = 0.0, cy = 0.0;
    RigidTransform pose;  // camera-to-world

    // Back-projected ray direction in the camera frame for pixel (u, v);
    // z component fixed at 1.
    Vec3 ray(double u, double v) const {
        return {(u - cx) / fx, (v - cy) / fy, 1.0};
    }

    // Camera-frame point to pixel.
    std::pair<double, double> project(const Vec3& pc) const {
        require(pc.z > 0.0, "behind-camera", "projection of non-positive depth point");
        return {fx * pc.x / pc.z + cx, fy * pc.y / pc.z + cy};
    }
};

struct StereoRig {
    PinholeCamera left;
    PinholeCamera right;
    double baseline = 0.0;  // meters, right camera at +x of left, same orientation
};

// ---------------------------------------------------------------------------
// Mean and covariance (sample normalization, 1/(N-1))
// ---------------------------------------------------------------------------

inline std::pair<Vec3, Mat3> mean_and_covariance(std::span<const Vec3> points) {
    const std::size_t n = points.size();
    require(n >= 2, "degenerate-input", "covariance needs at least 2 points");

    Vec3 mean;
    for (const Vec3& p : points) mean = mean + p;
    mean = mean / static_cast<double>(n);

    Mat3 cov;
    for (const Vec3& p : points) {
        Vec3 q = p - mean;
        const double v[3] = {q.x, q.y, q.z};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) cov.m[i][j] += v[i] * v[j];
    }
    const double scale = 1.0 / static_cast<double>(n - 1);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) cov.m[i][j] *= scale;
    return {mean, cov};
}

// ---------------------------------------------------------------------------
// Symmetric 3x3 eigen-decomposition by cyclic Jacobi rotations
// ---------------------------------------------------------------------------

struct EigenPair {
    double value = 0.0;
    Vec3 vector;
};

inline std::array<EigenPair, 3> principal_components(const Mat3& cov) {
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            require(std::fabs(cov.m[i][j] - cov.m[j][i]) <= 1e-9, "contract-violation",
                    "principal_components requires a symmetric matrix");

    Mat3 a = cov;
    Mat3 v = Mat3::identity();

    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = std::fabs(a.m[0][1]) + std::fabs(a.m[0][2]) + std::fabs(a.m[1][2]);
        if (off < 1e-15) break;
        for (int p = 0; p < 3; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (std::fabs(a.m[p][q]) < 1e-18) continue;
                const double theta = (a.m[q][q] - a.m[p][p]) / (2.0 * a.m[p][q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double akp = a.m[k][p], akq = a.m[k][q];
                    a.m[k][p] = c * akp - s * akq;
                    a.m[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a.m[p][k], aqk = a.m[q][k];
                    a.m[p][k] = c * apk - s * aqk;
                    a.m[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    const double vkp = v.m[k][p], vkq = v.m[k][q];
                    v.m[k][p] = c * vkp - s * vkq;
                    v.m[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::array<EigenPair, 3> out;
    for (int i = 0; i < 3; ++i) out[i] = {a.m[i][i], v.col(i)};
    std::sort(out.begin(), out.end(),
              [](const EigenPair& l, const EigenPair& r) { return l.value > r.value; });
    return out;
}

// ---------------------------------------------------------------------------
// Oriented bounding box of a cluster
// ---------------------------------------------------------------------------

struct Obb {
    // Maps world points into the PCA frame: p_hat = R * p + t, with R rows the
    // principal axes and t = -R * mean.
    RigidTransform to_box_frame;
    ObbExtent extent;
    Vec3 center;  // box midpoint in world coordinates
};

inline Obb obb_of_cluster(std::span<const Vec3> points) {
    require(points.size() >= 2, "degenerate-input", "OBB needs at least 2 points");

    auto [mean, cov] = mean_and_covariance(points);
    auto eig = principal_components(cov);

    Mat3 basis;
    for (int i = 0; i < 3; ++i) {
        basis.m[i][0] = eig[i].vector.x;
        basis.m[i][1] = eig[i].vector.y;
        basis.m[i][2] = eig[i].vector.z;
    }
    // Keep a right-handed frame; extents are unaffected.
    if (basis.determinant() < 0.0)
        for (int j = 0; j < 3; ++j) basis.m[2][j] = -basis.m[2][j];

    RigidTransform t{basis, (basis * mean) * -1.0};

    Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (const Vec3& p : points) {
        Vec3 q = t.apply(p);
        lo = {std::min(lo.x, q.x), std::min(lo.y, q.y), std::min(lo.z, q.z)};
        hi = {std::max(hi.x, q.x), std::max(hi.y, q.y), std::max(hi.z, q.z)};
    }
    const Vec3 center = t.inverse().apply((lo + hi) * 0.5);
    return {t, {std::fabs(hi.x - lo.x), std::fabs(hi.y - lo.y), std::fabs(hi.z - lo.z)}, center};
}

// ---------------------------------------------------------------------------
// Line-plane docking angle
// ---------------------------------------------------------------------------

// arccos of the normalized dot product between the plane normal and the line
// direction, folded to [0, 90] degrees.
inline double line_plane_angle(const Line3& line, const Plane& plane) {
    const double dn = line.direction.norm();
    const double nn = plane.normal().norm();
    require(dn > 0.0 && nn > 0.0, "contract-violation",
            "line_plane_angle needs non-zero direction and normal");
    double cosang = line.direction.dot(plane.normal()) / (dn * nn);
    cosang = std::clamp(std::fabs(cosang), 0.0, 1.0);
    return rad2deg(std::acos(cosang));
}

// ---------------------------------------------------------------------------
// Ray-plane intersection (camera frame)
// ---------------------------------------------------------------------------

// Back-projects pixel (u, v) and intersects the ray with the plane, both in
// the camera frame: t = -D / (A*x_ray + B*y_ray + C), point = (t*x_ray, t*y_ray, t).
inline Vec3 ray_plane_intersection(double u, double v, const PinholeCamera& camera,
                                   const Plane& plane) {
    const Vec3 r = camera.ray(u, v);
    const double denom = plane.a * r.x + plane.b * r.y + plane.c;
    require(std::fabs(denom) > 1e-12, "no-intersection", "ray parallel to plane");
    const double t = -plane.d / denom;
    return {t * r.x, t * r.y, t};
}

// ---------------------------------------------------------------------------
// Two-point pixel angle
// ---------------------------------------------------------------------------

// Angle of the vector from `from` to `to` in image coordinates (u right,
// v down), full quadrant, degrees in (-180, 180]. With fold_to_90 the result is
// reduced mod 90 into [0, 90) for square-symmetric targets.
inline double two_point_angle(double u_from, double v_from, double u_to, double v_to,
                              bool fold_to_90 = false) {
    const double du = u_to - u_from;
    const double dv = v_to - v_from;
    require(du != 0.0 || dv != 0.0, "degenerate-input", "two_point_angle of coincident points");
    double ang = rad2deg(std::atan2(dv, du));
    if (ang <= -180.0) ang += 360.0;
    return fold_to_90 ? fold_deg(ang, 90.0) : ang;
}

// ---------------------------------------------------------------------------
// Sparse stereo triangulation (rectified rig, midpoint method)
// ---------------------------------------------------------------------------

inline Vec3 triangulate(double ul, double vl, double ur, double vr, const StereoRig& rig) {
    require(rig.baseline > 0.0, "contract-violation", "stereo baseline must be positive");

    const Vec3 dl = rig.left.ray(ul, vl);
    const Vec3 dr = rig.right.ray(ur, vr);
    const double disparity = dl.x - dr.x;  // normalized coordinates
    require(disparity > 1e-12, "behind-camera", "non-positive stereo disparity");

    // Rays in the left-camera frame.
    const Vec3 ol{0.0, 0.0, 0.0};
    const Vec3 orr{rig.baseline, 0.0, 0.0};

    // Midpoint of the common perpendicular of the two rays.
    const Vec3 w = ol - orr;
    const double a = dl.dot(dl), b = dl.dot(dr), c = dr.dot(dr);
    const double d = dl.dot(w), e = dr.dot(w);
    const double denom = a * c - b * b;
    require(std::fabs(denom) > 1e-15, "behind-camera", "parallel stereo rays");
    const double s = (b * e - c * d) / denom;
    const double t = (a * e - b * d) / denom;
    const Vec3 pl = ol + dl * s;
    const Vec3 pr = orr + dr * t;
    const Vec3 mid = (pl + pr) * 0.5;
    require(mid.z > 0.0, "behind-camera", "triangulated point behind the rig");
    return mid;  // left-camera (rig) frame
}

}  // namespace panelbot::geom
