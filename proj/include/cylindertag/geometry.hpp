#ifndef CYLINDERTAG_GEOMETRY_HPP
#define CYLINDERTAG_GEOMETRY_HPP

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cylindertag {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// 2D line {p : n.dot(p) + d = 0} with unit normal n.
struct Line2 {
    Vec2 normal{1.0, 0.0};
    double offset = 0.0;

    double signed_distance(const Vec2& p) const { return normal.dot(p) + offset; }
    double distance(const Vec2& p) const { return std::abs(signed_distance(p)); }
    /// Unit direction along the line (normal rotated by 90 degrees).
    Vec2 direction() const { return Vec2(-normal.y(), normal.x()); }

    static Line2 through(const Vec2& a, const Vec2& b);
};

/// Rigid transform x_out = R * x_in + t. Rotation kept orthonormal, det +1.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    RigidTransform inverse() const {
        return {rotation.transpose(), -(rotation.transpose() * translation)};
    }
    RigidTransform compose(const RigidTransform& other) const {
        // this * other: applies other first.
        return {rotation * other.rotation, rotation * other.translation + translation};
    }
    static RigidTransform from_axis_angle(const Vec3& axis, double angle_rad,
                                          const Vec3& t = Vec3::Zero());
    bool is_valid(double tol = 1e-9) const;
};

struct CameraIntrinsics {
    double fx = 1.0, fy = 1.0;
    double cx = 0.0, cy = 0.0;
    double k1 = 0.0, k2 = 0.0;

    bool has_distortion() const { return k1 != 0.0 || k2 != 0.0; }
};

/// Cross-ratio of four collinear scalar positions, ordered c1<c2<c3<c4 along
/// the line: (|c1c3| * |c4c2|) / (|c3c2| * |c1c4|).
double cross_ratio(double c1, double c2, double c3, double c4);

/// 2D version; points must be collinear within 1e-6 of their span.
double cross_ratio(const Vec2& c1, const Vec2& c2, const Vec2& c3, const Vec2& c4);

/// Total-least-squares line fit (principal direction of the centered points).
Line2 fit_line_tls(const std::vector<Vec2>& points);

/// Weighted total-least-squares line fit.
Line2 fit_line_tls(const std::vector<Vec2>& points, const std::vector<double>& weights);

/// Intersection of two lines; throws if near-parallel (|sin angle| <= 1e-8).
Vec2 intersect(const Line2& l1, const Line2& l2);

/// Pinhole projection with optional even radial distortion.
/// Throws if the transformed depth is <= 1e-6.
Vec2 project(const CameraIntrinsics& K, const RigidTransform& T, const Vec3& P);

/// Distortion-free back-projection of a pixel at a known camera-frame depth.
Vec3 unproject(const CameraIntrinsics& K, const Vec2& pixel, double depth);

/// Invert the radial distortion: maps an observed (distorted) pixel to the
/// pixel the distortion-free pinhole model would produce.
Vec2 undistort(const CameraIntrinsics& K, const Vec2& pixel);

/// Geodesic rotation angle (degrees) and translation distance between poses.
std::pair<double, double> pose_delta(const RigidTransform& a, const RigidTransform& b);

}  // namespace cylindertag

#endif
