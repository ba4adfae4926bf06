#include "cylindertag/geometry.hpp"

#include <cmath>

namespace cylindertag {

Line2 Line2::through(const Vec2& a, const Vec2& b) {
    Vec2 d = b - a;
    double len = d.norm();
    if (len < 1e-12) throw std::invalid_argument("Line2::through: coincident points");
    Vec2 n(-d.y() / len, d.x() / len);
    return {n, -n.dot(a)};
}

RigidTransform RigidTransform::from_axis_angle(const Vec3& axis, double angle_rad,
                                               const Vec3& t) {
    Eigen::AngleAxisd aa(angle_rad, axis.normalized());
    return {aa.toRotationMatrix(), t};
}

bool RigidTransform::is_valid(double tol) const {
    Mat3 should_be_identity = rotation.transpose() * rotation;
    if ((should_be_identity - Mat3::Identity()).norm() > tol) return false;
    return rotation.determinant() > 0.0;
}

double cross_ratio(double c1, double c2, double c3, double c4) {
    const double v[4] = {c1, c2, c3, c4};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (std::abs(v[i] - v[j]) < 1e-15)
                throw std::invalid_argument("cross_ratio: coincident points");
    double ac = c3 - c1;
    double cb = c2 - c3;
    double ad = c4 - c1;
    double db = c2 - c4;
    return (ac * db) / (cb * ad);
}

double cross_ratio(const Vec2& c1, const Vec2& c2, const Vec2& c3, const Vec2& c4) {
    // Project onto the dominant direction c1->c4 and check collinearity.
    Vec2 dir = c4 - c1;
    double span = dir.norm();
    if (span < 1e-15) throw std::invalid_argument("cross_ratio: degenerate span");
    dir /= span;
    Vec2 normal(-dir.y(), dir.x());
    double tol = 1e-6 * span;
    for (const Vec2* p : {&c2, &c3}) {
        if (std::abs(normal.dot(*p - c1)) > tol)
            throw std::invalid_argument("cross_ratio: points not collinear");
    }
    double t1 = 0.0;
    double t2 = dir.dot(c2 - c1);
    double t3 = dir.dot(c3 - c1);
    double t4 = span;
    return cross_ratio(t1, t2, t3, t4);
}

Line2 fit_line_tls(const std::vector<Vec2>& points) {
    return fit_line_tls(points, {});
}

Line2 fit_line_tls(const std::vector<Vec2>& points, const std::vector<double>& weights) {
    if (points.size() < 2) throw std::invalid_argument("fit_line_tls: need >= 2 points");
    const bool weighted = !weights.empty();
    double wsum = 0.0;
    Vec2 mean = Vec2::Zero();
    for (size_t i = 0; i < points.size(); ++i) {
        double w = weighted ? weights[i] : 1.0;
        mean += w * points[i];
        wsum += w;
    }
    if (wsum <= 0.0) throw std::invalid_argument("fit_line_tls: non-positive weight sum");
    mean /= wsum;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (size_t i = 0; i < points.size(); ++i) {
        double w = weighted ? weights[i] : 1.0;
        Vec2 d = points[i] - mean;
        cov += w * d * d.transpose();
    }
    if (cov.norm() < 1e-24) throw std::invalid_argument("fit_line_tls: coincident points");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    // Normal = eigenvector of the smaller eigenvalue.
    Vec2 n = es.eigenvectors().col(0);
    n.normalize();
    return {n, -n.dot(mean)};
}

Vec2 intersect(const Line2& l1, const Line2& l2) {
    double det = l1.normal.x() * l2.normal.y() - l1.normal.y() * l2.normal.x();
    if (std::abs(det) <= 1e-8) throw std::invalid_argument("intersect: near-parallel lines");
    double x = (-l1.offset * l2.normal.y() + l2.offset * l1.normal.y()) / det;
    double y = (-l2.offset * l1.normal.x() + l1.offset * l2.normal.x()) / det;
    return {x, y};
}

Vec2 project(const CameraIntrinsics& K, const RigidTransform& T, const Vec3& P) {
    Vec3 X = T.apply(P);
    if (X.z() <= 1e-6) throw std::domain_error("project: point at or behind camera");
    double xn = X.x() / X.z();
    double yn = X.y() / X.z();
    if (K.has_distortion()) {
        double r2 = xn * xn + yn * yn;
        double f = 1.0 + K.k1 * r2 + K.k2 * r2 * r2;
        xn *= f;
        yn *= f;
    }
    return {K.fx * xn + K.cx, K.fy * yn + K.cy};
}

Vec3 unproject(const CameraIntrinsics& K, const Vec2& pixel, double depth) {
    double xn = (pixel.x() - K.cx) / K.fx;
    double yn = (pixel.y() - K.cy) / K.fy;
    return {xn * depth, yn * depth, depth};
}

Vec2 undistort(const CameraIntrinsics& K, const Vec2& pixel) {
    if (!K.has_distortion()) return pixel;
    double xd = (pixel.x() - K.cx) / K.fx;
    double yd = (pixel.y() - K.cy) / K.fy;
    double xn = xd, yn = yd;
    for (int i = 0; i < 20; ++i) {
        double r2 = xn * xn + yn * yn;
        double f = 1.0 + K.k1 * r2 + K.k2 * r2 * r2;
        xn = xd / f;
        yn = yd / f;
    }
    return {K.fx * xn + K.cx, K.fy * yn + K.cy};
}

std::pair<double, double> pose_delta(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform d = a.inverse().compose(b);
    double c = (d.rotation.trace() - 1.0) * 0.5;
    c = std::clamp(c, -1.0, 1.0);
    double angle_deg = std::acos(c) * 180.0 / M_PI;
    double trans_mm = (a.translation - b.translation).norm();
    return {angle_deg, trans_mm};
}

}  // namespace cylindertag
