#include "cylindertag/pose.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cylindertag {

void ObjectModel::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "cylindertag-objmodel v1 provenance="
       << (provenance == ModelProvenance::Ideal ? "ideal" : "reconstructed") << " n="
       << points.size() << "\n";
    char buf[128];
    for (const auto& [key, p] : points) {
        auto [marker, column, corner] = key;
        std::snprintf(buf, sizeof(buf), "%d %d %d %.9f %.9f %.9f\n", marker, column, corner,
                      p.x(), p.y(), p.z());
        os << buf;
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

ObjectModel ObjectModel::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty model file: " + path);
    std::istringstream hs(line);
    std::string magic, version, prov_kv, n_kv;
    hs >> magic >> version >> prov_kv >> n_kv;
    if (magic != "cylindertag-objmodel" || version != "v1")
        throw std::runtime_error("bad model header: " + path);
    ObjectModel m;
    if (prov_kv == "provenance=reconstructed") m.provenance = ModelProvenance::Reconstructed;
    else if (prov_kv == "provenance=ideal") m.provenance = ModelProvenance::Ideal;
    else throw std::runtime_error("bad model provenance: " + path);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        int marker, column, corner;
        double x, y, z;
        if (!(ls >> marker >> column >> corner >> x >> y >> z))
            throw std::runtime_error("bad model line: " + line);
        m.points[{marker, column, corner}] = Vec3(x, y, z);
    }
    return m;
}

namespace {

Vec2 normalized_point(const CameraIntrinsics& K, const Vec2& px) {
    return {(px.x() - K.cx) / K.fx, (px.y() - K.cy) / K.fy};
}

/// Direct linear transform estimate of [R|t] from >= 6 correspondences,
/// projected onto the rotation manifold afterwards.
std::optional<RigidTransform> dlt_pose(const Correspondences& c, const CameraIntrinsics& K) {
    const int n = static_cast<int>(c.size());
    Eigen::MatrixXd A(2 * n, 12);
    for (int i = 0; i < n; ++i) {
        Vec2 m = normalized_point(K, c[static_cast<size_t>(i)].image);
        const Vec3& X = c[static_cast<size_t>(i)].model;
        Eigen::RowVector4d Xh(X.x(), X.y(), X.z(), 1.0);
        A.row(2 * i) << Xh, Eigen::RowVector4d::Zero(), -m.x() * Xh;
        A.row(2 * i + 1) << Eigen::RowVector4d::Zero(), Xh, -m.y() * Xh;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
    Eigen::VectorXd v = svd.matrixV().col(11);
    Mat3 M;
    M << v(0), v(1), v(2), v(4), v(5), v(6), v(8), v(9), v(10);
    Vec3 t(v(3), v(7), v(11));
    // Fix the projective scale so that R has unit determinant-scale, and the
    // sign so points land in front of the camera.
    double scale = std::cbrt(std::abs(M.determinant()));
    if (scale < 1e-12) return std::nullopt;
    M /= scale;
    t /= scale;
    if (M.determinant() < 0) {
        M = -M;
        t = -t;
    }
    double depth_sum = 0;
    for (const auto& corr : c) depth_sum += (M * corr.model + t).z();
    if (depth_sum < 0) {
        // The mirrored solution; flipping the sign of v flips both M and t
        // together, which we already normalized away — re-flip t and the
        // improper part via a 180 degree ambiguity is not recoverable here.
        return std::nullopt;
    }
    Eigen::JacobiSVD<Mat3> rsvd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 R = rsvd.matrixU() * rsvd.matrixV().transpose();
    if (R.determinant() < 0) {
        Mat3 D = Mat3::Identity();
        D(2, 2) = -1;
        R = rsvd.matrixU() * D * rsvd.matrixV().transpose();
    }
    return RigidTransform{R, t};
}

/// Pose from a plane-to-image homography. Handles the coplanar point
/// configurations where the 12-parameter DLT is rank-deficient (e.g. the
/// eight corners of a single column, which lie on two parallel 3D lines).
std::optional<RigidTransform> planar_pose(const Correspondences& c, const CameraIntrinsics& K) {
    const int n = static_cast<int>(c.size());
    if (n < 4) return std::nullopt;
    Vec3 centroid = Vec3::Zero();
    for (const auto& corr : c) centroid += corr.model;
    centroid /= n;
    Mat3 cov = Mat3::Zero();
    for (const auto& corr : c) {
        Vec3 d = corr.model - centroid;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    // Basis e1, e2 spans the best-fit plane (largest two eigenvalues).
    Vec3 e1 = eig.eigenvectors().col(2);
    Vec3 e2 = eig.eigenvectors().col(1);

    Eigen::MatrixXd A(2 * n, 9);
    for (int i = 0; i < n; ++i) {
        Vec2 m = normalized_point(K, c[static_cast<size_t>(i)].image);
        Vec3 d = c[static_cast<size_t>(i)].model - centroid;
        Eigen::RowVector3d ph(e1.dot(d), e2.dot(d), 1.0);
        A.row(2 * i) << ph, Eigen::RowVector3d::Zero(), -m.x() * ph;
        A.row(2 * i + 1) << Eigen::RowVector3d::Zero(), ph, -m.y() * ph;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
    Eigen::VectorXd v = svd.matrixV().col(8);
    Mat3 H;
    H << v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7), v(8);
    Vec3 h1 = H.col(0), h2 = H.col(1), h3 = H.col(2);
    double scale = 2.0 / (h1.norm() + h2.norm());
    if (!std::isfinite(scale) || scale < 1e-12) return std::nullopt;
    h1 *= scale;
    h2 *= scale;
    h3 *= scale;
    if (h3.z() < 0) {  // points must sit in front of the camera
        h1 = -h1;
        h2 = -h2;
        h3 = -h3;
    }
    Mat3 M;
    M.col(0) = h1;
    M.col(1) = h2;
    M.col(2) = h1.cross(h2);
    Eigen::JacobiSVD<Mat3> rsvd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 Rp = rsvd.matrixU() * rsvd.matrixV().transpose();
    if (Rp.determinant() < 0) {
        Mat3 D = Mat3::Identity();
        D(2, 2) = -1;
        Rp = rsvd.matrixU() * D * rsvd.matrixV().transpose();
    }
    // Rp maps plane coordinates (a, b, 0) to camera space; compose with the
    // model-to-plane change of basis.
    Mat3 B;
    B.col(0) = e1;
    B.col(1) = e2;
    B.col(2) = e1.cross(e2);
    Mat3 R = Rp * B.transpose();
    Vec3 t = h3 - R * centroid;
    for (const auto& corr : c)
        if ((R * corr.model + t).z() <= 0) return std::nullopt;
    return RigidTransform{R, t};
}

Mat3 skew(const Vec3& w) {
    Mat3 S;
    S << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
    return S;
}

double pose_rms(const Correspondences& c, const CameraIntrinsics& K, const RigidTransform& T,
                std::vector<double>* per_point = nullptr) {
    double ss = 0;
    if (per_point) per_point->clear();
    for (const auto& corr : c) {
        Vec3 X = T.apply(corr.model);
        if (X.z() <= 1e-9) {
            if (per_point) per_point->push_back(1e9);
            ss += 1e18;
            continue;
        }
        Vec2 p(K.fx * X.x() / X.z() + K.cx, K.fy * X.y() / X.z() + K.cy);
        double e = (p - corr.image).norm();
        if (per_point) per_point->push_back(e);
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(c.size()));
}

}  // namespace

Eigen::Matrix<double, 2, 6> reprojection_jacobian(const CameraIntrinsics& K,
                                                  const RigidTransform& T, const Vec3& model) {
    Vec3 X = T.apply(model);
    if (X.z() <= 1e-9) throw std::domain_error("reprojection_jacobian: point behind camera");
    double iz = 1.0 / X.z();
    Eigen::Matrix<double, 2, 3> dpdX;
    dpdX << K.fx * iz, 0, -K.fx * X.x() * iz * iz,
            0, K.fy * iz, -K.fy * X.y() * iz * iz;
    Eigen::Matrix<double, 3, 6> dXdxi;
    dXdxi.leftCols<3>() = -skew(X);
    dXdxi.rightCols<3>() = Mat3::Identity();
    return dpdX * dXdxi;
}

namespace {

/// One damped Gauss-Newton refinement of an object->camera pose against
/// undistorted pixel observations. Left (camera-frame) perturbation:
/// X' = exp(w) (R Xm + t) + dt.
RigidTransform refine_pose(const Correspondences& c, const CameraIntrinsics& K,
                           RigidTransform T, const PnpOptions& opts, int* iters_out) {
    double lambda = 1e-3;
    double prev_cost = -1.0;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        Eigen::Matrix<double, 6, 6> H = Eigen::Matrix<double, 6, 6>::Zero();
        Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
        double cost = 0;
        bool ok = true;
        for (const auto& corr : c) {
            Vec3 X = T.apply(corr.model);
            if (X.z() <= 1e-9) {
                ok = false;
                break;
            }
            double iz = 1.0 / X.z();
            Vec2 p(K.fx * X.x() * iz + K.cx, K.fy * X.y() * iz + K.cy);
            Vec2 r = p - corr.image;
            Eigen::Matrix<double, 2, 6> J = reprojection_jacobian(K, T, corr.model);
            double w = 1.0;
            if (opts.huber) {
                double e = r.norm();
                if (e > opts.huber_delta) w = opts.huber_delta / e;
            }
            H += w * J.transpose() * J;
            g += w * J.transpose() * r;
            cost += w * r.squaredNorm();
        }
        if (!ok) break;
        if (prev_cost >= 0 && cost > prev_cost) lambda *= 10;
        else lambda = std::max(lambda * 0.5, 1e-9);
        prev_cost = cost;
        Eigen::Matrix<double, 6, 6> Hd = H;
        Hd.diagonal() += lambda * H.diagonal();
        Eigen::Matrix<double, 6, 1> dx = Hd.ldlt().solve(-g);
        if (!dx.allFinite()) break;
        Vec3 w_ = dx.head<3>(), dt = dx.tail<3>();
        double angle = w_.norm();
        Mat3 dR = angle < 1e-14
                      ? Mat3::Identity()
                      : Eigen::AngleAxisd(angle, w_ / angle).toRotationMatrix();
        RigidTransform cand{dR * T.rotation, dR * T.translation + dt};
        if (pose_rms(c, K, cand) <= pose_rms(c, K, T)) T = cand;
        if (dx.norm() < opts.step_tolerance) {
            ++it;
            break;
        }
    }
    if (iters_out) *iters_out = it;
    return T;
}

}  // namespace

PoseEstimate solve_pnp(const Correspondences& c, const CameraIntrinsics& K,
                       const PnpOptions& opts) {
    if (c.size() < 6) throw std::invalid_argument("solve_pnp: need at least 6 correspondences");
    std::optional<PoseEstimate> best;
    for (auto& init : {dlt_pose(c, K), planar_pose(c, K)}) {
        if (!init) continue;
        PoseEstimate est;
        est.pose = refine_pose(c, K, *init, opts, &est.iterations);
        est.rms_px = pose_rms(c, K, est.pose, &est.residuals);
        if (!best || est.rms_px < best->rms_px) best = est;
    }
    if (!best) throw std::runtime_error("solve_pnp: degenerate initialization");
    return *best;
}

Vec3 triangulate(const CameraIntrinsics& K, const RigidTransform& a_to_b, const Vec2& pa,
                 const Vec2& pb) {
    Vec2 ma = normalized_point(K, pa);
    Vec2 mb = normalized_point(K, pb);
    // DLT on the two normalized projections: rows of [I|0] and [R|t].
    Eigen::Matrix<double, 4, 4> A;
    A.row(0) << 1, 0, -ma.x(), 0;
    A.row(1) << 0, 1, -ma.y(), 0;
    Eigen::Matrix<double, 3, 4> Pb;
    Pb.leftCols<3>() = a_to_b.rotation;
    Pb.col(3) = a_to_b.translation;
    A.row(2) = Pb.row(0) - mb.x() * Pb.row(2);
    A.row(3) = Pb.row(1) - mb.y() * Pb.row(2);
    Eigen::JacobiSVD<Eigen::Matrix<double, 4, 4>> svd(A, Eigen::ComputeFullV);
    Eigen::Vector4d Xh = svd.matrixV().col(3);
    if (std::abs(Xh(3)) < 1e-14) throw std::runtime_error("triangulate: point at infinity");
    return Xh.head<3>() / Xh(3);
}

namespace {

using PointKey = std::tuple<int, int, int>;

/// Per-frame triangulated cloud (left-camera coordinates).
std::map<PointKey, Vec3> triangulate_frame(const StereoFrame& f, const StereoRig& rig) {
    std::map<PointKey, Vec3> cloud;
    for (const auto& ob : f.observations) {
        if (!ob.has_left || !ob.has_right) continue;
        Vec3 X = triangulate(rig.intrinsics, rig.left_to_right, ob.left, ob.right);
        if (X.z() > 0) cloud[{ob.marker, ob.column, ob.corner}] = X;
    }
    return cloud;
}

/// Rigid transform mapping `src` onto `dst` over the shared keys (Umeyama
/// without scale); nullopt with fewer than 3 shared points.
std::optional<RigidTransform> register_clouds(const std::map<PointKey, Vec3>& src,
                                              const std::map<PointKey, Vec3>& dst) {
    std::vector<std::pair<Vec3, Vec3>> pairs;
    for (const auto& [k, p] : src) {
        auto it = dst.find(k);
        if (it != dst.end()) pairs.push_back({p, it->second});
    }
    if (pairs.size() < 3) return std::nullopt;
    Eigen::Matrix3Xd S(3, pairs.size()), D(3, pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        S.col(static_cast<long>(i)) = pairs[i].first;
        D.col(static_cast<long>(i)) = pairs[i].second;
    }
    Eigen::Matrix4d T = Eigen::umeyama(S, D, false);
    return RigidTransform{T.topLeftCorner<3, 3>(), T.topRightCorner<3, 1>()};
}

}  // namespace

ReconstructionResult reconstruct(const std::vector<StereoFrame>& frames, const StereoRig& rig) {
    if (frames.size() < 2)
        throw std::invalid_argument("reconstruct: need at least 2 stereo frames");
    const size_t nf = frames.size();

    std::vector<std::map<PointKey, Vec3>> clouds(nf);
    for (size_t i = 0; i < nf; ++i) clouds[i] = triangulate_frame(frames[i], rig);
    if (clouds[0].size() < 3) throw std::runtime_error("reconstruct: frame 0 too sparse");

    // Gauge: the model frame is frame 0's left camera; frame-to-model poses
    // chain through registration against the running model.
    ReconstructionResult out;
    out.frame_poses.assign(nf, RigidTransform{});
    std::map<PointKey, Vec3> model_sum = clouds[0];
    std::map<PointKey, int> model_cnt;
    for (const auto& [k, p] : clouds[0]) model_cnt[k] = 1;
    auto model_mean = [&]() {
        std::map<PointKey, Vec3> m;
        for (const auto& [k, s] : model_sum) m[k] = s / model_cnt.at(k);
        return m;
    };
    std::vector<char> registered(nf, 0);
    registered[0] = 1;
    for (size_t i = 1; i < nf; ++i) {
        auto T = register_clouds(clouds[i], model_mean());
        if (!T) continue;  // no overlap with the model yet; dropped from averaging
        registered[i] = 1;
        out.frame_poses[i] = T->inverse();  // model -> camera i
        for (const auto& [k, p] : clouds[i]) {
            Vec3 pm = T->apply(p);
            auto it = model_sum.find(k);
            if (it == model_sum.end()) {
                model_sum[k] = pm;
                model_cnt[k] = 1;
            } else {
                it->second += pm;
                ++model_cnt[k];
            }
        }
    }
    std::map<PointKey, Vec3> model = model_mean();

    // Alternating refinement: re-estimate every frame pose against the model
    // by stereo PnP, then re-average the points from all registered frames.
    auto frame_rms = [&](double* rms_out) {
        double ss = 0;
        size_t cnt = 0;
        for (size_t i = 0; i < nf; ++i) {
            if (!registered[i]) continue;
            RigidTransform TL = out.frame_poses[i];
            RigidTransform TR = rig.left_to_right.compose(TL);
            for (const auto& ob : frames[i].observations) {
                auto it = model.find({ob.marker, ob.column, ob.corner});
                if (it == model.end()) continue;
                if (ob.has_left) {
                    Vec2 p = project(rig.intrinsics, TL, it->second);
                    ss += (p - ob.left).squaredNorm();
                    ++cnt;
                }
                if (ob.has_right) {
                    Vec2 p = project(rig.intrinsics, TR, it->second);
                    ss += (p - ob.right).squaredNorm();
                    ++cnt;
                }
            }
        }
        if (rms_out) *rms_out = cnt ? std::sqrt(ss / static_cast<double>(cnt)) : 0.0;
    };

    double prev_rms = 1e30;
    int round = 0;
    for (; round < 100; ++round) {
        // Pose step: both cameras of each frame contribute correspondences.
        for (size_t i = 0; i < nf; ++i) {
            if (!registered[i]) continue;
            Correspondences cs;
            for (const auto& ob : frames[i].observations) {
                auto it = model.find({ob.marker, ob.column, ob.corner});
                if (it == model.end()) continue;
                if (ob.has_left) cs.push_back({it->second, ob.left});
                // Right-camera observations are folded in by mapping the model
                // point through the rig during the point step instead; the
                // pose step uses the left camera (the pose being estimated).
            }
            if (cs.size() < 6) continue;
            try {
                PnpOptions po;
                po.max_iterations = 10;
                PoseEstimate pe = solve_pnp(cs, rig.intrinsics, po);
                out.frame_poses[i] = pe.pose;
            } catch (const std::exception&) {
                // keep the previous pose
            }
        }
        if (!registered[0]) break;
        // Re-fix the gauge at frame 0.
        RigidTransform g = out.frame_poses[0];
        for (size_t i = 0; i < nf; ++i)
            if (registered[i]) out.frame_poses[i] = out.frame_poses[i].compose(g.inverse());
        for (auto& [k, p] : model) p = g.apply(p);

        // Point step: average each point's per-frame triangulations mapped
        // into the model frame.
        std::map<PointKey, Vec3> sum;
        std::map<PointKey, int> cnt;
        for (size_t i = 0; i < nf; ++i) {
            if (!registered[i]) continue;
            RigidTransform cam_to_model = out.frame_poses[i].inverse();
            for (const auto& [k, p] : clouds[i]) {
                Vec3 pm = cam_to_model.apply(p);
                auto it = sum.find(k);
                if (it == sum.end()) {
                    sum[k] = pm;
                    cnt[k] = 1;
                } else {
                    it->second += pm;
                    ++cnt[k];
                }
            }
        }
        for (auto& [k, s] : sum) model[k] = s / cnt.at(k);

        double rms = 0;
        frame_rms(&rms);
        if (std::abs(prev_rms - rms) < 1e-8) {
            prev_rms = rms;
            ++round;
            break;
        }
        prev_rms = rms;
    }

    out.rounds = round;
    frame_rms(&out.rms_px);
    out.model.points = std::move(model);
    out.model.provenance = ModelProvenance::Reconstructed;
    return out;
}

}  // namespace cylindertag
