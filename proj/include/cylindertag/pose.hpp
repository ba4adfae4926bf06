#ifndef CYLINDERTAG_POSE_HPP
#define CYLINDERTAG_POSE_HPP

#include <map>
#include <string>

#include "cylindertag/geometry.hpp"

namespace cylindertag {

enum class ModelProvenance { Ideal, Reconstructed };

/// 3D corner map keyed by (marker id, column, corner index), mm.
struct ObjectModel {
    std::map<std::tuple<int, int, int>, Vec3> points;
    ModelProvenance provenance = ModelProvenance::Ideal;

    void save(const std::string& path) const;
    static ObjectModel load(const std::string& path);
};

struct Correspondence {
    Vec3 model;  // mm
    Vec2 image;  // undistorted pixels
};

using Correspondences = std::vector<Correspondence>;

struct PnpOptions {
    int max_iterations = 50;
    double step_tolerance = 1e-10;
    bool huber = false;
    double huber_delta = 1.0;  // px
};

struct PoseEstimate {
    RigidTransform pose;  // object -> camera
    double rms_px = 0.0;
    std::vector<double> residuals;  // per-point reprojection error (px)
    int iterations = 0;
};

/// DLT initialization + damped Gauss-Newton refinement of the reprojection
/// objective. Requires >= 6 correspondences.
PoseEstimate solve_pnp(const Correspondences& c, const CameraIntrinsics& K,
                       const PnpOptions& opts = {});

/// Jacobian of the projected pixel w.r.t. a left (camera-frame) pose
/// perturbation [rotation; translation] at the current pose.
Eigen::Matrix<double, 2, 6> reprojection_jacobian(const CameraIntrinsics& K,
                                                  const RigidTransform& T, const Vec3& model);

/// Observations of one stereo frame; corner identity keys into the model.
struct StereoObservation {
    int marker = 0, column = 0, corner = 0;
    Vec2 left = Vec2::Zero(), right = Vec2::Zero();
    bool has_left = false, has_right = false;
};

struct StereoFrame {
    std::vector<StereoObservation> observations;
};

struct StereoRig {
    CameraIntrinsics intrinsics;       // shared by both cameras
    RigidTransform left_to_right;      // maps left-camera coords to right-camera coords
};

struct ReconstructionResult {
    ObjectModel model;
    std::vector<RigidTransform> frame_poses;  // model -> left camera, frame 0 = identity gauge
    double rms_px = 0.0;
    int rounds = 0;
};

/// Multi-view model reconstruction: per-frame triangulation, rigid
/// registration into a common frame, then alternating pose/point refinement.
ReconstructionResult reconstruct(const std::vector<StereoFrame>& frames, const StereoRig& rig);

/// Triangulate one point from two views (DLT), coordinates of camera a.
Vec3 triangulate(const CameraIntrinsics& K, const RigidTransform& a_to_b, const Vec2& pa,
                 const Vec2& pb);

}  // namespace cylindertag

#endif
