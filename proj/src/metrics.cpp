#include "cylindertag/metrics.hpp"

#include <Eigen/Geometry>
#include <cmath>

namespace cylindertag {

std::optional<double> mean_corner_error(const MarkerDetection& det, const GroundTruth& gt) {
    double sum = 0;
    int n = 0;
    for (const auto& col : det.columns) {
        for (int c = 0; c < 8; ++c) {
            for (const auto& g : gt.corners) {
                if (g.column != col.column || g.corner != c || !g.visible) continue;
                sum += (col.corners[static_cast<size_t>(c)] - g.uv).norm();
                ++n;
                break;
            }
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

EvalResult precision_recall(const std::vector<std::vector<MarkerDetection>>& detections,
                            const std::vector<GroundTruth>& truths, double corner_gate_px) {
    if (detections.size() != truths.size())
        throw std::invalid_argument("precision_recall: size mismatch");
    EvalResult out;
    int total_dets = 0;
    for (size_t i = 0; i < truths.size(); ++i) {
        bool matched = false;
        for (const auto& det : detections[i]) {
            ++total_dets;
            bool tp = false;
            if (det.id == truths[i].marker_id) {
                auto err = mean_corner_error(det, truths[i]);
                if (err && *err < corner_gate_px) tp = true;
            }
            if (tp && !matched) {
                ++out.counts.tp;
                matched = true;
            } else {
                ++out.counts.fp;
            }
        }
        if (!matched) ++out.counts.fn;
    }
    if (total_dets == 0) {
        out.precision = 1.0;
        out.precision_undefined = true;
    } else {
        out.precision = static_cast<double>(out.counts.tp) /
                        static_cast<double>(out.counts.tp + out.counts.fp);
    }
    int denom = out.counts.tp + out.counts.fn;
    out.recall = denom > 0 ? static_cast<double>(out.counts.tp) / denom : 0.0;
    return out;
}

JitterReport jitter_std(const std::vector<RigidTransform>& poses) {
    if (poses.size() < 2) throw std::invalid_argument("jitter_std: need at least 2 poses");
    const size_t n = poses.size();

    // Chordal mean rotation: SVD projection of the mean rotation matrix.
    Mat3 M = Mat3::Zero();
    for (const auto& p : poses) M += p.rotation;
    M /= static_cast<double>(n);
    Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 R = svd.matrixU() * svd.matrixV().transpose();
    if (R.determinant() < 0) {
        Mat3 D = Mat3::Identity();
        D(2, 2) = -1;
        R = svd.matrixU() * D * svd.matrixV().transpose();
    }

    double rot_ss = 0;
    for (const auto& p : poses) {
        Mat3 dR = R.transpose() * p.rotation;
        double c = std::clamp((dR.trace() - 1.0) / 2.0, -1.0, 1.0);
        double ang = std::acos(c) * 180.0 / M_PI;
        rot_ss += ang * ang;
    }

    Vec3 mean_t = Vec3::Zero();
    for (const auto& p : poses) mean_t += p.translation;
    mean_t /= static_cast<double>(n);
    Vec3 var = Vec3::Zero();
    for (const auto& p : poses) var += (p.translation - mean_t).cwiseAbs2();
    var /= static_cast<double>(n);

    JitterReport rep;
    rep.samples = static_cast<int>(n);
    rep.rotation_std_deg = std::sqrt(rot_ss / static_cast<double>(n));
    rep.translation_std_mm = std::sqrt(var.sum());
    return rep;
}

}  // namespace cylindertag
