#ifndef CYLINDERTAG_METRICS_HPP
#define CYLINDERTAG_METRICS_HPP

#include "cylindertag/assembler.hpp"
#include "cylindertag/synth.hpp"

namespace cylindertag {

struct EvalCounts {
    int tp = 0, fp = 0, fn = 0;
};

struct EvalResult {
    double precision = 1.0;
    double recall = 0.0;
    EvalCounts counts;
    /// Set when precision is undefined (no detections) and reported as 1.0.
    bool precision_undefined = false;
};

/// Per-image scoring: a detection is a true positive when its id matches the
/// ground truth and the mean error of its corners against the ground-truth
/// projections is below `corner_gate_px`.
EvalResult precision_recall(const std::vector<std::vector<MarkerDetection>>& detections,
                            const std::vector<GroundTruth>& truths,
                            double corner_gate_px = 5.0);

struct JitterReport {
    double rotation_std_deg = 0.0;
    double translation_std_mm = 0.0;
    int samples = 0;
};

/// Pose jitter of a static-scene sequence: rotation STD is the std of the
/// geodesic angles to the chordal-mean rotation; translation STD is the
/// root-sum-square of the per-axis stds. Throws with fewer than 2 poses.
JitterReport jitter_std(const std::vector<RigidTransform>& poses);

/// Mean detected-corner error against visible ground-truth corners, px.
/// nullopt when the detection shares no visible corners with the truth.
std::optional<double> mean_corner_error(const MarkerDetection& det, const GroundTruth& gt);

}  // namespace cylindertag

#endif
