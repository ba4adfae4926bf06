#ifndef CYLINDERTAG_DETECTOR_HPP
#define CYLINDERTAG_DETECTOR_HPP

#include "cylindertag/assembler.hpp"
#include "cylindertag/synth.hpp"

namespace cylindertag {

struct DetectorParams {
    ImgprocParams imgproc;
    FitThresholds fit;
    PairingCriteria pairing;
    OrganizeParams organize;
    CrCategories categories;
    double adjacency_split = 1.6;
    bool refine = true;
};

struct DetectResult {
    std::vector<MarkerDetection> markers;
    std::vector<QuadCandidate> quads;  // full-resolution, post-refinement
    int scale = 1;
};

/// Full detection pipeline: downsample, adaptive threshold, connected
/// components, border tracing, quad fitting, sub-pixel refinement against the
/// full-resolution image, pairing, clustering, decoding. Corners are
/// undistorted when the intrinsics carry distortion.
DetectResult detect(const GrayImage& image, const Dictionary& dict,
                    const DetectorParams& params = {},
                    const CameraIntrinsics* intrinsics = nullptr);

}  // namespace cylindertag

#endif
