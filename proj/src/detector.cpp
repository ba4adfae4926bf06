#include "cylindertag/detector.hpp"

namespace cylindertag {

DetectResult detect(const GrayImage& image, const Dictionary& dict,
                    const DetectorParams& params, const CameraIntrinsics* intrinsics) {
    DetectResult out;
    auto [small, scale] = downsample(image);
    out.scale = scale;

    BinaryImage bin = morph_open(adaptive_threshold(small, params.imgproc));
    std::vector<Region> regions = label_components(bin, params.imgproc);

    std::vector<QuadCandidate> quads;
    for (size_t ri = 0; ri < regions.size(); ++ri) {
        auto chain = trace_border(regions[ri]);
        if (!chain) continue;
        auto quad = fit_quad(*chain, params.fit);
        if (!quad) continue;
        quad->region_index = static_cast<int>(ri);
        try {
            quad->rac = rac(*quad, regions[ri]);
        } catch (const std::exception&) {
            continue;
        }
        if (quad->rac > params.fit.t_rac) continue;
        QuadCandidate full = params.refine ? refine_edges(*quad, image, scale)
                                           : to_full_resolution(*quad, scale);
        full.rac = quad->rac;
        full.region_index = quad->region_index;
        if (intrinsics && intrinsics->has_distortion())
            for (auto& c : full.corners) c = undistort(*intrinsics, c);
        quads.push_back(full);
    }
    out.quads = quads;

    std::vector<FeatureSubregion> subs = pair_quads(quads, params.pairing);
    auto clusters = organize_markers(subs, params.organize);
    for (const auto& cluster : clusters) {
        auto det = decode(cluster, dict, params.categories, params.adjacency_split,
                          params.organize.quad_width_fraction);
        if (det) out.markers.push_back(*det);
    }
    return out;
}

}  // namespace cylindertag
