#ifndef CYLINDERTAG_SYNTH_HPP
#define CYLINDERTAG_SYNTH_HPP

#include <cstdint>
#include <string>

#include "cylindertag/layout.hpp"

namespace cylindertag {

enum class BackgroundMode { FlatGray, Clutter };

struct SceneConfig {
    RigidTransform pose;            // model (cylinder) -> camera
    CameraIntrinsics intrinsics;
    int width = 1920, height = 1200;
    int supersampling = 4;
    double noise_sigma = 0.0;       // gray levels
    double blur_sigma = 0.0;        // px
    BackgroundMode background = BackgroundMode::FlatGray;
    uint8_t background_gray = 128;
    uint64_t seed = 1;
};

struct GroundTruthCorner {
    int column = 0, corner = 0;
    Vec2 uv = Vec2::Zero();
    bool visible = false;
};

struct GroundTruth {
    int marker_id = 0;
    RigidTransform pose;
    std::vector<GroundTruthCorner> corners;

    /// True iff all eight corners of the column are visible.
    bool column_fully_visible(int column) const;
    int fully_visible_columns(int n_columns) const;

    void save(const std::string& path) const;
    static GroundTruth load(const std::string& path);
};

/// Ray-cast the marker-wrapped cylinder into a pinhole camera with
/// supersampled coverage, then add seeded Gaussian noise and optional blur.
std::pair<GrayImage, GroundTruth> render_scene(const MarkerLayout& layout,
                                               const SceneConfig& cfg);

struct CrNoisePoint {
    double position = 0.0;  // BC midpoint along the line
    double std_dev = 0.0;
};

/// Monte-Carlo cross-ratio noise curve: fix A=0 and D=length, slide a fixed
/// |BC| along the line, perturb all four points with isotropic Gaussian noise.
std::vector<CrNoisePoint> cr_noise_simulation(double length, double bc_width, double sigma,
                                              int trials, int positions = 21,
                                              uint64_t seed = 1);

/// Marker-free procedural images (blobs, checkerboards, stripes, glyph
/// grids, noise fields), deterministic given the seed.
std::vector<GrayImage> negative_corpus(int count, uint64_t seed, int width = 800,
                                       int height = 600);

}  // namespace cylindertag

#endif
