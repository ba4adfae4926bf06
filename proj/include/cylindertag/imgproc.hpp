#ifndef CYLINDERTAG_IMGPROC_HPP
#define CYLINDERTAG_IMGPROC_HPP

#include <optional>

#include "cylindertag/geometry.hpp"
#include "cylindertag/image.hpp"

namespace cylindertag {

struct ImgprocParams {
    int tile_size = 5;
    int tile_radius = 5;         // extrema neighborhood, in tiles
    int contrast_floor = 10;     // gray levels; flatter neighborhoods -> white
    int min_region_area = 24;    // px
    double max_region_frac = 0.5;  // of image area
};

struct PixelCoord {
    int x = 0, y = 0;
};

struct Region {
    int label = 0;
    int pixel_count = 0;
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    std::vector<PixelCoord> pixels;
    Vec2 centroid = Vec2::Zero();
};

struct BorderChain {
    std::vector<PixelCoord> pixels;  // consecutive entries are 8-neighbors
    bool closed = false;
};

/// 2x2 box-average downsample iff min(width, height) >= 1200; returns the
/// image and the applied scale (1 or 2). A downsampled pixel center maps to
/// full-resolution coordinate scale*x + (scale-1)/2.
std::pair<GrayImage, int> downsample(const GrayImage& img);

/// Tile-based adaptive threshold: per-pixel threshold is (max+min)/2 of the
/// tile-neighborhood extrema; low-contrast neighborhoods go white.
BinaryImage adaptive_threshold(const GrayImage& img, const ImgprocParams& params = {});

/// 3x3 binary opening (erosion then dilation). Removes speckles and one-pixel
/// protrusions along region borders while leaving straight edges in place.
BinaryImage morph_open(const BinaryImage& bin);

/// 8-connected black regions, area-filtered.
std::vector<Region> label_components(const BinaryImage& bin, const ImgprocParams& params = {});

/// Outer border of a region ordered into one closed chain; nullopt when the
/// border is not a single simple closed contour.
std::optional<BorderChain> trace_border(const Region& region);

}  // namespace cylindertag

#endif
