#ifndef CYLINDERTAG_QUADFIT_HPP
#define CYLINDERTAG_QUADFIT_HPP

#include <array>
#include <optional>

#include "cylindertag/imgproc.hpp"

namespace cylindertag {

struct FitThresholds {
    double t_cost = 1.05;
    double t_line = 1.8;   // px
    double t_rac = 0.3;
    int min_segment = 5;   // px
};

struct QuadCandidate {
    std::array<Vec2, 4> corners;   // counter-clockwise, sub-pixel
    std::array<Line2, 4> edges;    // edge i joins corner i to corner (i+1)%4
    int region_index = -1;
    double rac = 0.0;
};

/// Extended RDP: split a closed border chain into exactly four straight
/// segments, refit each by total least squares and intersect them.
std::optional<QuadCandidate> fit_quad(const BorderChain& chain, const FitThresholds& th = {});

/// Regional Area Coverage: |polygon area - region pixel count| / polygon area.
double rac(const QuadCandidate& q, const Region& region);

/// Gradient-based double-weighted sub-pixel edge refinement against the
/// full-resolution image. `scale` maps quad coordinates to full resolution.
QuadCandidate refine_edges(const QuadCandidate& q, const GrayImage& full, int scale);

/// Scaled copy of a quad mapped into full-resolution coordinates.
QuadCandidate to_full_resolution(const QuadCandidate& q, int scale);

}  // namespace cylindertag

#endif
