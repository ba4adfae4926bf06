#ifndef CYLINDERTAG_ASSEMBLER_HPP
#define CYLINDERTAG_ASSEMBLER_HPP

#include "cylindertag/codec.hpp"
#include "cylindertag/quadfit.hpp"

namespace cylindertag {

struct PairingCriteria {
    double t_theta_deg = 5.0;
    /// The column gap is 0.18/(1-0.18) ~ 0.22 of sigma_l by construction;
    /// side-by-side quads of adjacent columns fail the axis-alignment gates
    /// long before the gap band matters.
    double alpha_gap = 0.3;
    double alpha_len = 15.0;
    double alpha_s = 0.33;
    /// A candidate pair must already carry a readable line code on both
    /// sides (cross-ratio in band, unambiguous orientation). Side-by-side
    /// neighbor quads are geometrically indistinguishable from a column but
    /// have symmetric, out-of-band spacings, and die here.
    CrCategories categories;
};

struct OrganizeParams {
    double t_theta_deg = 5.0;
    /// Cap on |axis . c_hat| between neighbors. Under strong pitch the column
    /// centers trace a steep ellipse arc, so the cap has to stay loose; the
    /// pitch gate and the axis agreement do the real filtering.
    double t_ver = 0.9;
    /// Center-distance gate in units of the estimated column pitch.
    double pitch_gate = 3.0;
    /// Quad width as a fraction of the column pitch (1 - separator band).
    double quad_width_fraction = 0.75;
};

/// Two quads forming one marker column. Which quad is "first" and which side
/// is "left" is decided per cluster once a reading axis is fixed.
struct FeatureSubregion {
    QuadCandidate quad_a, quad_b;
    Vec2 center = Vec2::Zero();
    Vec2 axis = Vec2::UnitY();  // unit long-edge direction (sign arbitrary)
    double long_sum = 0.0;      // sigma_l
    double short_mean = 0.0;    // mean short-edge length
    double gap = 0.0;           // d_gap
};

struct DecodedColumn {
    int column = 0;
    /// Image corners indexed by the model corner convention (layout module).
    std::array<Vec2, 8> corners;
};

struct MarkerDetection {
    int id = 0;
    ReadDirection direction = ReadDirection::Forward;
    double coverage = 1.0;
    std::vector<DecodedColumn> columns;
    std::vector<FeatureCode> observed_codes;
};

/// One maximal consecutive run of decodable columns within a cluster.
struct CodeRun {
    std::vector<FeatureCode> codes;
    std::vector<size_t> members;    // indices into the cluster
    std::vector<int> column_skips;  // extra columns skipped before entry i (>0 after a gap)
};

std::vector<FeatureSubregion> pair_quads(const std::vector<QuadCandidate>& quads,
                                         const PairingCriteria& pc = {});

/// Union-find clustering of subregions into marker candidates.
std::vector<std::vector<FeatureSubregion>> organize_markers(
    const std::vector<FeatureSubregion>& subs, const OrganizeParams& op = {});

struct ExtractResult {
    std::vector<CodeRun> runs;
    Vec2 axis = Vec2::UnitY();      // canonical (sign-fixed) reading axis
    Vec2 transverse = Vec2::UnitX();
    /// Cluster members sorted along the transverse direction, with the
    /// per-side ordered collinear corners (left c1..c4, right c1..c4).
    std::vector<std::array<Vec2, 8>> ordered_corners;  // L1..L4, R1..R4
    std::vector<size_t> order;      // sorted member indices
    /// Integer column offset of each ordered member relative to the first,
    /// inferred from the center spacings (occlusion gaps count as skips).
    std::vector<int> column_offsets;
    /// Recovered feature code per ordered member, where readable.
    std::vector<std::optional<FeatureCode>> codes;
};

ExtractResult extract_codes(const std::vector<FeatureSubregion>& cluster,
                            const CrCategories& cats = {},
                            double adjacency_split = 1.6,
                            double quad_width_fraction = 0.75);

std::optional<MarkerDetection> decode(const std::vector<FeatureSubregion>& cluster,
                                      const Dictionary& dict,
                                      const CrCategories& cats = {},
                                      double adjacency_split = 1.6,
                                      double quad_width_fraction = 0.75);

}  // namespace cylindertag

#endif
