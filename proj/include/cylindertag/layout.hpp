#ifndef CYLINDERTAG_LAYOUT_HPP
#define CYLINDERTAG_LAYOUT_HPP

#include <array>
#include <map>
#include <string>

#include "cylindertag/codec.hpp"
#include "cylindertag/geometry.hpp"
#include "cylindertag/image.hpp"

namespace cylindertag {

/// Long-edge split into first quad edge, gap, second quad edge, as fractions
/// of the unit column height.
struct EdgeLayout {
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
};

struct LayoutParams {
    double gap = 0.18;             // fraction of column height
    double separator = 0.25;       // white band, fraction of column width
    CrCategories categories;
};

/// One column: two quads between a shared left and right long edge, each long
/// edge carrying its own layout. Corner indexing, in flat pattern space with
/// y up: 0-3 first (bottom) quad left-bottom, left-top, right-top,
/// right-bottom; 4-7 second (top) quad likewise.
struct SubregionLayout {
    EdgeLayout left, right;
    std::array<Vec2, 8> corners;  // mm, flat pattern space
};

struct MarkerLayout {
    int id = 0;
    std::vector<SubregionLayout> columns;
    double height = 0.0;  // mm
    double radius = 0.0;  // mm, target cylinder
};

/// Ideal 3D corner positions on the cylinder (axis = y), keyed by
/// (subregion index, corner index 0-7). Units mm.
struct CornerModel {
    int marker_id = 0;
    double radius = 0.0;
    double height = 0.0;
    std::map<std::pair<int, int>, Vec3> points;

    void save(const std::string& path) const;
    static CornerModel load(const std::string& path);
};

/// Solve s1^2 - (1-g)*s1 + g*(cr-1) = 0 for the edge split realizing the
/// category's nominal cross-ratio; delta picks which root comes first
/// (delta=0 -> larger root first). Throws on a negative discriminant.
EdgeLayout solve_edge_layout(CrCategory cat, int delta, double gap,
                             const CrCategories& cats = {});

MarkerLayout layout_marker(const MarkerCode& m, double height_mm, double radius_mm,
                           const LayoutParams& params = {});

/// Flat unrolled printable pattern, black quads on white.
GrayImage render_pattern(const MarkerLayout& layout, double dpi);

/// Pattern color query in flat space (x wraps around the circumference).
bool layout_point_is_black(const MarkerLayout& layout, const Vec2& flat);

/// Map the flat pattern onto the cylinder: (x, y) -> (r sin(x/r), y, r cos(x/r)).
Vec3 wrap_to_cylinder(const Vec2& flat, double radius);
CornerModel ideal_cylinder_model(const MarkerLayout& layout);

}  // namespace cylindertag

#endif
