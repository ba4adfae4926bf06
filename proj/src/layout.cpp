#include "cylindertag/layout.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace cylindertag {

EdgeLayout solve_edge_layout(CrCategory cat, int delta, double gap,
                             const CrCategories& cats) {
    if (!(gap > 0.0 && gap <= 0.3))
        throw std::invalid_argument("solve_edge_layout: gap out of (0, 0.3]");
    double cr = cats.nominal.at(static_cast<size_t>(cat.index));
    double disc = (1.0 - gap) * (1.0 - gap) - 4.0 * gap * (cr - 1.0);
    if (disc <= 0.0)
        throw std::domain_error("solve_edge_layout: cross-ratio infeasible for this gap");
    double root_hi = ((1.0 - gap) + std::sqrt(disc)) * 0.5;
    double root_lo = ((1.0 - gap) - std::sqrt(disc)) * 0.5;
    double s1 = delta == 0 ? root_hi : root_lo;
    double s3 = 1.0 - gap - s1;
    if (std::abs(s1 - s3) < 0.02 * (s1 + s3))
        throw std::domain_error("solve_edge_layout: degenerate edge split");
    return {s1, gap, s3};
}

MarkerLayout layout_marker(const MarkerCode& m, double height_mm, double radius_mm,
                           const LayoutParams& params) {
    if (m.codes.empty()) throw std::invalid_argument("layout_marker: empty marker code");
    const int n = static_cast<int>(m.codes.size());
    const double circumference = 2.0 * M_PI * radius_mm;
    const double col_width = circumference / n;
    const double quad_width = (1.0 - params.separator) * col_width;
    const double h = height_mm;

    MarkerLayout out;
    out.id = m.id;
    out.height = height_mm;
    out.radius = radius_mm;
    out.columns.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        FeatureCode code = m.codes[static_cast<size_t>(k)];
        LineCode lc = feature_left(code);
        LineCode rc = feature_right(code);
        SubregionLayout sub;
        sub.left = solve_edge_layout(CrCategory{line_category(lc)}, line_delta(lc),
                                     params.gap, params.categories);
        sub.right = solve_edge_layout(CrCategory{line_category(rc)}, line_delta(rc),
                                      params.gap, params.categories);
        double x_left = k * col_width + 0.5 * (col_width - quad_width);
        double x_right = x_left + quad_width;
        double g = params.gap;
        sub.corners = {
            Vec2(x_left, 0.0),
            Vec2(x_left, sub.left.s1 * h),
            Vec2(x_right, sub.right.s1 * h),
            Vec2(x_right, 0.0),
            Vec2(x_left, (sub.left.s1 + g) * h),
            Vec2(x_left, h),
            Vec2(x_right, h),
            Vec2(x_right, (sub.right.s1 + g) * h),
        };
        out.columns.push_back(sub);
    }
    return out;
}

namespace {

bool inside_quad(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto cross = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
    double s0 = cross(b - a, p - a);
    double s1 = cross(c - b, p - b);
    double s2 = cross(d - c, p - c);
    double s3 = cross(a - d, p - d);
    bool all_pos = s0 >= 0 && s1 >= 0 && s2 >= 0 && s3 >= 0;
    bool all_neg = s0 <= 0 && s1 <= 0 && s2 <= 0 && s3 <= 0;
    return all_pos || all_neg;
}

}  // namespace

bool layout_point_is_black(const MarkerLayout& layout, const Vec2& flat) {
    if (flat.y() < 0.0 || flat.y() > layout.height) return false;
    const int n = static_cast<int>(layout.columns.size());
    const double circumference = 2.0 * M_PI * layout.radius;
    double x = std::fmod(flat.x(), circumference);
    if (x < 0) x += circumference;
    int col = std::min(static_cast<int>(x / (circumference / n)), n - 1);
    const auto& c = layout.columns[static_cast<size_t>(col)].corners;
    Vec2 p(x, flat.y());
    return inside_quad(p, c[0], c[1], c[2], c[3]) || inside_quad(p, c[4], c[5], c[6], c[7]);
}

GrayImage render_pattern(const MarkerLayout& layout, double dpi) {
    if (!(dpi >= 72.0 && dpi <= 1200.0)) throw std::invalid_argument("render_pattern: dpi out of [72, 1200]");
    if (layout.columns.empty() || layout.height <= 0.0 || layout.radius <= 0.0)
        throw std::invalid_argument("render_pattern: zero-size layout");
    const double mm_per_px = 25.4 / dpi;
    const double circumference = 2.0 * M_PI * layout.radius;
    int width = static_cast<int>(std::lround(circumference / mm_per_px));
    int height = static_cast<int>(std::lround(layout.height / mm_per_px));
    GrayImage img(width, height, 255);
    // 2x2 supersampled coverage per pixel; majority black wins.
    static const double off[2] = {0.25, 0.75};
    for (int j = 0; j < height; ++j) {
        double y_top = layout.height - j * mm_per_px;
        for (int i = 0; i < width; ++i) {
            int black = 0;
            for (double ox : off)
                for (double oy : off) {
                    Vec2 flat((i + ox) * mm_per_px, y_top - oy * mm_per_px);
                    if (layout_point_is_black(layout, flat)) ++black;
                }
            if (black >= 2) img.at(i, j) = 0;
        }
    }
    return img;
}

Vec3 wrap_to_cylinder(const Vec2& flat, double radius) {
    double angle = flat.x() / radius;
    return {radius * std::sin(angle), flat.y(), radius * std::cos(angle)};
}

CornerModel ideal_cylinder_model(const MarkerLayout& layout) {
    CornerModel model;
    model.marker_id = layout.id;
    model.radius = layout.radius;
    model.height = layout.height;
    for (size_t s = 0; s < layout.columns.size(); ++s)
        for (int c = 0; c < 8; ++c)
            model.points[{static_cast<int>(s), c}] =
                wrap_to_cylinder(layout.columns[s].corners[static_cast<size_t>(c)], layout.radius);
    return model;
}

void CornerModel::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("CornerModel::save: cannot open " + path);
    os << "cylindertag-model v1 marker=" << marker_id << " r=" << radius << " h=" << height << "\n";
    char buf[160];
    for (const auto& [key, p] : points) {
        std::snprintf(buf, sizeof(buf), "%d %d %.6f %.6f %.6f\n", key.first, key.second,
                      p.x(), p.y(), p.z());
        os << buf;
    }
}

CornerModel CornerModel::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("CornerModel::load: cannot open " + path);
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("CornerModel::load: empty file");
    std::istringstream hs(header);
    std::string magic, version, mtok, rtok, htok;
    hs >> magic >> version >> mtok >> rtok >> htok;
    if (magic != "cylindertag-model" || version != "v1" || mtok.rfind("marker=", 0) != 0 ||
        rtok.rfind("r=", 0) != 0 || htok.rfind("h=", 0) != 0)
        throw std::runtime_error("CornerModel::load: bad header: " + header);
    CornerModel model;
    model.marker_id = std::stoi(mtok.substr(7));
    model.radius = std::stod(rtok.substr(2));
    model.height = std::stod(htok.substr(2));
    int s, c;
    double x, y, z;
    while (is >> s >> c >> x >> y >> z) model.points[{s, c}] = Vec3(x, y, z);
    return model;
}

}  // namespace cylindertag
