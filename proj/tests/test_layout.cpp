#include "doctest.h"

#include <cstdio>

#include "cylindertag/layout.hpp"

using namespace cylindertag;

TEST_CASE("solve_edge_layout quadratic oracle") {
    EdgeLayout e = solve_edge_layout({3}, 0, 0.18);  // cr = 1.68
    CHECK(e.s1 == doctest::Approx(0.6238).epsilon(1e-3));
    CHECK(e.s2 == doctest::Approx(0.18).epsilon(1e-12));
    CHECK(e.s3 == doctest::Approx(0.1962).epsilon(1e-3));
    CHECK(e.s1 + e.s2 + e.s3 == doctest::Approx(1.0).epsilon(1e-9));
    // Quadratic-formula oracle, then measure the cross-ratio directly.
    CHECK(e.s1 * e.s1 - (1 - 0.18) * e.s1 + 0.18 * (1.68 - 1.0) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cross_ratio(0.0, e.s1, e.s1 + 0.18, 1.0) == doctest::Approx(1.68).epsilon(1e-9));

    EdgeLayout r = solve_edge_layout({3}, 1, 0.18);
    CHECK(r.s1 == doctest::Approx(e.s3).epsilon(1e-9));
    CHECK(r.s3 == doctest::Approx(e.s1).epsilon(1e-9));
}

TEST_CASE("solve_edge_layout infeasible cross-ratio") {
    CrCategories wide;
    wide.nominal = {1.47, 1.54, 1.61, 2.0};
    CHECK_THROWS(solve_edge_layout({3}, 0, 0.18, wide));  // 4*0.18*1.0 > 0.82^2
}

TEST_CASE("solve_edge_layout covers all categories at the default gap") {
    LayoutParams lp;
    for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 2; ++d) {
            EdgeLayout e = solve_edge_layout({c}, d, lp.gap);
            CHECK(e.s1 > 0);
            CHECK(e.s3 > 0);
            CHECK(std::abs(e.s1 - e.s3) >= 0.02 * (e.s1 + e.s3));
            CHECK(cross_ratio(0.0, e.s1, e.s1 + lp.gap, 1.0) ==
                  doctest::Approx(CrCategories{}.nominal[static_cast<size_t>(c)])
                      .epsilon(1e-9));
        }
}

namespace {

MarkerCode sample_marker() {
    // 12 columns spanning varied categories and deltas.
    MarkerCode m;
    m.id = 3;
    for (int i = 0; i < 12; ++i) {
        LineCode left = encode_line(i % 2, {i % 4});
        LineCode right = encode_line((i / 2) % 2, {(i + 1) % 4});
        m.codes.push_back(encode_feature(left, right));
    }
    return m;
}

}  // namespace

TEST_CASE("layout_marker counts and congruence") {
    MarkerCode m = sample_marker();
    MarkerLayout lay = layout_marker(m, 60.0, 25.0);
    CHECK(lay.columns.size() == 12);
    // 24 quads, 96 corners total.
    int corners = 0;
    for (const auto& c : lay.columns) corners += static_cast<int>(c.corners.size());
    CHECK(corners == 96);

    MarkerCode same;
    same.id = 0;
    same.codes.assign(12, encode_feature(encode_line(0, {1}), encode_line(1, {2})));
    MarkerLayout lay2 = layout_marker(same, 60.0, 25.0);
    double pitch = 2 * M_PI * 25.0 / 12.0;
    for (size_t i = 1; i < lay2.columns.size(); ++i)
        for (int k = 0; k < 8; ++k) {
            Vec2 a = lay2.columns[0].corners[static_cast<size_t>(k)];
            Vec2 b = lay2.columns[i].corners[static_cast<size_t>(k)];
            CHECK(b.x() - a.x() == doctest::Approx(pitch * static_cast<double>(i)).epsilon(1e-9));
            CHECK(b.y() == doctest::Approx(a.y()).epsilon(1e-12));
        }
}

TEST_CASE("layout round-trips cross-ratio and delta on every long edge") {
    MarkerCode m = sample_marker();
    MarkerLayout lay = layout_marker(m, 60.0, 25.0);
    CrCategories cats;
    for (size_t col = 0; col < lay.columns.size(); ++col) {
        FeatureCode code = m.codes[col];
        const auto& c = lay.columns[col].corners;
        // Left long edge: corners 0,1 (first quad), 4,5 (second quad).
        double l_cr = cross_ratio(0.0, (c[1] - c[0]).norm(),
                                  (c[4] - c[0]).norm(), (c[5] - c[0]).norm());
        CHECK(l_cr ==
              doctest::Approx(cats.nominal[static_cast<size_t>(line_category(feature_left(code)))])
                  .epsilon(1e-9));
        double r_cr = cross_ratio(0.0, (c[2] - c[3]).norm(),
                                  (c[7] - c[3]).norm(), (c[6] - c[3]).norm());
        CHECK(r_cr ==
              doctest::Approx(cats.nominal[static_cast<size_t>(line_category(feature_right(code)))])
                  .epsilon(1e-9));
        // Delta from spacings.
        auto delta_of = [](double s1, double s3) { return s1 > s3 ? 0 : 1; };
        CHECK(delta_of((c[1] - c[0]).norm(), (c[5] - c[4]).norm()) ==
              line_delta(feature_left(code)));
        CHECK(delta_of((c[2] - c[3]).norm(), (c[6] - c[7]).norm()) ==
              line_delta(feature_right(code)));
    }
}

TEST_CASE("render_pattern width and area fraction") {
    MarkerCode m = sample_marker();
    MarkerLayout lay = layout_marker(m, 60.0, 25.0);
    GrayImage img = render_pattern(lay, 300.0);
    CHECK(img.width == 1855);  // round(2*pi*25 * 300 / 25.4)

    // Black fraction vs analytic quad area fraction.
    double black = 0;
    for (uint8_t v : img.data)
        if (v < 128) black += 1;
    black /= static_cast<double>(img.data.size());
    double area = 0;
    for (const auto& col : lay.columns) {
        const auto& c = col.corners;
        auto quad_area = [&](int a, int b, int cc, int d) {
            double s = 0;
            Vec2 q[4] = {c[static_cast<size_t>(a)], c[static_cast<size_t>(b)],
                         c[static_cast<size_t>(cc)], c[static_cast<size_t>(d)]};
            for (int i = 0; i < 4; ++i)
                s += q[i].x() * q[(i + 1) % 4].y() - q[(i + 1) % 4].x() * q[i].y();
            return std::abs(s) / 2;
        };
        area += quad_area(0, 1, 2, 3) + quad_area(4, 5, 6, 7);
    }
    double frac = area / (2 * M_PI * 25.0 * 60.0);
    CHECK(std::abs(black - frac) < 0.01);
}

TEST_CASE("render_pattern rejects empty layouts") {
    MarkerLayout empty;
    CHECK_THROWS(render_pattern(empty, 300.0));
}

TEST_CASE("wrap_to_cylinder basics") {
    double r = 25.0;
    CHECK((wrap_to_cylinder(Vec2(0, 5), r) - Vec3(0, 5, r)).norm() < 1e-12);
    CHECK((wrap_to_cylinder(Vec2(M_PI * r / 2, 5), r) - Vec3(r, 5, 0)).norm() < 1e-9);
    CHECK((wrap_to_cylinder(Vec2(2 * M_PI * r, 5), r) - wrap_to_cylinder(Vec2(0, 5), r)).norm() <
          1e-9);
}

TEST_CASE("ideal model points lie on the cylinder and round-trip the code") {
    MarkerCode m = sample_marker();
    MarkerLayout lay = layout_marker(m, 60.0, 25.0);
    CornerModel model = ideal_cylinder_model(lay);
    CHECK(model.points.size() == 96);
    for (const auto& [key, p] : model.points) {
        double rad = std::hypot(p.x(), p.z());
        CHECK(std::abs(rad - 25.0) < 1e-9);
    }
    // Long edges are axis-parallel 3D lines: collinear model corners.
    CrCategories cats;
    for (int col = 0; col < 12; ++col) {
        Vec3 c0 = model.points.at({col, 0}), c1 = model.points.at({col, 1});
        Vec3 c4 = model.points.at({col, 4}), c5 = model.points.at({col, 5});
        CHECK(std::abs(c0.x() - c5.x()) < 1e-9);
        CHECK(std::abs(c0.z() - c5.z()) < 1e-9);
        double cr = cross_ratio(c0.y(), c1.y(), c4.y(), c5.y());
        int cat = line_category(feature_left(m.codes[static_cast<size_t>(col)]));
        CHECK(cr == doctest::Approx(cats.nominal[static_cast<size_t>(cat)]).epsilon(1e-9));
    }
}

TEST_CASE("CornerModel file round trip") {
    MarkerCode m = sample_marker();
    CornerModel model = ideal_cylinder_model(layout_marker(m, 60.0, 25.0));
    std::string path = "/tmp/ctag_model_test.txt";
    model.save(path);
    CornerModel back = CornerModel::load(path);
    CHECK(back.marker_id == model.marker_id);
    CHECK(back.points.size() == model.points.size());
    for (const auto& [key, p] : model.points)
        CHECK((back.points.at(key) - p).norm() < 1e-5);
    std::remove(path.c_str());
}
