#include "doctest.h"

#include <set>
#include <sstream>

#include "cylindertag/codec.hpp"

using namespace cylindertag;

TEST_CASE("classify_cr nominal, edge, and dead-zone cases") {
    CHECK(classify_cr(1.61)->index == 2);
    CHECK(classify_cr(1.70)->index == 3);
    CHECK(!classify_cr(1.505).has_value());
    for (int i = 0; i < 4; ++i) {
        CrCategories cats;
        CHECK(classify_cr(cats.nominal[static_cast<size_t>(i)])->index == i);
    }
}

TEST_CASE("orientation_indicator rule, reversal flip, degeneracy") {
    Vec2 a(0, 0), b(0.45, 0), c(0.63, 0), d(1.0, 0);
    CHECK(*orientation_indicator(a, b, c, d) == 0);
    CHECK(*orientation_indicator(d, c, b, a) == 1);
    CHECK(!orientation_indicator(Vec2(0, 0), Vec2(0.41, 0), Vec2(0.59, 0), Vec2(1.0, 0))
               .has_value());
}

TEST_CASE("encode_line / encode_feature bit layout") {
    CHECK(encode_line(0, {0}) == 0);
    CHECK(encode_line(1, {2}) == 6);
    CHECK(encode_line(1, {3}) == 7);
    CHECK(encode_feature(6, 3) == 51);
    CHECK(encode_feature(0, 0) == 0);
    CHECK(encode_feature(7, 7) == 63);
}

TEST_CASE("encode bijections over the full ranges") {
    std::set<LineCode> lines;
    for (int d = 0; d < 2; ++d)
        for (int c = 0; c < 4; ++c) {
            LineCode lc = encode_line(d, {c});
            CHECK(line_delta(lc) == d);
            CHECK(line_category(lc) == c);
            lines.insert(lc);
        }
    CHECK(lines.size() == 8);

    std::set<FeatureCode> feats;
    for (LineCode l = 0; l < 8; ++l)
        for (LineCode r = 0; r < 8; ++r) {
            FeatureCode fc = encode_feature(l, r);
            CHECK(feature_left(fc) == l);
            CHECK(feature_right(fc) == r);
            feats.insert(fc);
        }
    CHECK(feats.size() == 64);
}

TEST_CASE("reverse_code examples and involution") {
    CHECK(reverse_code(51) == 58);
    CHECK(reverse_code(0) == 36);
    for (int c = 0; c < 64; ++c)
        CHECK(reverse_code(reverse_code(static_cast<FeatureCode>(c))) == c);
}

TEST_CASE("windows of a 4-column marker, f=2") {
    MarkerCode m{0, {10, 20, 30, 40}};
    auto ws = windows(m, 2);
    CHECK(ws.size() == 8);
    auto key2 = [](FeatureCode a, FeatureCode b) {
        FeatureCode arr[2] = {a, b};
        return pack_window(arr, 2);
    };
    auto rev = [](FeatureCode c) { return reverse_code(c); };
    std::set<uint64_t> fwd, bwd;
    for (const auto& [k, e] : ws)
        (e.direction == ReadDirection::Forward ? fwd : bwd).insert(k);
    CHECK(fwd == std::set<uint64_t>{key2(10, 20), key2(20, 30), key2(30, 40), key2(40, 10)});
    CHECK(bwd == std::set<uint64_t>{key2(rev(10), rev(40)), key2(rev(40), rev(30)),
                                    key2(rev(30), rev(20)), key2(rev(20), rev(10))});
}

namespace {

Dictionary small_dict() {
    MarkerConfig cfg{4, 2};
    // Hand-built so all 2n windows are globally unique.
    std::vector<MarkerCode> ms = {
        {0, {1, 2, 3, 5}},
        {7, {10, 11, 13, 14}},
    };
    return Dictionary(cfg, ms);
}

}  // namespace

TEST_CASE("dictionary lookup forward, reverse, absent") {
    Dictionary d = small_dict();
    REQUIRE(d.validate());

    // Forward window of marker 7 starting at column 2: codes 13, 14.
    auto r = d.lookup({13, 14});
    REQUIRE(r.has_value());
    CHECK(r->id == 7);
    CHECK(r->first_col == 2);
    CHECK(r->direction == ReadDirection::Forward);
    CHECK(r->coverage == 2);

    // Reverse reading of marker 0 starting (in the observation) at column 3.
    auto rr = d.lookup({reverse_code(5), reverse_code(3)});
    REQUIRE(rr.has_value());
    CHECK(rr->id == 0);
    CHECK(rr->direction == ReadDirection::Reverse);
    CHECK(rr->first_col == 3);

    CHECK(!d.lookup({60, 61}).has_value());
}

TEST_CASE("dictionary lookup covers longer observations") {
    Dictionary d = small_dict();
    auto r = d.lookup({2, 3, 5, 1});  // forward cyclic run of marker 0 from column 1
    REQUIRE(r.has_value());
    CHECK(r->id == 0);
    CHECK(r->coverage == 4);
    CHECK(r->first_col == 1);
}

TEST_CASE("reverse-read windows decode with flipped direction for all offsets") {
    Dictionary d = small_dict();
    for (const auto& m : d.markers()) {
        const int n = static_cast<int>(m.codes.size());
        for (int start = 0; start < n; ++start) {
            std::vector<FeatureCode> obs;
            for (int k = 0; k < 2; ++k) {
                int col = ((start - k) % n + n) % n;
                obs.push_back(reverse_code(m.codes[static_cast<size_t>(col)]));
            }
            auto r = d.lookup(obs);
            REQUIRE(r.has_value());
            CHECK(r->id == m.id);
            CHECK(r->direction == ReadDirection::Reverse);
            CHECK(r->first_col == start);
        }
    }
}

TEST_CASE("dictionary file round trip is byte-identical") {
    Dictionary d = small_dict();
    std::ostringstream os1;
    d.write(os1);
    std::istringstream is(os1.str());
    Dictionary d2 = Dictionary::read(is);
    std::ostringstream os2;
    d2.write(os2);
    CHECK(os1.str() == os2.str());
    CHECK(os1.str().rfind("cylindertag-dict v1 n=4 f=2", 0) == 0);
}

TEST_CASE("validate rejects colliding windows") {
    MarkerConfig cfg{4, 2};
    std::vector<MarkerCode> ms = {
        {0, {1, 2, 3, 5}},
        {1, {1, 2, 9, 12}},  // shares window (1,2) with marker 0
    };
    Dictionary d(cfg, ms);
    CHECK(!d.validate());
}
