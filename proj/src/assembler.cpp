#include "cylindertag/assembler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cylindertag {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

/// Undirected angle between two directions, in [0, pi/2].
double line_angle_between(const Vec2& a, const Vec2& b) {
    double c = std::abs(a.normalized().dot(b.normalized()));
    return std::acos(std::clamp(c, 0.0, 1.0));
}

struct QuadAxes {
    Vec2 long_dir;     // unit, sign arbitrary
    Vec2 short_dir;    // unit
    double long_len;   // mean of the two long edges
    double short_len;  // mean of the two short edges
    Vec2 center;
};

/// Split a quad's edges into the pair more parallel to `axis_hint` (long)
/// and the perpendicular pair (short). For a genuine column pair the hint
/// (the center-to-center direction) always runs along the code-carrying
/// edges, even when foreshortening makes the oblique edges the longest.
QuadAxes quad_axes(const QuadCandidate& q, const Vec2& axis_hint) {
    std::array<Vec2, 4> e;
    for (int i = 0; i < 4; ++i)
        e[static_cast<size_t>(i)] =
            q.corners[static_cast<size_t>((i + 1) % 4)] - q.corners[static_cast<size_t>(i)];
    auto pair_score = [&](int i) {
        return std::abs(e[static_cast<size_t>(i)].normalized().dot(axis_hint)) +
               std::abs(e[static_cast<size_t>(i + 2)].normalized().dot(axis_hint));
    };
    int long_first = pair_score(0) >= pair_score(1) ? 0 : 1;
    int short_first = 1 - long_first;
    QuadAxes out;
    Vec2 l0 = e[static_cast<size_t>(long_first)];
    Vec2 l1 = -e[static_cast<size_t>(long_first + 2)];  // align signs (opposite edges run opposite ways)
    out.long_dir = (l0.normalized() + l1.normalized()).normalized();
    out.long_len = 0.5 * (l0.norm() + l1.norm());
    Vec2 s0 = e[static_cast<size_t>(short_first)];
    Vec2 s1 = -e[static_cast<size_t>(short_first + 2)];
    out.short_dir = (s0.normalized() + s1.normalized()).normalized();
    out.short_len = 0.5 * (s0.norm() + s1.norm());
    out.center = 0.25 * (q.corners[0] + q.corners[1] + q.corners[2] + q.corners[3]);
    return out;
}

/// Gap between two quads measured separately on each side of the connecting
/// axis. The internal boundary of a column is oblique in general, so the two
/// quads overlap in their whole-quad axis intervals; the meaningful gap is
/// between the facing ends of the co-linear long edges on the same side.
struct SideGaps {
    double left = 0.0;
    double right = 0.0;
};

SideGaps side_gaps(const QuadCandidate& qi, const QuadCandidate& qj, const Vec2& ci,
                   const Vec2& axis_hint) {
    Vec2 u(-axis_hint.y(), axis_hint.x());
    auto side_intervals = [&](const QuadCandidate& q, double lo[2], double hi[2]) {
        std::array<int, 4> idx = {0, 1, 2, 3};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            return u.dot(q.corners[static_cast<size_t>(a)]) <
                   u.dot(q.corners[static_cast<size_t>(b)]);
        });
        for (int s = 0; s < 2; ++s) {
            double p0 = axis_hint.dot(q.corners[static_cast<size_t>(idx[2 * s])] - ci);
            double p1 = axis_hint.dot(q.corners[static_cast<size_t>(idx[2 * s + 1])] - ci);
            lo[s] = std::min(p0, p1);
            hi[s] = std::max(p0, p1);
        }
    };
    double ilo[2], ihi[2], jlo[2], jhi[2];
    side_intervals(qi, ilo, ihi);
    side_intervals(qj, jlo, jhi);
    // axis_hint points from quad i towards quad j, so j sits after i.
    return SideGaps{jlo[0] - ihi[0], jlo[1] - ihi[1]};
}

/// Scalar positions of four roughly collinear points along their principal
/// direction, then the scalar cross-ratio.
std::optional<double> cross_ratio_loose(const Vec2& c1, const Vec2& c2, const Vec2& c3,
                                        const Vec2& c4) {
    Vec2 dir = c4 - c1;
    double span = dir.norm();
    if (span < 1e-9) return std::nullopt;
    dir /= span;
    double t2 = dir.dot(c2 - c1);
    double t3 = dir.dot(c3 - c1);
    if (std::abs(t2 - t3) < 1e-9) return std::nullopt;
    try {
        return cross_ratio(0.0, t2, t3, span);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

/// Per-cluster view of one subregion under the canonical reading frame.
struct OrientedSub {
    std::array<Vec2, 8> corners;  // L1..L4, R1..R4 ordered along +axis
    std::optional<FeatureCode> code;
};

OrientedSub orient_subregion(const FeatureSubregion& sub, const Vec2& axis, const Vec2& u,
                             const CrCategories& cats) {
    OrientedSub out;
    // Quad A is the one encountered first along +axis.
    const QuadCandidate* qa = &sub.quad_a;
    const QuadCandidate* qb = &sub.quad_b;
    auto center = [](const QuadCandidate& q) {
        return Vec2(0.25 * (q.corners[0] + q.corners[1] + q.corners[2] + q.corners[3]));
    };
    if (axis.dot(center(*qb)) < axis.dot(center(*qa))) std::swap(qa, qb);

    // Classify each quad's corners: left/right by u-projection, then order
    // along +axis within each side.
    auto side_corners = [&](const QuadCandidate& q, std::array<Vec2, 2>& left,
                            std::array<Vec2, 2>& right) {
        std::array<int, 4> idx = {0, 1, 2, 3};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            return u.dot(q.corners[static_cast<size_t>(a)]) < u.dot(q.corners[static_cast<size_t>(b)]);
        });
        auto by_axis = [&](int a, int b) {
            return axis.dot(q.corners[static_cast<size_t>(a)]) < axis.dot(q.corners[static_cast<size_t>(b)]);
        };
        int l0 = idx[0], l1 = idx[1], r0 = idx[2], r1 = idx[3];
        if (!by_axis(l0, l1)) std::swap(l0, l1);
        if (!by_axis(r0, r1)) std::swap(r0, r1);
        left = {q.corners[static_cast<size_t>(l0)], q.corners[static_cast<size_t>(l1)]};
        right = {q.corners[static_cast<size_t>(r0)], q.corners[static_cast<size_t>(r1)]};
    };
    std::array<Vec2, 2> la, ra, lb, rb;
    side_corners(*qa, la, ra);
    side_corners(*qb, lb, rb);
    out.corners = {la[0], la[1], lb[0], lb[1], ra[0], ra[1], rb[0], rb[1]};

    auto cr_l = cross_ratio_loose(la[0], la[1], lb[0], lb[1]);
    auto cr_r = cross_ratio_loose(ra[0], ra[1], rb[0], rb[1]);
    if (!cr_l || !cr_r) return out;
    auto cat_l = classify_cr(*cr_l, cats);
    auto cat_r = classify_cr(*cr_r, cats);
    if (!cat_l || !cat_r) return out;
    auto delta_l = orientation_indicator(la[0], la[1], lb[0], lb[1]);
    auto delta_r = orientation_indicator(ra[0], ra[1], rb[0], rb[1]);
    if (!delta_l || !delta_r) return out;
    out.code = encode_feature(encode_line(*delta_l, *cat_l), encode_line(*delta_r, *cat_r));
    return out;
}

}  // namespace

std::vector<FeatureSubregion> pair_quads(const std::vector<QuadCandidate>& quads,
                                         const PairingCriteria& pc) {
    const double t_theta = pc.t_theta_deg * kDegToRad;
    const size_t n = quads.size();
    std::vector<std::pair<size_t, size_t>> accepted;
    std::vector<FeatureSubregion> built;

    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            Vec2 ci = 0.25 * (quads[i].corners[0] + quads[i].corners[1] +
                              quads[i].corners[2] + quads[i].corners[3]);
            Vec2 cj = 0.25 * (quads[j].corners[0] + quads[j].corners[1] +
                              quads[j].corners[2] + quads[j].corners[3]);
            Vec2 conn = cj - ci;
            double dist = conn.norm();
            if (dist < 1e-9) continue;
            Vec2 axis_hint = conn / dist;

            QuadAxes ai = quad_axes(quads[i], axis_hint);
            QuadAxes aj = quad_axes(quads[j], axis_hint);

            // No agreement gate on the short directions: a mixed column's
            // internal boundary is oblique, so the facing short edges of the
            // two wedges legitimately point wherever the split sends them.
            if (line_angle_between(ai.long_dir, aj.long_dir) > t_theta) continue;
            if (line_angle_between(ai.long_dir, axis_hint) > t_theta) continue;
            if (line_angle_between(aj.long_dir, axis_hint) > t_theta) continue;

            double sigma_l = ai.long_len + aj.long_len;
            double sigma_s = ai.short_len + aj.short_len;
            SideGaps g = side_gaps(quads[i], quads[j], ci, axis_hint);
            if (g.left < 0.0 || g.right < 0.0) continue;  // overlapping along the axis
            double d_gap = std::max(g.left, g.right);
            if (d_gap > pc.alpha_gap * sigma_l) continue;
            if (sigma_l > pc.alpha_len * sigma_s) continue;
            if (std::abs(ai.short_len - aj.short_len) >
                pc.alpha_s * std::min(ai.short_len, aj.short_len))
                continue;

            // Both long-edge codes must be readable for this to be a column.
            FeatureSubregion probe;
            probe.quad_a = quads[i];
            probe.quad_b = quads[j];
            Vec2 la = ai.long_dir;
            Vec2 lb = aj.long_dir.dot(la) >= 0 ? aj.long_dir : Vec2(-aj.long_dir);
            Vec2 axis = (la + lb).normalized();
            if (!orient_subregion(probe, axis, Vec2(-axis.y(), axis.x()), pc.categories).code)
                continue;

            accepted.push_back({i, j});
        }
    }

    // Uniqueness: a quad in more than one passing pair is dropped entirely.
    std::vector<int> uses(n, 0);
    for (auto& [i, j] : accepted) {
        ++uses[i];
        ++uses[j];
    }
    for (auto& [i, j] : accepted) {
        if (uses[i] != 1 || uses[j] != 1) continue;
        Vec2 ci = 0.25 * (quads[i].corners[0] + quads[i].corners[1] +
                          quads[i].corners[2] + quads[i].corners[3]);
        Vec2 cj = 0.25 * (quads[j].corners[0] + quads[j].corners[1] +
                          quads[j].corners[2] + quads[j].corners[3]);
        Vec2 axis_hint = (cj - ci).normalized();
        QuadAxes ai = quad_axes(quads[i], axis_hint);
        QuadAxes aj = quad_axes(quads[j], axis_hint);
        FeatureSubregion sub;
        sub.quad_a = quads[i];
        sub.quad_b = quads[j];
        sub.center = 0.5 * (ci + cj);
        Vec2 la = ai.long_dir;
        Vec2 lb = aj.long_dir.dot(la) >= 0 ? aj.long_dir : Vec2(-aj.long_dir);
        sub.axis = (la + lb).normalized();
        sub.long_sum = ai.long_len + aj.long_len;
        sub.short_mean = 0.5 * (ai.short_len + aj.short_len);
        SideGaps g = side_gaps(quads[i], quads[j], ci, axis_hint);
        sub.gap = std::max(g.left, g.right);
        built.push_back(std::move(sub));
    }
    return built;
}

namespace {

struct UnionFind {
    std::vector<size_t> parent;
    explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), size_t{0}); }
    size_t find(size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(size_t a, size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<std::vector<FeatureSubregion>> organize_markers(
    const std::vector<FeatureSubregion>& subs, const OrganizeParams& op) {
    const double t_theta = op.t_theta_deg * kDegToRad;
    const size_t n = subs.size();
    UnionFind uf(n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            if (line_angle_between(subs[i].axis, subs[j].axis) > t_theta) continue;
            Vec2 conn = subs[j].center - subs[i].center;
            double dist = conn.norm();
            if (dist < 1e-9) continue;
            Vec2 c_hat = conn / dist;
            if (std::abs(subs[i].axis.dot(c_hat)) > op.t_ver) continue;
            if (std::abs(subs[j].axis.dot(c_hat)) > op.t_ver) continue;
            double pitch = 0.5 * (subs[i].short_mean + subs[j].short_mean) / op.quad_width_fraction;
            if (dist > op.pitch_gate * pitch) continue;
            uf.unite(i, j);
        }
    std::vector<std::vector<FeatureSubregion>> clusters;
    std::vector<long> root_to_cluster(n, -1);
    for (size_t i = 0; i < n; ++i) {
        size_t r = uf.find(i);
        if (root_to_cluster[r] < 0) {
            root_to_cluster[r] = static_cast<long>(clusters.size());
            clusters.emplace_back();
        }
        clusters[static_cast<size_t>(root_to_cluster[r])].push_back(subs[i]);
    }
    return clusters;
}

ExtractResult extract_codes(const std::vector<FeatureSubregion>& cluster,
                            const CrCategories& cats, double adjacency_split,
                            double quad_width_fraction) {
    ExtractResult out;
    if (cluster.empty()) return out;

    // Canonical axis: mean long-edge direction with a deterministic sign.
    Vec2 axis = cluster[0].axis;
    for (size_t i = 1; i < cluster.size(); ++i) {
        Vec2 a = cluster[i].axis;
        axis += a.dot(axis) >= 0 ? a : Vec2(-a);
    }
    axis.normalize();
    if (axis.y() < 0 || (axis.y() == 0 && axis.x() < 0)) axis = -axis;
    Vec2 u(-axis.y(), axis.x());  // fixed +90 degree rotation of the axis
    out.axis = axis;
    out.transverse = u;

    // Sort along the transverse (circumferential) direction.
    std::vector<size_t> order(cluster.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return u.dot(cluster[a].center) < u.dot(cluster[b].center);
    });
    out.order = order;

    std::vector<OrientedSub> oriented;
    oriented.reserve(order.size());
    for (size_t k : order) oriented.push_back(orient_subregion(cluster[k], axis, u, cats));
    for (const auto& o : oriented) out.ordered_corners.push_back(o.corners);

    // Column pitch between consecutive centers. A median over the spacings is
    // wrong whenever occlusion gaps outnumber true adjacencies, so anchor on
    // the smallest spacing and average only the spacings close to it
    // (perspective compresses the pitch toward the limbs, hence the slack).
    std::vector<double> pitches;
    for (size_t i = 1; i < order.size(); ++i)
        pitches.push_back(u.dot(cluster[order[i]].center) - u.dot(cluster[order[i - 1]].center));
    double median_pitch = 0.0;
    if (!pitches.empty()) {
        double lo = *std::min_element(pitches.begin(), pitches.end());
        double sum = 0.0;
        int cnt = 0;
        for (double p : pitches)
            if (p <= 1.45 * lo) {
                sum += p;
                ++cnt;
            }
        median_pitch = sum / cnt;
    } else {
        median_pitch = cluster[order[0]].short_mean / quad_width_fraction;
    }

    // Split into maximal consecutive runs: at adjacency gaps and at
    // subregions whose code could not be recovered. Keep the per-member
    // integer column offsets so runs (and stray readable members) stay
    // positioned relative to each other.
    out.column_offsets.assign(oriented.size(), 0);
    out.codes.reserve(oriented.size());
    for (const auto& o : oriented) out.codes.push_back(o.code);
    CodeRun current;
    auto flush = [&]() {
        if (!current.codes.empty()) out.runs.push_back(std::move(current));
        current = CodeRun{};
    };
    for (size_t i = 0; i < oriented.size(); ++i) {
        int skips = 0;
        if (i > 0 && median_pitch > 1e-9) {
            double ratio = pitches[i - 1] / median_pitch;
            if (ratio > adjacency_split) {
                skips = std::max(1, static_cast<int>(std::lround(ratio)) - 1);
                flush();
            }
            out.column_offsets[i] = out.column_offsets[i - 1] + 1 + skips;
        }
        if (!oriented[i].code) {
            flush();
            continue;
        }
        if (current.codes.empty()) skips = 0;
        current.codes.push_back(*oriented[i].code);
        current.members.push_back(i);
        current.column_skips.push_back(skips);
    }
    flush();
    return out;
}

std::optional<MarkerDetection> decode(const std::vector<FeatureSubregion>& cluster,
                                      const Dictionary& dict, const CrCategories& cats,
                                      double adjacency_split, double quad_width_fraction) {
    ExtractResult ex = extract_codes(cluster, cats, adjacency_split, quad_width_fraction);
    const int f = dict.config().field_length;
    const int n = dict.config().columns;

    // Joint alignment: every readable member carries a relative column and a
    // code, including singletons and stretches whose own window is ambiguous.
    // Score each (marker, direction, shift) hypothesis by how many members'
    // observed codes match the marker at the implied column. Per-stretch
    // dictionary windows would throw away cross-stretch evidence: two short
    // stretches that are separately ambiguous often pin the marker uniquely
    // once their relative offset is used.
    auto wrap = [&](int c) { return ((c % n) + n) % n; };
    const MarkerCode* best_mk = nullptr;
    bool best_fwd = true;
    int best_shift = 0, best_score = 0, best_count = 0;
    for (const MarkerCode& cand : dict.markers()) {
        for (int d = 1; d >= 0; --d) {
            for (int shift = 0; shift < n; ++shift) {
                int score = 0;
                for (size_t i = 0; i < ex.codes.size(); ++i) {
                    if (!ex.codes[i]) continue;
                    int col = wrap(d ? shift + ex.column_offsets[i]
                                     : shift - ex.column_offsets[i]);
                    FeatureCode expect = d ? cand.codes[static_cast<size_t>(col)]
                                           : reverse_code(cand.codes[static_cast<size_t>(col)]);
                    if (*ex.codes[i] == expect) ++score;
                }
                if (score > best_score) {
                    best_score = score;
                    best_count = 1;
                    best_mk = &cand;
                    best_fwd = d != 0;
                    best_shift = shift;
                } else if (score == best_score) {
                    ++best_count;
                }
            }
        }
    }
    // A bare field-length match has no redundancy: any single misread column
    // can alias another marker. Demand at least one extra verified column,
    // and a strict winner over every other alignment.
    if (best_score <= f || best_count != 1) return std::nullopt;

    MarkerDetection det;
    det.id = best_mk->id;
    det.direction = best_fwd ? ReadDirection::Forward : ReadDirection::Reverse;
    det.coverage = static_cast<double>(best_score) / n;

    // Model corner index for each oriented corner slot (L1..L4, R1..R4),
    // by reading direction. Forward: +axis is marker-up and "left" is the
    // pattern's left side. Reverse: the view is flipped end-over-end.
    static const int fwd_map[8] = {0, 1, 4, 5, 3, 2, 7, 6};
    static const int rev_map[8] = {6, 7, 2, 3, 5, 4, 1, 0};
    const int* cmap = det.direction == ReadDirection::Forward ? fwd_map : rev_map;

    std::vector<char> col_used(static_cast<size_t>(n), 0);
    for (size_t i = 0; i < ex.codes.size(); ++i) {
        if (!ex.codes[i]) continue;
        int col = wrap(best_fwd ? best_shift + ex.column_offsets[i]
                                : best_shift - ex.column_offsets[i]);
        FeatureCode expect = best_fwd ? best_mk->codes[static_cast<size_t>(col)]
                                      : reverse_code(best_mk->codes[static_cast<size_t>(col)]);
        if (*ex.codes[i] != expect) continue;  // misread member
        if (col_used[static_cast<size_t>(col)]) return std::nullopt;
        col_used[static_cast<size_t>(col)] = 1;
        DecodedColumn dc;
        dc.column = col;
        const auto& oc = ex.ordered_corners[i];
        for (int s = 0; s < 8; ++s)
            dc.corners[static_cast<size_t>(cmap[s])] = oc[static_cast<size_t>(s)];
        det.columns.push_back(dc);
        det.observed_codes.push_back(*ex.codes[i]);
    }

    std::sort(det.columns.begin(), det.columns.end(),
              [](const DecodedColumn& a, const DecodedColumn& b) { return a.column < b.column; });
    return det;
}

}  // namespace cylindertag
