#include "cylindertag/quadfit.hpp"

#include <algorithm>
#include <cmath>

namespace cylindertag {

namespace {

Vec2 to_vec(const PixelCoord& p) { return Vec2(p.x, p.y); }

double polygon_area(const std::array<Vec2, 4>& c) {
    double a = 0;
    for (int i = 0; i < 4; ++i) {
        const Vec2& p = c[static_cast<size_t>(i)];
        const Vec2& q = c[static_cast<size_t>((i + 1) % 4)];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

bool is_convex(const std::array<Vec2, 4>& c) {
    double sign = 0;
    for (int i = 0; i < 4; ++i) {
        Vec2 a = c[static_cast<size_t>((i + 1) % 4)] - c[static_cast<size_t>(i)];
        Vec2 b = c[static_cast<size_t>((i + 2) % 4)] - c[static_cast<size_t>((i + 1) % 4)];
        double cr = a.x() * b.y() - a.y() * b.x();
        if (std::abs(cr) < 1e-12) return false;
        if (sign == 0)
            sign = cr > 0 ? 1 : -1;
        else if ((cr > 0 ? 1 : -1) != sign)
            return false;
    }
    return true;
}

struct Segment {
    int begin = 0, end = 0;  // inclusive index range into the rotated chain
};

}  // namespace

std::optional<QuadCandidate> fit_quad(const BorderChain& chain, const FitThresholds& th) {
    const int n = static_cast<int>(chain.pixels.size());
    if (!chain.closed || n < 16) return std::nullopt;

    // Anchor: from the pixel nearest the chain centroid's closest border
    // point, scan for a locally straight triplet (cost <= T_cost).
    Vec2 centroid = Vec2::Zero();
    for (const auto& p : chain.pixels) centroid += to_vec(p);
    centroid /= n;
    int nearest = 0;
    double best_d = std::numeric_limits<double>::max();
    for (int i = 0; i < n; ++i) {
        double d = (to_vec(chain.pixels[static_cast<size_t>(i)]) - centroid).squaredNorm();
        if (d < best_d) {
            best_d = d;
            nearest = i;
        }
    }
    int start = nearest;
    for (int k = 0; k < n; ++k) {
        int s = (nearest + k) % n;
        Vec2 a = to_vec(chain.pixels[static_cast<size_t>(s)]);
        Vec2 b = to_vec(chain.pixels[static_cast<size_t>((s + 1) % n)]);
        Vec2 c = to_vec(chain.pixels[static_cast<size_t>((s + 2) % n)]);
        double den = (a - c).norm();
        if (den < 1e-9) continue;
        double cost = (a + c - 2.0 * b).norm() / den;
        if (cost <= th.t_cost) {
            start = s;
            break;
        }
    }

    std::vector<Vec2> pts(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        pts[static_cast<size_t>(i)] = to_vec(chain.pixels[static_cast<size_t>((start + i) % n)]);

    // RDP-style splitting of the closed chain. Initial endpoints: the start
    // and the point farthest from it in chain distance.
    std::vector<Segment> work = {{0, n / 2}, {n / 2, n}};  // index n aliases 0
    std::vector<Segment> segments;
    auto point_at = [&](int i) -> const Vec2& { return pts[static_cast<size_t>(i % n)]; };
    while (!work.empty()) {
        Segment seg = work.back();
        work.pop_back();
        const Vec2& a = point_at(seg.begin);
        const Vec2& b = point_at(seg.end);
        int split = -1;
        double max_dev = 0.0;
        if ((b - a).norm() < 1e-9) return std::nullopt;
        Line2 chord = Line2::through(a, b);
        for (int i = seg.begin + 1; i < seg.end; ++i) {
            double d = chord.distance(point_at(i));
            if (d > max_dev) {
                max_dev = d;
                split = i;
            }
        }
        if (max_dev > th.t_line && split > seg.begin && split < seg.end) {
            work.push_back({seg.begin, split});
            work.push_back({split, seg.end});
        } else {
            segments.push_back(seg);
        }
        if (segments.size() + work.size() > 48) return std::nullopt;  // not a quad
    }

    // The two initial breakpoints (indices 0 and n/2) are artificial: they sit
    // mid-edge in general. Merge adjacent segments whose union still fits the
    // chord within T_line; genuine corners never merge.
    std::vector<int> breaks;
    for (const Segment& s : segments) breaks.push_back(s.begin);
    std::sort(breaks.begin(), breaks.end());
    auto span_fits = [&](int lo, int hi) {  // cyclic span, hi may exceed n
        const Vec2& a = point_at(lo);
        const Vec2& b = point_at(hi);
        if ((b - a).norm() < 1e-9) return false;
        Line2 chord = Line2::through(a, b);
        for (int i = lo + 1; i < hi; ++i)
            if (chord.distance(point_at(i)) > th.t_line) return false;
        return true;
    };
    bool merged_any = true;
    while (merged_any && breaks.size() > 2) {
        merged_any = false;
        for (size_t bi = 0; bi < breaks.size(); ++bi) {
            size_t prev = (bi + breaks.size() - 1) % breaks.size();
            size_t next = (bi + 1) % breaks.size();
            int lo = breaks[prev];
            int hi = breaks[next] + (breaks[next] <= lo ? n : 0);
            if (span_fits(lo, hi)) {
                breaks.erase(breaks.begin() + static_cast<long>(bi));
                merged_any = true;
                break;
            }
        }
    }
    if (breaks.size() < 4) return std::nullopt;

    // Sides between consecutive breakpoints. Short fragments are corner
    // arcs or noise spikes: drop them rather than rejecting the region.
    // Then re-merge consecutive sides that are nearly collinear (a mid-edge
    // spike splits one true side into two).
    struct Side {
        std::vector<Vec2> pts;
        Line2 line;
    };
    auto fit_side = [&](std::vector<Vec2> pts) -> std::optional<Side> {
        try {
            Side s;
            s.line = fit_line_tls(pts);
            s.pts = std::move(pts);
            return s;
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
    std::vector<Side> sides;
    for (size_t bi = 0; bi < breaks.size(); ++bi) {
        int lo = breaks[bi];
        int hi = breaks[(bi + 1) % breaks.size()];
        if (hi <= lo) hi += n;
        int len = hi - lo + 1;
        if (len < th.min_segment) continue;
        // Drop one pixel at each end so corner pixels do not drag the line.
        if (len > th.min_segment + 2) {
            ++lo;
            --hi;
        }
        std::vector<Vec2> pts;
        pts.reserve(static_cast<size_t>(hi - lo + 1));
        for (int i = lo; i <= hi; ++i) pts.push_back(point_at(i));
        auto s = fit_side(std::move(pts));
        if (s) sides.push_back(std::move(*s));
    }
    const double collinear_angle = 10.0 * M_PI / 180.0;
    bool joined = true;
    while (joined && sides.size() > 4) {
        joined = false;
        for (size_t si = 0; si < sides.size(); ++si) {
            size_t sj = (si + 1) % sides.size();
            double cosang = std::abs(sides[si].line.direction().dot(sides[sj].line.direction()));
            if (std::acos(std::clamp(cosang, 0.0, 1.0)) > collinear_angle) continue;
            std::vector<Vec2> pts = sides[si].pts;
            pts.insert(pts.end(), sides[sj].pts.begin(), sides[sj].pts.end());
            auto s = fit_side(std::move(pts));
            if (!s) continue;
            // Curved borders split into near-collinear chords; refuse merges
            // whose joint fit is worse than the split tolerance.
            bool fits = true;
            for (const Vec2& p : s->pts)
                if (s->line.distance(p) > th.t_line) {
                    fits = false;
                    break;
                }
            if (!fits) continue;
            sides[si] = std::move(*s);
            sides.erase(sides.begin() + static_cast<long>(sj));
            joined = true;
            break;
        }
    }
    // A wedge tapering to a near-point leaves its tiny fourth edge as a
    // stub a few pixels long; treat such stubs as corner arcs and let the
    // neighboring lines meet instead.
    while (sides.size() > 4) {
        size_t smallest = 0, longest = 0;
        for (size_t si = 1; si < sides.size(); ++si) {
            if (sides[si].pts.size() < sides[smallest].pts.size()) smallest = si;
            if (sides[si].pts.size() > sides[longest].pts.size()) longest = si;
        }
        // Relative cap: a disk splits into chords of equal size, and those
        // must all survive so the side count stays over four.
        if (sides[smallest].pts.size() > 12 ||
            sides[smallest].pts.size() * 6 > sides[longest].pts.size())
            break;
        sides.erase(sides.begin() + static_cast<long>(smallest));
    }
    if (sides.size() != 4) return std::nullopt;

    QuadCandidate quad;
    for (int si = 0; si < 4; ++si) quad.edges[static_cast<size_t>(si)] = sides[static_cast<size_t>(si)].line;
    try {
        for (int i = 0; i < 4; ++i)
            quad.corners[static_cast<size_t>(i)] =
                intersect(quad.edges[static_cast<size_t>(i)], quad.edges[static_cast<size_t>((i + 1) % 4)]);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    // Corner i sits between edges i and i+1; shift so edge i joins corners
    // i and i+1 under the declared convention.
    std::rotate(quad.corners.begin(), quad.corners.begin() + 3, quad.corners.end());

    if (!is_convex(quad.corners)) return std::nullopt;
    if (polygon_area(quad.corners) < 0) {
        std::reverse(quad.corners.begin(), quad.corners.end());
        for (int i = 0; i < 4; ++i)
            quad.edges[static_cast<size_t>(i)] = Line2::through(
                quad.corners[static_cast<size_t>(i)], quad.corners[static_cast<size_t>((i + 1) % 4)]);
    }
    return quad;
}

double rac(const QuadCandidate& q, const Region& region) {
    double area = std::abs(polygon_area(q.corners));
    if (area < 1e-9) throw std::domain_error("rac: zero-area quad");
    return std::abs(area - region.pixel_count) / area;
}

QuadCandidate to_full_resolution(const QuadCandidate& q, int scale) {
    if (scale == 1) return q;
    QuadCandidate out = q;
    double shift = (scale - 1) * 0.5;
    for (auto& c : out.corners) c = scale * c + Vec2(shift, shift);
    for (int i = 0; i < 4; ++i)
        out.edges[static_cast<size_t>(i)] = Line2::through(
            out.corners[static_cast<size_t>(i)], out.corners[static_cast<size_t>((i + 1) % 4)]);
    return out;
}

namespace {

// Central-difference image gradient at a sub-pixel location.
Vec2 gradient(const GrayImage& img, const Vec2& p) {
    double gx = (img.sample(p.x() + 1, p.y()) - img.sample(p.x() - 1, p.y())) * 0.5;
    double gy = (img.sample(p.x(), p.y() + 1) - img.sample(p.x(), p.y() - 1)) * 0.5;
    return {gx, gy};
}

}  // namespace

namespace {

struct EdgeSamples {
    std::vector<Vec2> points;
    std::vector<double> weights;
    std::vector<double> arc;  // distance from the edge's first corner, px
    double len = 0.0;
    Line2 global;  // whole-edge fit (or the prior edge if too few samples)
};

/// Line through the samples lying within `window` px of one end of the edge.
/// Curved borders (circumferential marker edges wrap around the cylinder) make
/// a whole-edge straight fit biased; a short fit near the corner is not.
Line2 local_line(const EdgeSamples& e, bool at_end, double window) {
    double nearest = std::numeric_limits<double>::max();
    for (double a : e.arc) nearest = std::min(nearest, at_end ? e.len - a : a);
    std::vector<Vec2> pts;
    std::vector<double> wts;
    for (size_t i = 0; i < e.points.size(); ++i) {
        double d = at_end ? e.len - e.arc[i] : e.arc[i];
        if (d <= nearest + window) {
            pts.push_back(e.points[i]);
            wts.push_back(e.weights[i]);
        }
    }
    if (pts.size() < 5) return e.global;
    try {
        return fit_line_tls(pts, wts);
    } catch (const std::exception&) {
        return e.global;
    }
}

QuadCandidate refine_edges_once(const QuadCandidate& base, const GrayImage& full,
                                int half_steps) {
    std::array<EdgeSamples, 4> edges;
    const double step = 0.5;

    for (int ei = 0; ei < 4; ++ei) {
        EdgeSamples& es = edges[static_cast<size_t>(ei)];
        es.global = base.edges[static_cast<size_t>(ei)];
        const Vec2& ca = base.corners[static_cast<size_t>(ei)];
        const Vec2& cb = base.corners[static_cast<size_t>((ei + 1) % 4)];
        double len = (cb - ca).norm();
        es.len = len;
        if (len < 2.0) continue;
        Vec2 dir = (cb - ca) / len;
        Vec2 outward(dir.y(), -dir.x());  // positive-area polygon, image coords
        int m = std::max(10, static_cast<int>(len));

        // At a shallow corner the quad tapers to a sliver thinner than the
        // search window, so samples near that end read the opposite edge of
        // the wedge. Skip the stretch where the adjacent edge sits within
        // stepping reach of the sample line.
        const double reach = half_steps * step + 2.0;
        auto exclusion = [&](int corner) {
            int prev = (corner + 3) % 4;
            Vec2 da = (base.corners[static_cast<size_t>((prev + 1) % 4)] -
                       base.corners[static_cast<size_t>(prev)])
                          .normalized();
            Vec2 db = (base.corners[static_cast<size_t>((corner + 1) % 4)] -
                       base.corners[static_cast<size_t>(corner)])
                          .normalized();
            // Only an acute interior angle tapers to a sliver; at an obtuse
            // corner the neighbor edge is nearly collinear and harmless.
            if (da.dot(db) > 0) return 2.0;
            double sin_t = std::abs(da.x() * db.y() - da.y() * db.x());
            double cos_t = std::abs(da.dot(db));
            return std::min((reach * cos_t + 2.0) / std::max(sin_t, 0.05), 0.45 * len);
        };
        const double excl_lo = exclusion(ei);
        const double excl_hi = exclusion((ei + 1) % 4);

        std::vector<Vec2>& points = es.points;
        std::vector<double>& weights = es.weights;
        for (int k = 0; k < m; ++k) {
            double t = (k + 0.5) / m;
            double arc = t * len;
            if (arc < excl_lo || len - arc < excl_hi) continue;
            Vec2 p0 = ca + t * len * dir;
            double best_g = -1.0;
            int best_i = 0;
            std::vector<double> mags(static_cast<size_t>(2 * half_steps + 1), 0.0);
            for (int s = -half_steps; s <= half_steps; ++s) {
                Vec2 p = p0 + s * step * outward;
                double g = gradient(full, p).norm();
                mags[static_cast<size_t>(s + half_steps)] = g;
                if (g > best_g) {
                    best_g = g;
                    best_i = s + half_steps;
                }
            }
            if (best_g < 8.0) continue;
            Vec2 peak_p = p0 + (best_i - half_steps) * step * outward;
            if (gradient(full, peak_p).dot(outward) <= 0.0) continue;  // wrong polarity
            double offset = (best_i - half_steps) * step;
            if (best_i > 0 && best_i < 2 * half_steps) {
                double ym = mags[static_cast<size_t>(best_i - 1)];
                double y0 = mags[static_cast<size_t>(best_i)];
                double yp = mags[static_cast<size_t>(best_i + 1)];
                double denom = ym - 2 * y0 + yp;
                if (std::abs(denom) > 1e-12) {
                    double delta = 0.5 * (ym - yp) / denom;
                    offset += std::clamp(delta, -1.0, 1.0) * step;
                }
            }
            points.push_back(p0 + offset * outward);
            weights.push_back(best_g);
            es.arc.push_back(arc);
        }
        if (points.size() >= 4) {
            try {
                es.global = fit_line_tls(points, weights);
            } catch (const std::exception&) {
                // keep the unrefined edge
            }
        }
    }

    QuadCandidate out = base;
    try {
        for (int i = 0; i < 4; ++i) {
            const EdgeSamples& ea = edges[static_cast<size_t>(i)];
            const EdgeSamples& eb = edges[static_cast<size_t>((i + 1) % 4)];
            // Corner i+1 joins the end of edge i and the start of edge i+1.
            double wa = std::clamp(0.45 * ea.len, 6.0, 30.0);
            double wb = std::clamp(0.45 * eb.len, 6.0, 30.0);
            out.corners[static_cast<size_t>((i + 1) % 4)] =
                intersect(local_line(ea, true, wa), local_line(eb, false, wb));
        }
        for (int i = 0; i < 4; ++i)
            out.edges[static_cast<size_t>(i)] = edges[static_cast<size_t>(i)].global;
    } catch (const std::exception&) {
        return base;  // fall back to the unrefined quad
    }
    return out;
}

}  // namespace

QuadCandidate refine_edges(const QuadCandidate& q, const GrayImage& full, int scale) {
    // Oblique edges meeting a long edge at a shallow angle amplify line error
    // into large corner error, so the initial corners can sit several pixels
    // off. Iterate with a shrinking search window: the first pass recaptures
    // the edge, later passes polish it.
    QuadCandidate cur = to_full_resolution(q, scale);
    static const int windows[] = {8, 4, 3};
    for (int half_steps : windows) {
        QuadCandidate next = refine_edges_once(cur, full, half_steps);
        double shift = 0.0;
        for (int i = 0; i < 4; ++i)
            shift = std::max(shift, (next.corners[static_cast<size_t>(i)] -
                                     cur.corners[static_cast<size_t>(i)])
                                        .norm());
        cur = next;
        if (shift < 0.05) break;
    }
    return cur;
}

}  // namespace cylindertag
