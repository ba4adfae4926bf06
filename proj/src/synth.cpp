#include "cylindertag/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace cylindertag {

bool GroundTruth::column_fully_visible(int column) const {
    int seen = 0;
    for (const auto& c : corners)
        if (c.column == column) {
            if (!c.visible) return false;
            ++seen;
        }
    return seen == 8;
}

int GroundTruth::fully_visible_columns(int n_columns) const {
    int n = 0;
    for (int c = 0; c < n_columns; ++c)
        if (column_fully_visible(c)) ++n;
    return n;
}

void GroundTruth::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    Eigen::Quaterniond q(pose.rotation);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "cylindertag-gt v1 marker=%d pose=%.9f %.9f %.9f %.9f %.9f %.9f %.9f\n",
                  marker_id, q.w(), q.x(), q.y(), q.z(), pose.translation.x(),
                  pose.translation.y(), pose.translation.z());
    os << buf;
    for (const auto& c : corners) {
        std::snprintf(buf, sizeof(buf), "%d %d %.6f %.6f %d\n", c.column, c.corner, c.uv.x(),
                      c.uv.y(), c.visible ? 1 : 0);
        os << buf;
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

GroundTruth GroundTruth::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty ground truth: " + path);
    GroundTruth gt;
    {
        std::istringstream hs(line);
        std::string magic, version, kv;
        hs >> magic >> version >> kv;
        if (magic != "cylindertag-gt" || version != "v1" || kv.rfind("marker=", 0) != 0)
            throw std::runtime_error("bad ground-truth header: " + path);
        gt.marker_id = std::stoi(kv.substr(7));
        hs >> kv;  // "pose=qw"
        if (kv.rfind("pose=", 0) != 0) throw std::runtime_error("bad ground-truth header: " + path);
        double qw = std::stod(kv.substr(5)), qx, qy, qz, tx, ty, tz;
        hs >> qx >> qy >> qz >> tx >> ty >> tz;
        Eigen::Quaterniond q(qw, qx, qy, qz);
        gt.pose.rotation = q.normalized().toRotationMatrix();
        gt.pose.translation = Vec3(tx, ty, tz);
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        GroundTruthCorner c;
        int vis;
        if (!(ls >> c.column >> c.corner >> c.uv.x() >> c.uv.y() >> vis))
            throw std::runtime_error("bad ground-truth line: " + line);
        c.visible = vis != 0;
        gt.corners.push_back(c);
    }
    return gt;
}

namespace {

struct CylinderHit {
    double t = 0.0;
    bool lateral = true;  // false: one of the end caps
};

/// Ray/solid-cylinder intersection in model coordinates (axis = y,
/// y in [0, h]), including the end caps: seen slightly from above, the cap
/// occludes the far side of the wall, exactly as a real capped part would.
std::optional<CylinderHit> hit_cylinder(const Vec3& o, const Vec3& d, double r, double h) {
    std::optional<CylinderHit> best;
    auto consider = [&](double t, bool lateral) {
        if (t > 1e-9 && (!best || t < best->t)) best = CylinderHit{t, lateral};
    };
    double a = d.x() * d.x() + d.z() * d.z();
    double b = 2.0 * (o.x() * d.x() + o.z() * d.z());
    double c = o.x() * o.x() + o.z() * o.z() - r * r;
    if (a > 1e-18) {
        double disc = b * b - 4 * a * c;
        if (disc >= 0) {
            double sq = std::sqrt(disc);
            for (double t : {(-b - sq) / (2 * a), (-b + sq) / (2 * a)}) {
                double y = o.y() + t * d.y();
                if (y >= 0.0 && y <= h) consider(t, true);
            }
        }
    }
    if (std::abs(d.y()) > 1e-18) {
        for (double plane : {0.0, h}) {
            double t = (plane - o.y()) / d.y();
            Vec3 p = o + t * d;
            if (p.x() * p.x() + p.z() * p.z() <= r * r) consider(t, false);
        }
    }
    return best;
}

void gaussian_blur(GrayImage& img, double sigma) {
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(static_cast<size_t>(2 * radius + 1));
    double sum = 0;
    for (int i = -radius; i <= radius; ++i) {
        k[static_cast<size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[static_cast<size_t>(i + radius)];
    }
    for (auto& v : k) v /= sum;
    GrayImage tmp(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[static_cast<size_t>(i + radius)] *
                       img.at(std::clamp(x + i, 0, img.width - 1), y);
            tmp.at(x, y) = static_cast<uint8_t>(std::lround(std::clamp(acc, 0.0, 255.0)));
        }
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[static_cast<size_t>(i + radius)] *
                       tmp.at(x, std::clamp(y + i, 0, img.height - 1));
            img.at(x, y) = static_cast<uint8_t>(std::lround(std::clamp(acc, 0.0, 255.0)));
        }
}

void fill_clutter(GrayImage& img, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> gray(60, 200);
    std::uniform_int_distribution<int> px(0, img.width - 1), py(0, img.height - 1);
    std::uniform_int_distribution<int> rad(8, 60);
    for (auto& v : img.data) v = static_cast<uint8_t>(gray(rng));
    int blobs = (img.width * img.height) / 20000;
    for (int b = 0; b < blobs; ++b) {
        int cx = px(rng), cy = py(rng), r = rad(rng);
        uint8_t g = static_cast<uint8_t>(gray(rng));
        for (int y = std::max(0, cy - r); y <= std::min(img.height - 1, cy + r); ++y)
            for (int x = std::max(0, cx - r); x <= std::min(img.width - 1, cx + r); ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) img.at(x, y) = g;
    }
}

}  // namespace

std::pair<GrayImage, GroundTruth> render_scene(const MarkerLayout& layout,
                                               const SceneConfig& cfg) {
    if (cfg.supersampling < 1) throw std::invalid_argument("supersampling must be >= 1");
    if (cfg.noise_sigma < 0 || cfg.blur_sigma < 0)
        throw std::invalid_argument("noise/blur sigma must be >= 0");
    const CameraIntrinsics& K = cfg.intrinsics;
    const double r = layout.radius, h = layout.height;
    const RigidTransform inv = cfg.pose.inverse();
    if (cfg.pose.apply(Vec3(0, h / 2, 0)).z() <= 0)
        throw std::invalid_argument("cylinder behind camera");

    std::mt19937_64 rng(cfg.seed);
    GrayImage img(cfg.width, cfg.height, cfg.background_gray);
    if (cfg.background == BackgroundMode::Clutter) fill_clutter(img, rng);

    // Ground truth first: exact corner projections and visibility.
    GroundTruth gt;
    gt.marker_id = layout.id;
    gt.pose = cfg.pose;
    CornerModel model = ideal_cylinder_model(layout);
    for (const auto& [key, P] : model.points) {
        GroundTruthCorner c;
        c.column = key.first;
        c.corner = key.second;
        Vec3 X = cfg.pose.apply(P);
        bool ok = X.z() > 1e-6;
        if (ok) {
            try {
                c.uv = project(K, RigidTransform{}, X);
            } catch (const std::exception&) {
                ok = false;
            }
        }
        if (ok) {
            Vec3 n_model(P.x() / r, 0.0, P.z() / r);
            Vec3 n_cam = cfg.pose.rotation * n_model;
            Vec3 view = X.normalized();
            bool facing = n_cam.dot(view) < -0.05;
            bool in_frame = c.uv.x() >= 0 && c.uv.x() < cfg.width && c.uv.y() >= 0 &&
                            c.uv.y() < cfg.height;
            c.visible = facing && in_frame;
        }
        gt.corners.push_back(c);
    }

    // Region of interest: bounding box of the projected cylinder rims.
    double min_u = 1e30, max_u = -1e30, min_v = 1e30, max_v = -1e30;
    bool any = false;
    for (int i = 0; i < 128; ++i) {
        double th = 2 * M_PI * i / 128;
        for (double y : {0.0, h}) {
            Vec3 P(r * std::sin(th), y, r * std::cos(th));
            Vec3 X = cfg.pose.apply(P);
            if (X.z() <= 1e-6) continue;
            Vec2 p = project(K, RigidTransform{}, X);
            min_u = std::min(min_u, p.x());
            max_u = std::max(max_u, p.x());
            min_v = std::min(min_v, p.y());
            max_v = std::max(max_v, p.y());
            any = true;
        }
    }
    if (any) {
        int x0 = std::max(0, static_cast<int>(std::floor(min_u)) - 2);
        int x1 = std::min(cfg.width - 1, static_cast<int>(std::ceil(max_u)) + 2);
        int y0 = std::max(0, static_cast<int>(std::floor(min_v)) - 2);
        int y1 = std::min(cfg.height - 1, static_cast<int>(std::ceil(max_v)) + 2);
        const int ss = cfg.supersampling;
        const double circumference = 2 * M_PI * r;
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                double acc = 0;
                int hit_count = 0;
                for (int sy = 0; sy < ss; ++sy) {
                    for (int sx = 0; sx < ss; ++sx) {
                        double u = x + (sx + 0.5) / ss - 0.5;
                        double v = y + (sy + 0.5) / ss - 0.5;
                        Vec2 und = K.has_distortion() ? undistort(K, Vec2(u, v)) : Vec2(u, v);
                        Vec3 d_cam((und.x() - K.cx) / K.fx, (und.y() - K.cy) / K.fy, 1.0);
                        Vec3 o = inv.translation;
                        Vec3 d = inv.rotation * d_cam;
                        auto t = hit_cylinder(o, d, r, h);
                        if (!t) {
                            acc += img.at(x, y);
                            continue;
                        }
                        ++hit_count;
                        if (!t->lateral) {
                            acc += 230.0;  // bare end cap
                            continue;
                        }
                        Vec3 P = o + t->t * d;
                        double flat_x = r * std::atan2(P.x(), P.z());
                        if (flat_x < 0) flat_x += circumference;
                        bool black = layout_point_is_black(layout, Vec2(flat_x, P.y()));
                        acc += black ? 25.0 : 230.0;
                    }
                }
                (void)hit_count;
                img.at(x, y) = static_cast<uint8_t>(
                    std::lround(std::clamp(acc / (ss * ss), 0.0, 255.0)));
            }
        }
    }

    if (cfg.noise_sigma > 0) {
        std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
        for (auto& v : img.data)
            v = static_cast<uint8_t>(std::lround(std::clamp(v + noise(rng), 0.0, 255.0)));
    }
    if (cfg.blur_sigma > 0) gaussian_blur(img, cfg.blur_sigma);
    return {std::move(img), std::move(gt)};
}

std::vector<CrNoisePoint> cr_noise_simulation(double length, double bc_width, double sigma,
                                              int trials, int positions, uint64_t seed) {
    if (bc_width >= length) throw std::invalid_argument("BC must fit within the line");
    if (positions < 2 || trials < 1) throw std::invalid_argument("bad simulation size");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    const double margin = 0.02 * length;
    const double lo = bc_width / 2 + margin, hi = length - bc_width / 2 - margin;
    std::vector<CrNoisePoint> out;
    for (int pi = 0; pi < positions; ++pi) {
        double mid = lo + (hi - lo) * pi / (positions - 1);
        double base[4] = {0.0, mid - bc_width / 2, mid + bc_width / 2, length};
        double sum = 0, sum2 = 0;
        for (int t = 0; t < trials; ++t) {
            double p[4];
            for (int i = 0; i < 4; ++i) {
                // Isotropic 2D perturbation projected onto the line: the
                // along-line component shifts the scalar position; the
                // transverse one is consumed by the projection.
                double dx = sigma > 0 ? noise(rng) : 0.0;
                double dy = sigma > 0 ? noise(rng) : 0.0;
                (void)dy;
                p[i] = base[i] + dx;
            }
            double cr = cross_ratio(p[0], p[1], p[2], p[3]);
            sum += cr;
            sum2 += cr * cr;
        }
        double mean = sum / trials;
        double var = std::max(0.0, sum2 / trials - mean * mean);
        out.push_back({mid, std::sqrt(var)});
    }
    return out;
}

namespace {

void draw_rect(GrayImage& img, int x0, int y0, int w, int h, uint8_t g) {
    for (int y = std::max(0, y0); y < std::min(img.height, y0 + h); ++y)
        for (int x = std::max(0, x0); x < std::min(img.width, x0 + w); ++x) img.at(x, y) = g;
}

}  // namespace

std::vector<GrayImage> negative_corpus(int count, uint64_t seed, int width, int height) {
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    std::vector<GrayImage> out;
    out.reserve(static_cast<size_t>(count));
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> kind(0, 4);
    for (int i = 0; i < count; ++i) {
        GrayImage img(width, height, 200);
        switch (kind(rng)) {
            case 0: {  // random elliptical blobs
                std::uniform_int_distribution<int> px(0, width - 1), py(0, height - 1);
                std::uniform_int_distribution<int> ra(10, 70), rb(10, 70);
                int n = 12 + static_cast<int>(rng() % 12);
                for (int b = 0; b < n; ++b) {
                    int cx = px(rng), cy = py(rng), a = ra(rng), bb = rb(rng);
                    for (int y = std::max(0, cy - bb); y <= std::min(height - 1, cy + bb); ++y)
                        for (int x = std::max(0, cx - a); x <= std::min(width - 1, cx + a); ++x) {
                            double e = double(x - cx) * (x - cx) / (a * a) +
                                       double(y - cy) * (y - cy) / (bb * bb);
                            if (e <= 1.0) img.at(x, y) = 30;
                        }
                }
                break;
            }
            case 1: {  // checkerboard (diagonally connected squares)
                int cell = 20 + static_cast<int>(rng() % 40);
                for (int y = 0; y < height; ++y)
                    for (int x = 0; x < width; ++x)
                        img.at(x, y) = ((x / cell + y / cell) & 1) ? 30 : 220;
                break;
            }
            case 2: {  // full-span stripes, one per band: no collinear pairs
                int sw = 15 + static_cast<int>(rng() % 25);
                bool horizontal = rng() & 1;
                int extent = horizontal ? height : width;
                for (int pos = sw; pos + 3 * sw < extent; pos += 3 * sw) {
                    if (horizontal) draw_rect(img, 10, pos, width - 20, sw, 30);
                    else draw_rect(img, pos, 10, sw, height - 20, 30);
                }
                break;
            }
            case 3: {  // glyph grid: squares with wide separations
                int cell = 40 + static_cast<int>(rng() % 30);
                int glyph = cell / 2;  // gap = half the pitch, far above the pairing gate
                for (int gy = cell / 4; gy + glyph < height; gy += cell)
                    for (int gx = cell / 4; gx + glyph < width; gx += cell)
                        if (rng() % 3) draw_rect(img, gx, gy, glyph, glyph, 30);
                break;
            }
            default: {  // noise field
                std::uniform_int_distribution<int> g(0, 255);
                for (auto& v : img.data) v = static_cast<uint8_t>(g(rng));
                break;
            }
        }
        out.push_back(std::move(img));
    }
    return out;
}

}  // namespace cylindertag
