#include "cylindertag/imgproc.hpp"

#include <algorithm>
#include <queue>

namespace cylindertag {

std::pair<GrayImage, int> downsample(const GrayImage& img) {
    if (std::min(img.width, img.height) < 1200) return {img, 1};
    GrayImage out(img.width / 2, img.height / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            int sum = img.at(2 * x, 2 * y) + img.at(2 * x + 1, 2 * y) +
                      img.at(2 * x, 2 * y + 1) + img.at(2 * x + 1, 2 * y + 1);
            out.at(x, y) = static_cast<uint8_t>((sum + 2) / 4);
        }
    return {out, 2};
}

BinaryImage adaptive_threshold(const GrayImage& img, const ImgprocParams& params) {
    const int ts = params.tile_size;
    const int tw = (img.width + ts - 1) / ts;
    const int th = (img.height + ts - 1) / ts;
    std::vector<uint8_t> tile_min(static_cast<size_t>(tw) * th, 255);
    std::vector<uint8_t> tile_max(static_cast<size_t>(tw) * th, 0);
    for (int y = 0; y < img.height; ++y) {
        int ty = y / ts;
        for (int x = 0; x < img.width; ++x) {
            int tx = x / ts;
            uint8_t v = img.at(x, y);
            size_t ti = static_cast<size_t>(ty) * tw + static_cast<size_t>(tx);
            tile_min[ti] = std::min(tile_min[ti], v);
            tile_max[ti] = std::max(tile_max[ti], v);
        }
    }
    // Tile-neighborhood extrema: the reach has to exceed the half-width of
    // the thickest stroke so its core still sees the edge contrast.
    const int tr = params.tile_radius;
    std::vector<uint8_t> nb_min(tile_min.size()), nb_max(tile_max.size());
    for (int ty = 0; ty < th; ++ty)
        for (int tx = 0; tx < tw; ++tx) {
            uint8_t mn = 255, mx = 0;
            for (int dy = -tr; dy <= tr; ++dy)
                for (int dx = -tr; dx <= tr; ++dx) {
                    int ny = ty + dy, nx = tx + dx;
                    if (ny < 0 || ny >= th || nx < 0 || nx >= tw) continue;
                    size_t ti = static_cast<size_t>(ny) * tw + static_cast<size_t>(nx);
                    mn = std::min(mn, tile_min[ti]);
                    mx = std::max(mx, tile_max[ti]);
                }
            size_t ti = static_cast<size_t>(ty) * tw + static_cast<size_t>(tx);
            nb_min[ti] = mn;
            nb_max[ti] = mx;
        }
    BinaryImage bin(img.width, img.height, 0);
    for (int y = 0; y < img.height; ++y) {
        int ty = y / ts;
        for (int x = 0; x < img.width; ++x) {
            int tx = x / ts;
            size_t ti = static_cast<size_t>(ty) * tw + static_cast<size_t>(tx);
            int mn = nb_min[ti], mx = nb_max[ti];
            if (mx - mn < params.contrast_floor) continue;  // background -> white
            int thresh = (mx + mn) / 2;
            if (img.at(x, y) < thresh) bin.at(x, y) = 1;
        }
    }
    return bin;
}

BinaryImage morph_open(const BinaryImage& bin) {
    const int w = bin.width, h = bin.height;
    auto run = [&](const BinaryImage& src, uint8_t keep) {
        BinaryImage dst(w, h, 1 - keep);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                bool all = true;
                for (int dy = -1; dy <= 1 && all; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        int nx = x + dx, ny = y + dy;
                        uint8_t v = (nx < 0 || nx >= w || ny < 0 || ny >= h)
                                        ? uint8_t{0}
                                        : src.at(nx, ny);
                        if (v != keep) {
                            all = false;
                            break;
                        }
                    }
                if (all) dst.at(x, y) = keep;
            }
        return dst;
    };
    // Erode the black foreground, then dilate it (= erode the complement).
    BinaryImage eroded = run(bin, 1);
    BinaryImage opened = run(eroded, 0);
    return opened;
}

std::vector<Region> label_components(const BinaryImage& bin, const ImgprocParams& params) {
    const int w = bin.width, h = bin.height;
    const int max_area = static_cast<int>(params.max_region_frac * w * h);
    std::vector<int> labels(static_cast<size_t>(w) * h, 0);
    std::vector<Region> regions;
    int next_label = 0;
    std::vector<PixelCoord> stack;
    for (int y0 = 0; y0 < h; ++y0)
        for (int x0 = 0; x0 < w; ++x0) {
            if (!bin.at(x0, y0) || labels[static_cast<size_t>(y0) * w + x0]) continue;
            ++next_label;
            Region r;
            r.label = next_label;
            r.min_x = r.max_x = x0;
            r.min_y = r.max_y = y0;
            stack.clear();
            stack.push_back({x0, y0});
            labels[static_cast<size_t>(y0) * w + x0] = next_label;
            double sx = 0, sy = 0;
            while (!stack.empty()) {
                PixelCoord p = stack.back();
                stack.pop_back();
                r.pixels.push_back(p);
                sx += p.x;
                sy += p.y;
                r.min_x = std::min(r.min_x, p.x);
                r.max_x = std::max(r.max_x, p.x);
                r.min_y = std::min(r.min_y, p.y);
                r.max_y = std::max(r.max_y, p.y);
                // 4-connected foreground: a single anti-aliased pixel bridging
                // two shapes diagonally must not fuse them into one region.
                static const int nbr[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
                for (const auto& d : nbr) {
                    int nx = p.x + d[0], ny = p.y + d[1];
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    size_t ni = static_cast<size_t>(ny) * w + static_cast<size_t>(nx);
                    if (!bin.at(nx, ny) || labels[ni]) continue;
                    labels[ni] = next_label;
                    stack.push_back({nx, ny});
                }
            }
            r.pixel_count = static_cast<int>(r.pixels.size());
            if (r.pixel_count < params.min_region_area || r.pixel_count > max_area) continue;
            r.centroid = Vec2(sx / r.pixel_count, sy / r.pixel_count);
            regions.push_back(std::move(r));
        }
    return regions;
}

std::optional<BorderChain> trace_border(const Region& region) {
    if (region.pixel_count < 24) return std::nullopt;
    const int pad = 1;
    const int w = region.max_x - region.min_x + 1 + 2 * pad;
    const int h = region.max_y - region.min_y + 1 + 2 * pad;
    auto idx = [&](int x, int y) { return static_cast<size_t>(y) * w + static_cast<size_t>(x); };
    std::vector<uint8_t> mask(static_cast<size_t>(w) * h, 0);
    for (const auto& p : region.pixels)
        mask[idx(p.x - region.min_x + pad, p.y - region.min_y + pad)] = 1;

    // Moore-neighbor tracing from the topmost-leftmost pixel, clockwise,
    // with Jacob's stopping criterion.
    static const int mx8[] = {1, 1, 0, -1, -1, -1, 0, 1};
    static const int my8[] = {0, 1, 1, 1, 0, -1, -1, -1};
    int sx = -1, sy = -1;
    for (int y = 0; y < h && sx < 0; ++y)
        for (int x = 0; x < w; ++x)
            if (mask[idx(x, y)]) {
                sx = x;
                sy = y;
                break;
            }
    if (sx < 0) return std::nullopt;

    std::vector<PixelCoord> chain;
    std::vector<uint8_t> on_chain(mask.size(), 0);
    int cx = sx, cy = sy;
    int backtrack = 4;  // came from the west (scan found us left-to-right)
    int start_dir = -1;
    const size_t limit = mask.size() * 4;
    for (size_t step = 0; step < limit; ++step) {
        int dir = -1;
        for (int k = 0; k < 8; ++k) {
            int d = (backtrack + 1 + k) % 8;
            int nx = cx + mx8[d], ny = cy + my8[d];
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            if (mask[idx(nx, ny)]) {
                dir = d;
                break;
            }
        }
        if (dir < 0) return std::nullopt;  // isolated pixel
        if (step == 0) start_dir = dir;
        if (!chain.empty() && cx == sx && cy == sy && dir == start_dir && step > 0)
            break;  // closed the loop entering the start the same way
        // Pixels may repeat along 1-px protrusions; record each only once so
        // the chain stays a simple ordered border.
        if (!on_chain[idx(cx, cy)]) {
            chain.push_back({cx - pad + region.min_x, cy - pad + region.min_y});
            on_chain[idx(cx, cy)] = 1;
        }
        cx += mx8[dir];
        cy += my8[dir];
        backtrack = (dir + 4) % 8;
    }
    if (chain.size() < 8) return std::nullopt;
    BorderChain out;
    out.pixels = std::move(chain);
    out.closed = true;
    return out;
}

}  // namespace cylindertag
