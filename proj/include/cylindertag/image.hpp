#ifndef CYLINDERTAG_IMAGE_HPP
#define CYLINDERTAG_IMAGE_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace cylindertag {

/// Row-major 8-bit grayscale image. Pixel centers sit at integer coordinates.
struct GrayImage {
    int width = 0, height = 0;
    std::vector<uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h, uint8_t fill = 0)
        : width(w), height(h), data(static_cast<size_t>(w) * static_cast<size_t>(h), fill) {}

    uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)]; }
    uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)]; }
    bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    /// Bilinear intensity sample; coordinates clamped to the image.
    double sample(double x, double y) const;

    void save_pgm(const std::string& path) const;
    static GrayImage load_pgm(const std::string& path);
};

/// Logical binary image: true = black (foreground).
struct BinaryImage {
    int width = 0, height = 0;
    std::vector<uint8_t> data;  // 0 = white, 1 = black

    BinaryImage() = default;
    BinaryImage(int w, int h, uint8_t fill = 0)
        : width(w), height(h), data(static_cast<size_t>(w) * static_cast<size_t>(h), fill) {}

    uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)]; }
    uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)]; }
    bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

}  // namespace cylindertag

#endif
