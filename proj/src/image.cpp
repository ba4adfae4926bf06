#include "cylindertag/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace cylindertag {

double GrayImage::sample(double x, double y) const {
    x = std::clamp(x, 0.0, static_cast<double>(width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(height - 1));
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    int x1 = std::min(x0 + 1, width - 1);
    int y1 = std::min(y0 + 1, height - 1);
    double fx = x - x0;
    double fy = y - y0;
    double v00 = at(x0, y0), v10 = at(x1, y0), v01 = at(x0, y1), v11 = at(x1, y1);
    return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
}

void GrayImage::save_pgm(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_pgm: cannot open " + path);
    os << "P5\n" << width << " " << height << "\n255\n";
    os.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

GrayImage GrayImage::load_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_pgm: cannot open " + path);
    std::string magic;
    is >> magic;
    if (magic != "P5") throw std::runtime_error("load_pgm: not a binary PGM: " + path);
    auto next_token = [&]() -> long {
        // Skip whitespace and '#' comment lines.
        while (true) {
            int c = is.peek();
            if (c == '#') {
                std::string line;
                std::getline(is, line);
            } else if (std::isspace(c)) {
                is.get();
            } else {
                break;
            }
        }
        long v;
        if (!(is >> v)) throw std::runtime_error("load_pgm: malformed header");
        return v;
    };
    long w = next_token();
    long h = next_token();
    long maxval = next_token();
    if (w <= 0 || h <= 0 || maxval != 255) throw std::runtime_error("load_pgm: unsupported format");
    is.get();  // single whitespace after maxval
    GrayImage img(static_cast<int>(w), static_cast<int>(h));
    is.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (is.gcount() != static_cast<std::streamsize>(img.data.size()))
        throw std::runtime_error("load_pgm: truncated pixel data");
    return img;
}

}  // namespace cylindertag
