#include "cylindertag/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cylindertag {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::runtime_error("config line " + std::to_string(lineno) +
                                                  ": empty key");
        cfg.values_[key] = value;
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
}

double Config::get(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size())
        throw std::runtime_error("config key " + key + ": not a number: " + it->second);
    return v;
}

int Config::get(const std::string& key, int fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    size_t pos = 0;
    int v = std::stoi(it->second, &pos);
    if (pos != it->second.size())
        throw std::runtime_error("config key " + key + ": not an integer: " + it->second);
    return v;
}

DetectorParams Config::detector_params() const {
    DetectorParams p;
    p.fit.t_cost = get("t_cost", p.fit.t_cost);
    p.fit.t_line = get("t_line", p.fit.t_line);
    p.fit.t_rac = get("t_rac", p.fit.t_rac);
    p.fit.min_segment = get("min_segment", p.fit.min_segment);
    p.pairing.t_theta_deg = get("t_theta", p.pairing.t_theta_deg);
    p.pairing.alpha_gap = get("alpha_gap", p.pairing.alpha_gap);
    p.pairing.alpha_len = get("alpha_len", p.pairing.alpha_len);
    p.pairing.alpha_s = get("alpha_s", p.pairing.alpha_s);
    p.organize.t_theta_deg = p.pairing.t_theta_deg;
    p.organize.t_ver = get("t_ver", p.organize.t_ver);
    p.organize.pitch_gate = get("pitch_gate", p.organize.pitch_gate);
    p.imgproc.min_region_area = get("min_region_area", p.imgproc.min_region_area);
    p.imgproc.contrast_floor = get("contrast_floor", p.imgproc.contrast_floor);
    p.adjacency_split = get("adjacency_split", p.adjacency_split);
    p.refine = get("refine", 1) != 0;
    return p;
}

CameraIntrinsics load_intrinsics(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    CameraIntrinsics K;
    if (!(is >> K.fx >> K.fy >> K.cx >> K.cy))
        throw std::runtime_error("intrinsics file must contain: fx fy cx cy [k1 k2]");
    if (!(is >> K.k1)) {
        K.k1 = 0;
        return K;
    }
    if (!(is >> K.k2)) throw std::runtime_error("intrinsics: k1 given without k2");
    return K;
}

void save_intrinsics(const CameraIntrinsics& K, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os.precision(9);
    os << K.fx << " " << K.fy << " " << K.cx << " " << K.cy;
    if (K.has_distortion()) os << " " << K.k1 << " " << K.k2;
    os << "\n";
}

}  // namespace cylindertag
