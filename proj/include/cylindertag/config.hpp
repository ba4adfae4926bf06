#ifndef CYLINDERTAG_CONFIG_HPP
#define CYLINDERTAG_CONFIG_HPP

#include <map>
#include <string>

#include "cylindertag/detector.hpp"

namespace cylindertag {

/// Flat key=value configuration file; '#' starts a comment.
class Config {
public:
    Config() = default;
    static Config load(const std::string& path);
    static Config parse(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    double get(const std::string& key, double fallback) const;
    int get(const std::string& key, int fallback) const;
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    /// Detector parameters with every threshold overridable by its key:
    /// t_cost, t_line, t_rac, t_theta, alpha_gap, alpha_len, alpha_s, t_ver,
    /// min_segment, min_region_area, contrast_floor, adjacency_split.
    DetectorParams detector_params() const;

private:
    std::map<std::string, std::string> values_;
};

/// Intrinsics file: one line `fx fy cx cy [k1 k2]`.
CameraIntrinsics load_intrinsics(const std::string& path);
void save_intrinsics(const CameraIntrinsics& K, const std::string& path);

}  // namespace cylindertag

#endif
