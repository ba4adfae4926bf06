#ifndef CYLINDERTAG_CODEC_HPP
#define CYLINDERTAG_CODEC_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cylindertag/geometry.hpp"

namespace cylindertag {

/// Cross-ratio category index 0-3 over the nominal values.
struct CrCategory {
    int index = 0;
};

/// The four nominal cross-ratio values, adjustable by users.
struct CrCategories {
    std::vector<double> nominal{1.47, 1.54, 1.61, 1.68};
    /// Accept band half-width around each nominal; outside -> reject.
    double accept_band = 0.025;
};

using LineCode = uint8_t;     // 3-bit: (delta << 2) | category
using FeatureCode = uint8_t;  // 6-bit: (left << 3) | right

enum class ReadDirection { Forward, Reverse };

struct MarkerConfig {
    int columns = 12;       // n
    int field_length = 2;   // f
    bool valid() const { return field_length >= 1 && field_length < columns; }
};

struct MarkerCode {
    int id = 0;
    std::vector<FeatureCode> codes;  // cyclic, length = columns
};

/// Index entry for one length-f window.
struct WindowEntry {
    int id = 0;
    int first_col = 0;  // original column index of the window's first symbol
    ReadDirection direction = ReadDirection::Forward;
};

struct LookupResult {
    int id = 0;
    int first_col = 0;  // column of observed[match_pos]
    int match_pos = 0;  // start of the matched window within the observed run
    ReadDirection direction = ReadDirection::Forward;
    int coverage = 0;   // observed symbols consistent with the marker
};

class Dictionary {
public:
    Dictionary() = default;
    Dictionary(MarkerConfig cfg, std::vector<MarkerCode> markers);

    const MarkerConfig& config() const { return cfg_; }
    const std::vector<MarkerCode>& markers() const { return markers_; }

    /// Sliding-window lookup of an observed code run; returns the unique
    /// maximum-coverage candidate or nullopt (none found / ambiguous).
    std::optional<LookupResult> lookup(const std::vector<FeatureCode>& observed) const;

    /// True iff all 2n windows of all markers are globally unique.
    bool validate() const;

    void write(std::ostream& os) const;
    static Dictionary read(std::istream& is);
    void save(const std::string& path) const;
    static Dictionary load(const std::string& path);

private:
    void build_index();
    MarkerConfig cfg_;
    std::vector<MarkerCode> markers_;
    std::unordered_map<uint64_t, std::vector<WindowEntry>> index_;
    std::unordered_map<int, size_t> id_to_index_;
};

/// Nearest nominal category if within the accept band, else nullopt.
std::optional<CrCategory> classify_cr(double cr, const CrCategories& cats = {});

/// Orientation indicator from four ordered collinear corners:
/// 0 if the first quad edge |c1c2| is longer than the second |c3c4|, else 1.
/// nullopt if |s1 - s3| < 0.02 * (s1 + s3) (degenerate).
std::optional<int> orientation_indicator(const Vec2& c1, const Vec2& c2,
                                         const Vec2& c3, const Vec2& c4);
std::optional<int> orientation_indicator(double s1, double s3);

inline LineCode encode_line(int delta, CrCategory cat) {
    return static_cast<LineCode>((delta << 2) | cat.index);
}
inline int line_delta(LineCode c) { return (c >> 2) & 1; }
inline int line_category(LineCode c) { return c & 3; }

inline FeatureCode encode_feature(LineCode left, LineCode right) {
    return static_cast<FeatureCode>((left << 3) | right);
}
inline LineCode feature_left(FeatureCode c) { return static_cast<LineCode>((c >> 3) & 7); }
inline LineCode feature_right(FeatureCode c) { return static_cast<LineCode>(c & 7); }

/// Reverse-reading transform of one line code: flip the delta bit.
inline LineCode reverse_line(LineCode c) { return static_cast<LineCode>(c ^ 4); }

/// Reverse-reading transform of a feature code: swap left/right line codes
/// and flip each delta bit (the cylinder viewed flipped end-over-end).
inline FeatureCode reverse_code(FeatureCode c) {
    return encode_feature(reverse_line(feature_right(c)), reverse_line(feature_left(c)));
}

/// Pack a length-f window of 6-bit codes into one key.
uint64_t pack_window(const FeatureCode* codes, int f);
uint64_t pack_window(const std::vector<FeatureCode>& codes);

/// All 2n windows (forward and reverse reading) of a cyclic marker.
std::vector<std::pair<uint64_t, WindowEntry>> windows(const MarkerCode& m, int f);

}  // namespace cylindertag

#endif
