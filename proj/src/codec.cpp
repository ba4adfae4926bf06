#include "cylindertag/codec.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace cylindertag {

std::optional<CrCategory> classify_cr(double cr, const CrCategories& cats) {
    if (!(cr > 1.0)) return std::nullopt;
    int best = -1;
    double best_d = cats.accept_band;
    for (size_t i = 0; i < cats.nominal.size(); ++i) {
        double d = std::abs(cr - cats.nominal[i]);
        if (d <= best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    if (best < 0) return std::nullopt;
    return CrCategory{best};
}

std::optional<int> orientation_indicator(double s1, double s3) {
    if (s1 <= 0.0 || s3 <= 0.0) return std::nullopt;
    if (std::abs(s1 - s3) < 0.02 * (s1 + s3)) return std::nullopt;
    return s1 > s3 ? 0 : 1;
}

std::optional<int> orientation_indicator(const Vec2& c1, const Vec2& c2,
                                         const Vec2& c3, const Vec2& c4) {
    return orientation_indicator((c2 - c1).norm(), (c4 - c3).norm());
}

uint64_t pack_window(const FeatureCode* codes, int f) {
    uint64_t key = 0;
    for (int i = 0; i < f; ++i) key = (key << 6) | static_cast<uint64_t>(codes[i] & 63);
    return key;
}

uint64_t pack_window(const std::vector<FeatureCode>& codes) {
    return pack_window(codes.data(), static_cast<int>(codes.size()));
}

std::vector<std::pair<uint64_t, WindowEntry>> windows(const MarkerCode& m, int f) {
    const int n = static_cast<int>(m.codes.size());
    if (n < f) throw std::invalid_argument("windows: marker shorter than field length");
    std::vector<std::pair<uint64_t, WindowEntry>> out;
    out.reserve(2 * n);
    std::vector<FeatureCode> w(static_cast<size_t>(f));
    for (int s = 0; s < n; ++s) {
        for (int i = 0; i < f; ++i) w[static_cast<size_t>(i)] = m.codes[static_cast<size_t>((s + i) % n)];
        out.push_back({pack_window(w), {m.id, s, ReadDirection::Forward}});
    }
    // Reverse reading: start anywhere, walk the cycle backwards, transform codes.
    for (int s = 0; s < n; ++s) {
        for (int i = 0; i < f; ++i)
            w[static_cast<size_t>(i)] = reverse_code(m.codes[static_cast<size_t>(((s - i) % n + n) % n)]);
        out.push_back({pack_window(w), {m.id, s, ReadDirection::Reverse}});
    }
    return out;
}

Dictionary::Dictionary(MarkerConfig cfg, std::vector<MarkerCode> markers)
    : cfg_(cfg), markers_(std::move(markers)) {
    build_index();
}

void Dictionary::build_index() {
    index_.clear();
    id_to_index_.clear();
    for (size_t i = 0; i < markers_.size(); ++i) id_to_index_[markers_[i].id] = i;
    for (const auto& m : markers_)
        for (const auto& [key, entry] : windows(m, cfg_.field_length))
            index_[key].push_back(entry);
}

bool Dictionary::validate() const {
    std::unordered_map<uint64_t, int> seen;
    for (const auto& m : markers_)
        for (const auto& [key, entry] : windows(m, cfg_.field_length))
            if (++seen[key] > 1) return false;
    return true;
}

std::optional<LookupResult> Dictionary::lookup(const std::vector<FeatureCode>& observed) const {
    const int f = cfg_.field_length;
    const int n = cfg_.columns;
    const int len = static_cast<int>(observed.size());
    if (len < f) return std::nullopt;

    LookupResult best;
    int best_count = 0;  // number of distinct candidates at max coverage
    for (int p = 0; p + f <= len; ++p) {
        uint64_t key = pack_window(observed.data() + p, f);
        auto it = index_.find(key);
        if (it == index_.end()) continue;
        for (const WindowEntry& e : it->second) {
            const MarkerCode& m = markers_[id_to_index_.at(e.id)];
            // Alignment implied by the hit: observed[i] maps to marker column
            // first_col +/- (i - p), depending on direction.
            int coverage = 0;
            for (int i = 0; i < len; ++i) {
                int col;
                FeatureCode expect;
                if (e.direction == ReadDirection::Forward) {
                    col = ((e.first_col + (i - p)) % n + n) % n;
                    expect = m.codes[static_cast<size_t>(col)];
                } else {
                    col = ((e.first_col - (i - p)) % n + n) % n;
                    expect = reverse_code(m.codes[static_cast<size_t>(col)]);
                }
                if (observed[static_cast<size_t>(i)] == expect) ++coverage;
            }
            int first_col_of_run =
                e.direction == ReadDirection::Forward
                    ? ((e.first_col - p) % n + n) % n
                    : ((e.first_col + p) % n + n) % n;
            bool same_candidate = best_count > 0 && best.id == e.id &&
                                  best.direction == e.direction &&
                                  best.first_col == first_col_of_run;
            if (coverage > best.coverage) {
                best = {e.id, first_col_of_run, p, e.direction, coverage};
                best_count = 1;
            } else if (coverage == best.coverage && best_count > 0 && !same_candidate) {
                ++best_count;
            }
        }
    }
    if (best_count != 1 || best.coverage == 0) return std::nullopt;
    // Report first_col as the column of the first observed symbol.
    best.match_pos = 0;
    return best;
}

void Dictionary::write(std::ostream& os) const {
    os << "cylindertag-dict v1 n=" << cfg_.columns << " f=" << cfg_.field_length << "\n";
    for (const auto& m : markers_) {
        os << m.id << ":";
        for (FeatureCode c : m.codes) os << " " << static_cast<int>(c);
        os << "\n";
    }
}

Dictionary Dictionary::read(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("dictionary: empty file");
    MarkerConfig cfg;
    {
        std::istringstream hs(header);
        std::string magic, version, ntok, ftok;
        hs >> magic >> version >> ntok >> ftok;
        if (magic != "cylindertag-dict" || version != "v1" ||
            ntok.rfind("n=", 0) != 0 || ftok.rfind("f=", 0) != 0)
            throw std::runtime_error("dictionary: bad header: " + header);
        cfg.columns = std::stoi(ntok.substr(2));
        cfg.field_length = std::stoi(ftok.substr(2));
    }
    std::vector<MarkerCode> markers;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos) throw std::runtime_error("dictionary: bad line: " + line);
        MarkerCode m;
        m.id = std::stoi(line.substr(0, colon));
        std::istringstream cs(line.substr(colon + 1));
        int v;
        while (cs >> v) {
            if (v < 0 || v > 63) throw std::runtime_error("dictionary: code out of range");
            m.codes.push_back(static_cast<FeatureCode>(v));
        }
        if (static_cast<int>(m.codes.size()) != cfg.columns)
            throw std::runtime_error("dictionary: marker length mismatch");
        markers.push_back(std::move(m));
    }
    return Dictionary(cfg, std::move(markers));
}

void Dictionary::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("dictionary: cannot open " + path);
    write(os);
}

Dictionary Dictionary::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("dictionary: cannot open " + path);
    return read(is);
}

}  // namespace cylindertag
