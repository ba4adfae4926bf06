#include "cylindertag/generator.hpp"

#include <random>

namespace cylindertag {

ConflictLibrary::ConflictLibrary(int field_length) : f_(field_length) {}

uint64_t ConflictLibrary::reverse_key(uint64_t key) const {
    // Reverse the symbol order and reverse-transform each symbol. Consuming
    // from the low end while appending already yields the reversed order.
    uint64_t out = 0;
    for (int i = 0; i < f_; ++i) {
        FeatureCode c = static_cast<FeatureCode>(key & 63);
        key >>= 6;
        out = (out << 6) | static_cast<uint64_t>(reverse_code(c));
    }
    return out;
}

void ConflictLibrary::insert(uint64_t key) {
    keys_.insert(key);
    keys_.insert(reverse_key(key));
}

void ConflictLibrary::seed_self_ambiguous(int alphabet) {
    // Enumerate all windows over the restricted alphabet only when feasible;
    // for f <= 3 the full space is small. For larger f, self-ambiguous windows
    // are vanishingly rare and are caught by the per-marker validation.
    if (f_ > 3) return;
    uint64_t total = 1;
    for (int i = 0; i < f_; ++i) total *= static_cast<uint64_t>(alphabet);
    std::vector<FeatureCode> w(static_cast<size_t>(f_));
    for (uint64_t v = 0; v < total; ++v) {
        uint64_t x = v;
        for (int i = f_ - 1; i >= 0; --i) {
            w[static_cast<size_t>(i)] = static_cast<FeatureCode>(x % static_cast<uint64_t>(alphabet));
            x /= static_cast<uint64_t>(alphabet);
        }
        uint64_t key = pack_window(w);
        if (key == reverse_key(key)) keys_.insert(key);
    }
}

bool legal(FeatureCode code, const std::vector<FeatureCode>& partial,
           const ConflictLibrary& conflicts,
           const std::unordered_set<uint64_t>& local_windows) {
    const int f = conflicts.field_length();
    const int len = static_cast<int>(partial.size());
    if (len + 1 < f) return true;  // no complete window yet
    uint64_t key = 0;
    for (int i = len - (f - 1); i < len; ++i)
        key = (key << 6) | static_cast<uint64_t>(partial[static_cast<size_t>(i)] & 63);
    key = (key << 6) | static_cast<uint64_t>(code & 63);
    if (conflicts.contains(key)) return false;
    if (local_windows.count(key)) return false;
    return true;
}

int potential(const std::vector<FeatureCode>& partial, FeatureCode candidate,
              const ConflictLibrary& conflicts,
              const std::unordered_set<uint64_t>& local_windows, int alphabet) {
    std::vector<FeatureCode> next = partial;
    next.push_back(candidate);
    std::unordered_set<uint64_t> local = local_windows;
    const int f = conflicts.field_length();
    if (static_cast<int>(next.size()) >= f) {
        uint64_t key = pack_window(next.data() + next.size() - static_cast<size_t>(f), f);
        local.insert(key);
        local.insert(conflicts.reverse_key(key));
    }
    int count = 0;
    for (int c = 0; c < alphabet; ++c)
        if (legal(static_cast<FeatureCode>(c), next, conflicts, local)) ++count;
    return count;
}

namespace {

// All 2l window keys of a complete cyclic marker.
std::vector<uint64_t> all_keys(const std::vector<FeatureCode>& codes, int f) {
    MarkerCode m;
    m.codes = codes;
    std::vector<uint64_t> keys;
    for (const auto& [key, entry] : windows(m, f)) keys.push_back(key);
    return keys;
}

bool marker_ok(const std::vector<FeatureCode>& codes, int f, const ConflictLibrary& conflicts) {
    auto keys = all_keys(codes, f);
    std::unordered_set<uint64_t> seen;
    for (uint64_t k : keys) {
        if (conflicts.contains(k)) return false;
        if (!seen.insert(k).second) return false;
    }
    return true;
}

}  // namespace

GenResult generate(const GenConfig& cfg) {
    if (cfg.field_length < 1 || cfg.field_length >= cfg.marker_length)
        throw std::invalid_argument("generate: need 1 <= f < l");
    const int f = cfg.field_length;
    const int l = cfg.marker_length;
    const int A = cfg.alphabet;

    std::mt19937_64 rng(cfg.seed);
    auto rand_code = [&]() { return static_cast<FeatureCode>(rng() % static_cast<uint64_t>(A)); };

    ConflictLibrary conflicts(f);
    conflicts.seed_self_ambiguous(A);

    std::vector<MarkerCode> markers;
    int restarts = 0;
    while (static_cast<int>(markers.size()) < cfg.target_markers &&
           restarts < cfg.max_marker_restarts) {
        std::vector<FeatureCode> m;
        std::unordered_set<uint64_t> local;
        bool failed = false;

        // Seed window: f random symbols forming a legal start.
        bool seeded = false;
        for (int attempt = 0; attempt < 256 && !seeded; ++attempt) {
            m.clear();
            local.clear();
            bool ok = true;
            for (int i = 0; i < f && ok; ++i) {
                FeatureCode c = rand_code();
                ok = legal(c, m, conflicts, local);
                if (ok) {
                    m.push_back(c);
                    if (static_cast<int>(m.size()) >= f) {
                        uint64_t key = pack_window(m.data() + m.size() - static_cast<size_t>(f), f);
                        local.insert(key);
                        local.insert(conflicts.reverse_key(key));
                    }
                }
            }
            seeded = ok;
        }
        if (!seeded) {
            ++restarts;
            continue;
        }

        // Grow by argmax-potential up to length l-1.
        while (static_cast<int>(m.size()) < l - 1 && !failed) {
            int best_code = -1;
            int best_pot = -1;
            for (int c = 0; c < A; ++c) {
                if (!legal(static_cast<FeatureCode>(c), m, conflicts, local)) continue;
                int pot = potential(m, static_cast<FeatureCode>(c), conflicts, local, A);
                if (pot > best_pot) {
                    best_pot = pot;
                    best_code = c;
                }
            }
            if (best_code < 0) {
                failed = true;
                break;
            }
            m.push_back(static_cast<FeatureCode>(best_code));
            uint64_t key = pack_window(m.data() + m.size() - static_cast<size_t>(f), f);
            local.insert(key);
            local.insert(conflicts.reverse_key(key));
        }

        // Cyclic closure: random retries for the final symbol.
        bool closed = false;
        if (!failed) {
            for (int attempt = 0; attempt < 64 && !closed; ++attempt) {
                FeatureCode c = rand_code();
                if (!legal(c, m, conflicts, local)) continue;
                std::vector<FeatureCode> full = m;
                full.push_back(c);
                if (marker_ok(full, f, conflicts)) {
                    m = std::move(full);
                    closed = true;
                }
            }
        }
        if (!closed) {
            ++restarts;
            continue;
        }

        MarkerCode mc;
        mc.id = static_cast<int>(markers.size());
        mc.codes = m;
        for (uint64_t k : all_keys(m, f)) conflicts.insert(k);
        markers.push_back(std::move(mc));
        restarts = 0;
    }

    MarkerConfig mcfg{l, f};
    bool reached = static_cast<int>(markers.size()) >= cfg.target_markers;
    return {Dictionary(mcfg, std::move(markers)), reached};
}

}  // namespace cylindertag
