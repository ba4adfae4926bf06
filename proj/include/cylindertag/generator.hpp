#ifndef CYLINDERTAG_GENERATOR_HPP
#define CYLINDERTAG_GENERATOR_HPP

#include <cstdint>
#include <unordered_set>

#include "cylindertag/codec.hpp"

namespace cylindertag {

struct GenConfig {
    int target_markers = 41;
    int marker_length = 12;  // columns
    int field_length = 2;
    uint64_t seed = 1;
    /// Restrict the alphabet to codes [0, alphabet); 64 is the full set.
    int alphabet = 64;
    /// Restart budget per marker before giving up on the dictionary.
    int max_marker_restarts = 2000;
};

/// Forbidden length-f windows. Closed under the reverse-reading transform.
class ConflictLibrary {
public:
    explicit ConflictLibrary(int field_length);

    bool contains(uint64_t key) const { return keys_.count(key) != 0; }
    /// Inserts a key together with its reverse-transformed form.
    void insert(uint64_t key);
    size_t size() const { return keys_.size(); }
    int field_length() const { return f_; }

    /// Reverse-reading transform of a packed window key.
    uint64_t reverse_key(uint64_t key) const;

    /// Seed with every window that collides with its own reverse transform;
    /// such a window cannot determine the reading direction.
    void seed_self_ambiguous(int alphabet = 64);

private:
    int f_;
    std::unordered_set<uint64_t> keys_;
};

struct GenResult {
    Dictionary dictionary;
    bool reached_target = true;
};

/// True iff appending `code` to the partial marker creates no window present
/// in the conflict library or already used within the marker itself.
bool legal(FeatureCode code, const std::vector<FeatureCode>& partial,
           const ConflictLibrary& conflicts,
           const std::unordered_set<uint64_t>& local_windows);

/// One-step lookahead: how many codes would remain legal after appending
/// `candidate`.
int potential(const std::vector<FeatureCode>& partial, FeatureCode candidate,
              const ConflictLibrary& conflicts,
              const std::unordered_set<uint64_t>& local_windows, int alphabet = 64);

/// Heuristic-search dictionary generation. Deterministic given the seed.
GenResult generate(const GenConfig& cfg);

}  // namespace cylindertag

#endif
