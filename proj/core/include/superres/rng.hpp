#pragma once

#include <cstdint>

namespace superres {

/// SplitMix64 pseudo-random generator.
///
/// Chosen for cross-platform bit reproducibility: the whole state is one
/// 64-bit word and the update uses only integer multiplies and shifts, so
/// identical seeds give identical streams on every platform. Constants are
/// the standard SplitMix64 ones (Steele, Lea & Flood).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Independent substream for replication `index` of a seeded experiment.
    /// The substream seed is the mixed combination of (seed, index), so
    /// substreams are decorrelated and the mapping is reproducible.
    static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
        SplitMix64 mixer(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
        return SplitMix64(mixer.next());
    }

private:
    std::uint64_t state_;
};

}  // namespace superres
