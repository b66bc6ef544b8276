#pragma once

#include <cstdint>

namespace kroncirc {

// splitmix64: deterministic across platforms, cheap to seed.  Used wherever
// reproducible randomness is required (verification trials, annealing).
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound); bound > 0.  Modulo bias is irrelevant for the
    // bounds used here and keeps the stream platform-independent.
    std::uint64_t below(std::uint64_t bound) { return next() % bound; }

    // Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// Derives the seed for trial number `index` from a master seed; distinct and
// deterministic per index.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    SplitMix64 g(master ^ (0x517cc1b727220a95ull * (index + 1)));
    return g.next();
}

}  // namespace kroncirc
