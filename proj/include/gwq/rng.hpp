#pragma once

#include <cstdint>
#include <random>

namespace gwq {

// Seeded random stream with stable substream derivation.
//
// Substreams are derived from the stream's seed (not from its evolving
// state), so pre-assigning one substream per unit of parallel work yields
// results that do not depend on execution order. Uniform doubles use the
// top 53 bits of the generator output, giving values in (0, 1).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), eng_(mix(seed)) {}

    // Child stream with an independent, reproducible seed.
    RngStream substream(std::uint64_t id) const {
        std::uint64_t s = seed_ + 0x9e3779b97f4a7c15ull * (id + 1);
        return RngStream(mix(s));
    }

    std::uint64_t raw() { return eng_(); }

    double uniform() {
        // (0,1): never returns 0 or 1 exactly
        while (true) {
            double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        // splitmix64 finalizer
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

} // namespace gwq
