#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace qkdvault {

// splitmix64: used to scramble user seeds and derive independent streams.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic random source. All protocol randomness flows through
// instances of this class; there is no ambient randomness anywhere in the
// library. mt19937_64 seeded with a single scrambled 64-bit value is fully
// specified by the standard, and uniform01() avoids
// std::uniform_real_distribution on purpose (its output is
// implementation-defined), so equal seeds give equal streams everywhere.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(splitmix64(seed)) {}

    uint64_t next_u64() { return engine_(); }

    // One fair bit.
    int bit() { return static_cast<int>(engine_() & 1u); }

    // Uniform double in [0,1) with 53 bits of precision.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Uniform integer in [0, n). Modulo bias is below 2^-50 for the sizes
    // used here and keeps the draw count per call fixed.
    uint64_t below(uint64_t n) { return engine_() % n; }

    // Independent stream id derivation: derive(seed, k) and derive(seed, j)
    // give unrelated generator seeds for k != j.
    static uint64_t derive(uint64_t seed, uint64_t stream) {
        return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
    }

private:
    std::mt19937_64 engine_;
};

// k distinct indices drawn uniformly from [0, n), returned sorted ascending.
std::vector<uint32_t> sample_without_replacement(size_t n, size_t k, Rng& rng);

// Seeded Fisher-Yates shuffle.
template <typename T>
void shuffle_values(std::vector<T>& values, Rng& rng) {
    for (size_t i = values.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.below(i));
        std::swap(values[i - 1], values[j]);
    }
}

} // namespace qkdvault
