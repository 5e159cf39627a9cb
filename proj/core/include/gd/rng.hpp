#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gd {

// Deterministic RNG. All randomness in a run flows from one root seed via
// named substreams, so individual components (data split, weight init,
// random-search draws) can be reproduced in isolation.
//
// Draw helpers avoid std::uniform_*_distribution on purpose: their output
// is implementation-defined, while mt19937_64 itself is pinned by the
// standard. Everything here is bit-stable across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    static Rng substream(std::uint64_t seed, std::string_view name);
    static Rng substream(std::uint64_t seed, std::string_view name, std::uint64_t index);

    std::uint64_t next() { return gen_(); }

    // Uniform integer in [0, bound) via Lemire's multiply-shift reduction.
    std::uint64_t below(std::uint64_t bound);

    // Uniform real in [lo, hi) built from the top 53 bits.
    double uniform(double lo, double hi);

private:
    std::mt19937_64 gen_;
};

std::uint64_t fnv1a64(std::string_view data);
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace gd
