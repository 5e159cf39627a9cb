#include "gd/rng.hpp"

namespace gd {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng Rng::substream(std::uint64_t seed, std::string_view name) {
    return Rng(splitmix64(seed ^ fnv1a64(name)));
}

Rng Rng::substream(std::uint64_t seed, std::string_view name, std::uint64_t index) {
    return Rng(splitmix64(splitmix64(seed ^ fnv1a64(name)) + index));
}

std::uint64_t Rng::below(std::uint64_t bound) {
    // Lemire's nearly-divisionless bounded draw.
    std::uint64_t x = gen_();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
        std::uint64_t threshold = -bound % bound;
        while (lo < threshold) {
            x = gen_();
            m = static_cast<__uint128_t>(x) * bound;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double Rng::uniform(double lo, double hi) {
    double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

}  // namespace gd
