#include "agan/rng.hpp"

#include <cmath>

namespace agan {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

int Rng::uniform_int(int n) {
    // modulo bias is negligible for the small n used here
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
}

double Rng::normal() {
    // open-interval uniforms keep log() and the Box-Muller radius finite
    const double u1 = (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

double Rng::logistic() {
    const double u = (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    return std::log(u / (1.0 - u));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
    std::uint64_t x = master ^ (0xA0761D6478BD642FULL + stream_id * 0xE7037ED1A0B428DBULL);
    return splitmix64(x);
}

}  // namespace agan
