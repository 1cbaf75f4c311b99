#pragma once

#include <array>
#include <cstdint>

namespace agan {

// xoshiro256** with splitmix64 seeding. Self-contained so that streams are
// identical across platforms and the full state (4 words) can be embedded in
// checkpoints; std::mt19937 distributions are implementation-defined, which
// would break bit-reproducible resume.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // [0, 1)
    double uniform01();
    // [lo, hi)
    double uniform(double lo, double hi);
    // {0, ..., n-1}; n >= 1
    int uniform_int(int n);
    // standard normal, Box-Muller without a cached spare so state stays
    // exactly four words
    double normal();
    // standard logistic (location 0, scale 1)
    double logistic();

    std::array<std::uint64_t, 4> state() const { return s_; }
    void set_state(const std::array<std::uint64_t, 4>& s) { s_ = s; }

  private:
    std::array<std::uint64_t, 4> s_{};
};

// Derives an independent stream seed; used to split master seeds into
// per-purpose streams (corpus, training, evaluation).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id);

}  // namespace agan
