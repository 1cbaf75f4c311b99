#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "agan/layers.hpp"
#include "agan/optimizer.hpp"

namespace agan {

// Versioned binary container ("AGANCKPT", little-endian, CRC-32 footer) with
// named double blocks, named counters, the RNG state and a config snapshot.
// Serialization is byte-deterministic: save(load(save(x))) == save(x).
struct Checkpoint {
    static constexpr std::uint32_t kVersion = 1;

    std::string config_text;
    std::map<std::string, std::vector<double>> blocks;
    std::map<std::string, std::uint64_t> counters;
    std::array<std::uint64_t, 4> rng_state{};
    bool has_rng_state = false;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);

    // Copies net parameters into blocks under the prefix ("generator", ...).
    void store_params(const std::string& prefix, const std::vector<ParamRef>& params);
    // Restores into live parameter refs; every block must match by name and
    // size, otherwise CheckpointError.
    void load_params(const std::string& prefix, const std::vector<ParamRef>& params) const;
    bool has_prefix(const std::string& prefix) const;

    void store_adam(const std::string& prefix, const AdamState& st);
    AdamState load_adam(const std::string& prefix) const;

    // True when every parameter block belongs to the generator or the
    // discriminator (or their optimizer moments): the structural teacher-free
    // property of the adaptation inputs.
    bool teacher_free() const;
};

}  // namespace agan
