#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "agan/layers.hpp"

namespace agan {

// base_lr * sqrt(warmup) * min(step^-1/2, step * warmup^-3/2); linear ramp to
// base_lr at step == warmup, inverse-sqrt decay after. step >= 1.
double noam_lr(long step, double base_lr, long warmup);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam; moment slots are keyed by parameter block name so the
// state survives checkpoints byte-exactly.
struct AdamState {
    struct Slot {
        std::vector<double> m, v;
    };
    std::map<std::string, Slot> slots;
    long t = 0;
};

// One update over all blocks. Throws DataError before touching any parameter
// if a gradient is non-finite.
void adam_step(const std::vector<ParamRef>& params, AdamState& state, double lr,
               const AdamConfig& cfg);

}  // namespace agan
