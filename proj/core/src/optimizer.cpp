#include "agan/optimizer.hpp"

#include <cmath>

#include "agan/errors.hpp"

namespace agan {

double noam_lr(long step, double base_lr, long warmup) {
    if (step < 1) throw DomainError("noam_lr: step must be >= 1");
    if (warmup < 1) throw DomainError("noam_lr: warmup must be >= 1");
    const double s = static_cast<double>(step);
    const double w = static_cast<double>(warmup);
    return base_lr * std::sqrt(w) * std::min(1.0 / std::sqrt(s), s * std::pow(w, -1.5));
}

void adam_step(const std::vector<ParamRef>& params, AdamState& state, double lr,
               const AdamConfig& cfg) {
    if (lr <= 0.0) throw DomainError("adam_step: lr must be positive");
    for (const auto& p : params) {
        if (p.grad->size() != p.value->size())
            throw ShapeError("adam_step: grad/value size mismatch in " + p.name);
        if (!all_finite(*p.grad))
            throw DataError("adam_step: non-finite gradient in block " + p.name + " at step " +
                            std::to_string(state.t + 1));
    }

    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

    for (const auto& p : params) {
        AdamState::Slot& slot = state.slots[p.name];
        if (slot.m.empty()) {
            slot.m.assign(p.value->size(), 0.0);
            slot.v.assign(p.value->size(), 0.0);
        } else if (slot.m.size() != p.value->size()) {
            throw ShapeError("adam_step: stale moment shapes for " + p.name);
        }
        for (std::size_t i = 0; i < p.value->size(); ++i) {
            const double g = (*p.grad)[i];
            slot.m[i] = cfg.beta1 * slot.m[i] + (1.0 - cfg.beta1) * g;
            slot.v[i] = cfg.beta2 * slot.v[i] + (1.0 - cfg.beta2) * g * g;
            const double mhat = slot.m[i] / bc1;
            const double vhat = slot.v[i] / bc2;
            (*p.value)[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

}  // namespace agan
