#include "agan/conditioning.hpp"

#include <cmath>

#include "agan/errors.hpp"

namespace agan {

std::array<int, 4> ConditionUpsampler::default_strides(int hop) {
    if (hop < 1) throw ConfigError("ConditionUpsampler: hop must be >= 1");
    std::array<int, 4> s{1, 1, 1, 1};
    int remaining = hop;
    for (int i = 0; i < 4; ++i) {
        const int left = 4 - i;
        const int target =
            static_cast<int>(std::ceil(std::pow(static_cast<double>(remaining), 1.0 / left) - 1e-9));
        int pick = 0;
        for (int cand = std::max(1, target); cand <= remaining; ++cand) {
            if (remaining % cand == 0) {
                pick = cand;
                break;
            }
        }
        if (pick == 0) throw ConfigError("ConditionUpsampler: cannot factor hop into 4 strides");
        s[static_cast<std::size_t>(i)] = pick;
        remaining /= pick;
    }
    if (remaining != 1) throw ConfigError("ConditionUpsampler: cannot factor hop into 4 strides");
    return s;
}

ConditionUpsampler::ConditionUpsampler(int n_mels, int hidden_ch, int out_ch, int hop,
                                       const std::array<int, 4>& strides, Rng& rng)
    : hop_(hop), strides_(strides) {
    long prod = 1;
    for (int s : strides) prod *= s;
    if (prod != hop)
        throw ConfigError("ConditionUpsampler: stride product " + std::to_string(prod) +
                          " != hop " + std::to_string(hop));
    int in_ch = n_mels;
    for (int i = 0; i < 4; ++i) {
        const int oc = (i == 3) ? out_ch : hidden_ch;
        const int s = strides_[static_cast<std::size_t>(i)];
        layers_.emplace_back(in_ch, oc, 2 * s, s);
        layers_.back().init_uniform(rng);
        in_ch = oc;
    }
}

Tensor2 ConditionUpsampler::forward(const Tensor2& mel, Trace* trace) const {
    if (mel.rows < 1) throw ShapeError("ConditionUpsampler: need at least one mel frame");
    Tensor2 h = mel;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (trace) trace->inputs[i] = h;
        h = layers_[i].forward(h);
    }
    return h;
}

void ConditionUpsampler::backward(const Trace& trace, const Tensor2& gout, Tensor2* gmel) {
    Tensor2 g = gout;
    for (int i = 3; i >= 0; --i) {
        const Tensor2& x = trace.inputs[static_cast<std::size_t>(i)];
        Tensor2 gx(x.rows, x.cols);
        layers_[static_cast<std::size_t>(i)].backward(x, g, &gx);
        g = std::move(gx);
    }
    if (gmel) {
        if (gmel->rows != g.rows || gmel->cols != g.cols)
            throw ShapeError("ConditionUpsampler: gmel shape mismatch");
        for (std::size_t i = 0; i < g.v.size(); ++i) gmel->v[i] += g.v[i];
    }
}

void ConditionUpsampler::zero_grad() {
    for (auto& l : layers_) l.zero_grad();
}

void ConditionUpsampler::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    for (std::size_t i = 0; i < layers_.size(); ++i)
        layers_[i].collect_params(param_join(prefix, "up" + std::to_string(i)), out);
}

int ConditionUpsampler::param_count() const {
    int n = 0;
    for (const auto& l : layers_) n += l.param_count();
    return n;
}

}  // namespace agan
