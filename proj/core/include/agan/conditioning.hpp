#pragma once

#include <array>
#include <vector>

#include "agan/layers.hpp"
#include "agan/tensor.hpp"

namespace agan {

// Upsamples frame-rate mel features to sample rate with four transposed
// convolution stages (linear activations, kernel = 2*stride). The stride
// product must equal the hop, so output length is exactly frames * hop.
class ConditionUpsampler {
  public:
    struct Trace {
        std::array<Tensor2, 4> inputs;  // input to each stage
    };

    ConditionUpsampler() = default;
    ConditionUpsampler(int n_mels, int hidden_ch, int out_ch, int hop,
                       const std::array<int, 4>& strides, Rng& rng);

    // Splits hop into four factors, largest first (256 -> 4,4,4,4;
    // 64 -> 4,4,2,2). ConfigError if hop cannot be factored.
    static std::array<int, 4> default_strides(int hop);

    Tensor2 forward(const Tensor2& mel, Trace* trace = nullptr) const;
    // Accumulates parameter gradients; optionally also d(output)/d(mel).
    void backward(const Trace& trace, const Tensor2& gout, Tensor2* gmel = nullptr);

    void zero_grad();
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out);
    int param_count() const;

    int hop() const { return hop_; }
    int out_channels() const { return layers_.back().out_ch; }
    const std::array<int, 4>& strides() const { return strides_; }
    std::vector<ConvTranspose1d>& layers() { return layers_; }

  private:
    int hop_ = 0;
    std::array<int, 4> strides_{};
    std::vector<ConvTranspose1d> layers_;
};

}  // namespace agan
