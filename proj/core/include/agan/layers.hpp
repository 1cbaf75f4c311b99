#pragma once

#include <string>
#include <vector>

#include "agan/rng.hpp"
#include "agan/tensor.hpp"

namespace agan {

// Named view of one learnable block; optimizers and checkpoints address
// parameters through these.
struct ParamRef {
    std::string name;
    std::vector<double>* value;
    std::vector<double>* grad;
};

inline std::string param_join(const std::string& prefix, const std::string& name) {
    return prefix.empty() ? name : prefix + "." + name;
}

// 1-D convolution over (time x channels) tensors. Causal mode reaches back
// only (taps at t - d*(k-1) .. t); same mode is zero-padded and symmetric
// (odd kernel). Weight layout: w[oc][ic][j].
struct Conv1d {
    enum class Pad { causal, same };

    int in_ch = 0;
    int out_ch = 0;
    int kernel = 1;
    int dilation = 1;
    Pad pad = Pad::causal;
    bool has_bias = true;

    std::vector<double> w, b;
    std::vector<double> gw, gb;

    Conv1d() = default;
    Conv1d(int in_ch, int out_ch, int kernel, int dilation, Pad pad, bool has_bias = true);

    void init_uniform(Rng& rng);
    void init_zero();

    Tensor2 forward(const Tensor2& x) const;
    // Accumulates gw/gb; if gx is non-null, accumulates the input gradient.
    void backward(const Tensor2& x, const Tensor2& gout, Tensor2* gx);

    void zero_grad();
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out);
    int param_count() const;

  private:
    int tap_offset(int j) const;
};

// 1-D transposed convolution with stride s and kernel k >= s. The raw output
// of length (F-1)*s + k is cropped by (k - s) samples, floor((k-s)/2) at the
// head, so the result has exactly F*s rows.
struct ConvTranspose1d {
    int in_ch = 0;
    int out_ch = 0;
    int kernel = 1;
    int stride = 1;

    std::vector<double> w, b;  // w[oc][ic][j]
    std::vector<double> gw, gb;

    ConvTranspose1d() = default;
    ConvTranspose1d(int in_ch, int out_ch, int kernel, int stride);

    void init_uniform(Rng& rng);

    Tensor2 forward(const Tensor2& x) const;
    void backward(const Tensor2& x, const Tensor2& gout, Tensor2* gx);

    void zero_grad();
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out);
    int param_count() const;

    int head_crop() const { return (kernel - stride) / 2; }
};

// FNV-1a over the raw bytes of all referenced blocks, in list order. Used by
// the freeze-contract tests.
std::uint64_t param_hash(const std::vector<ParamRef>& params);

bool all_finite(const std::vector<double>& v);

}  // namespace agan
