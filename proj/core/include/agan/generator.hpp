#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "agan/conditioning.hpp"
#include "agan/layers.hpp"
#include "agan/spectral.hpp"

namespace agan {

// Input noise for the flow; i.i.d. standard logistic draws, one per output
// sample.
struct NoiseSample {
    std::vector<double> z;
};

NoiseSample draw_logistic_noise(int length, Rng& rng);

struct FlowStageConfig {
    int kernel = 2;
    std::vector<int> dilations;  // e.g. 1,2,4,...,128
    int residual_channels = 32;
    int skip_channels = 32;
    int cond_channels = 16;
    double logscale_clamp = 7.0;
};

// One affine flow stage: x_t = z_t * sigma_t + mu_t where (mu_t, log sigma_t)
// come from a gated causal dilated convolution stack over z_{<t} (the input
// is shifted one sample before the stack, making the dependence strict) and
// the sample-rate condition track. The (mu, log sigma) head is zero-built so
// a fresh stage is exactly the identity map.
class FlowStage {
  public:
    struct Trace {
        Tensor2 z;       // stage input, T x 1
        Tensor2 xshift;  // input delayed by one sample
        std::vector<Tensor2> h;    // inputs to each dilated conv (h[0] after in_proj)
        std::vector<Tensor2> u;    // pre-gate activations, T x 2R
        std::vector<Tensor2> act;  // post-gate activations, T x R
        Tensor2 skipsum;
        Tensor2 p1;       // head hidden pre-activation
        Tensor2 mu_ls;    // raw head output, T x 2
        std::vector<double> sigma;
    };

    FlowStage() = default;
    FlowStage(const FlowStageConfig& cfg, Rng& rng);

    // Returns the transformed signal; fills the trace when given.
    std::vector<double> forward(std::span<const double> z, const Tensor2& cond,
                                Trace* trace = nullptr) const;

    // The affine parameters only (clamped log-scale), for causality tests.
    void affine_params(std::span<const double> z, const Tensor2& cond, std::vector<double>* mu,
                       std::vector<double>* log_sigma) const;

    // Accumulates parameter gradients; returns d(loss)/d(z) and adds the
    // condition gradient into gcond. cond must be the tensor given to forward.
    std::vector<double> backward(const Trace& trace, std::span<const double> gout,
                                 const Tensor2& cond, Tensor2* gcond);

    int receptive_field() const;
    void zero_grad();
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out);
    int param_count() const;

    const FlowStageConfig& config() const { return cfg_; }

  private:
    friend class IafGenerator;

    FlowStageConfig cfg_;
    Conv1d in_proj_;  // 1 -> R, kernel 1
    struct GatedLayer {
        Conv1d dil;   // R -> 2R, causal
        Conv1d cond;  // C -> 2R, kernel 1, no bias
        Conv1d res;   // R -> R, kernel 1
        Conv1d skip;  // R -> S, kernel 1
    };
    std::vector<GatedLayer> layers_;
    Conv1d head1_;  // S -> S, kernel 1
    Conv1d head2_;  // S -> 2, kernel 1, zero-built
};

struct IafGeneratorConfig {
    int stages = 2;
    FlowStageConfig stage;
    int upsampler_hidden = 32;

    static std::vector<int> doubling_dilations(int layers);
};

// Noise-to-waveform generator: a composition of affine flow stages sharing
// one upsampled condition track. All timesteps of a stage are computed in a
// single pass.
class IafGenerator {
  public:
    struct Trace {
        ConditionUpsampler::Trace up;
        Tensor2 cond;
        std::vector<FlowStage::Trace> stages;
    };

    IafGenerator() = default;
    IafGenerator(const IafGeneratorConfig& cfg, int n_mels, int hop, Rng& rng);

    // Requires z.size() == mel.frames() * hop.
    std::vector<double> forward_parallel(std::span<const double> z, const MelSpectrogram& mel,
                                         Trace* trace = nullptr) const;

    // Timestep-at-a-time oracle: re-evaluates the stack on each prefix with
    // independent naive loops. Semantically identical to forward_parallel.
    std::vector<double> forward_sequential(std::span<const double> z,
                                           const MelSpectrogram& mel) const;

    // Draws logistic noise from the seed and clamps the output to [-1, 1]
    // (synthesis only; training paths use forward_parallel unclamped).
    Waveform sample(const MelSpectrogram& mel, std::uint64_t seed, int sample_rate) const;

    // Accumulates gradients for every parameter (stages and upsampler).
    void backward(const Trace& trace, std::span<const double> gout);

    int receptive_field_per_stage() const;
    int stage_count() const { return static_cast<int>(stages_.size()); }
    FlowStage& stage(int i) { return stages_[static_cast<std::size_t>(i)]; }
    ConditionUpsampler& upsampler() { return upsampler_; }
    const ConditionUpsampler& upsampler() const { return upsampler_; }

    void zero_grad();
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out);
    int param_count() const;
    int hop() const { return upsampler_.hop(); }

  private:
    IafGeneratorConfig cfg_;
    ConditionUpsampler upsampler_;
    std::vector<FlowStage> stages_;
};

}  // namespace agan
