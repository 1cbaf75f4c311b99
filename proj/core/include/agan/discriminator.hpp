#pragma once

#include <span>
#include <string>
#include <vector>

#include "agan/conditioning.hpp"
#include "agan/layers.hpp"
#include "agan/spectral.hpp"

namespace agan {

enum class DilationSchedule { literal, doubling };

DilationSchedule dilation_schedule_from_string(const std::string& s);
std::string dilation_schedule_to_string(DilationSchedule s);

struct DiscriminatorConfig {
    int channels = 64;
    DilationSchedule schedule = DilationSchedule::literal;
    int cond_channels = 16;
    int upsampler_hidden = 32;
};

// Conditional real/fake scorer over raw waveforms: ten non-causal dilated
// conv layers, kernel 3, LeakyReLU(0.2) after every layer except the linear
// per-timestep output. Upsampled mel features are concatenated to the
// waveform as extra input channels. The layer count, kernel and slope are
// architecture constants, not knobs.
class DiscriminatorNet {
  public:
    static constexpr int kLayers = 10;
    static constexpr int kKernel = 3;
    static constexpr double kLeakyAlpha = 0.2;

    struct Score {
        std::vector<double> per_timestep;
        double pooled = 0.0;  // mean of per-timestep scores
    };

    struct Trace {
        ConditionUpsampler::Trace up;
        Tensor2 cond;
        Tensor2 input;            // waveform + condition channels
        std::vector<Tensor2> pre; // pre-activation of each dilated layer
        Tensor2 last;             // post-activation input to the output layer
    };

    DiscriminatorNet() = default;
    DiscriminatorNet(const DiscriminatorConfig& cfg, int n_mels, int hop, Rng& rng);

    // Requires x.size() == mel.frames() * hop.
    Score score(std::span<const double> x, const MelSpectrogram& mel,
                Trace* trace = nullptr) const;

    // Backprop from per-timestep score gradients. Accumulates parameter
    // gradients (including the upsampler's); optionally returns
    // d(loss)/d(waveform).
    void backward(const Trace& trace, std::span<const double> g_scores,
                  std::vector<double>* gx = nullptr);

    int receptive_field() const;
    const std::vector<int>& dilations() const { return dilations_; }
    int layer_count() const { return static_cast<int>(convs_.size()); }
    int kernel_size(int layer) const { return convs_[static_cast<std::size_t>(layer)].kernel; }
    double leaky_alpha() const { return kLeakyAlpha; }

    void zero_grad();
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out);
    int param_count() const;
    ConditionUpsampler& upsampler() { return upsampler_; }
    std::vector<Conv1d>& conv_layers() { return convs_; }
    Conv1d& output_layer() { return out_; }

  private:
    DiscriminatorConfig cfg_;
    ConditionUpsampler upsampler_;
    std::vector<Conv1d> convs_;  // 10 dilated layers
    Conv1d out_;                 // channels -> 1, kernel 1, linear
    std::vector<int> dilations_;
};

}  // namespace agan
