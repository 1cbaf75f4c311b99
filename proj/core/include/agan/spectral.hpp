#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "agan/audio.hpp"
#include "agan/tensor.hpp"

namespace agan {

enum class WindowKind { hann, rect };

WindowKind window_from_string(const std::string& name);
std::string window_to_string(WindowKind w);

// Analysis setup. Defaults follow the full-scale acoustic configuration
// (frame 2048, hop 256, 80 mels); desk-scale runs override via config.
struct SpectralConfig {
    int frame_length = 2048;
    int hop = 256;
    WindowKind window = WindowKind::hann;
    int n_mels = 80;
    double eps = 1e-7;   // log flooring
    double fmin = 0.0;   // Hz
    double fmax = 0.0;   // Hz; 0 means Nyquist
    bool log_mel = true; // log-compress mel features

    int bins() const { return frame_length / 2 + 1; }
    void validate() const;
};

// Frames start at multiples of hop with no padding; trailing partial frames
// are dropped: frame_count = (len - frame_length) / hop + 1.
int stft_frame_count(int length, const SpectralConfig& cfg);

struct ComplexSpectrogram {
    // frames x bins, bins = frame_length/2 + 1
    std::vector<std::vector<std::complex<double>>> values;
    SpectralConfig config;

    int frames() const { return static_cast<int>(values.size()); }
    int bins() const { return values.empty() ? 0 : static_cast<int>(values[0].size()); }
};

struct MelSpectrogram {
    Tensor2 values;  // frames x n_mels
    SpectralConfig config;
    bool log_compressed = false;

    int frames() const { return values.rows; }
};

ComplexSpectrogram stft(std::span<const double> x, const SpectralConfig& cfg);
ComplexSpectrogram stft(const Waveform& x, const SpectralConfig& cfg);

// Elementwise modulus, frames x bins.
Tensor2 magnitude(const ComplexSpectrogram& s);

// Triangular mel filterbank, n_mels x bins. HTK mel scale
// (mel = 2595 log10(1 + f/700)), unnormalized triangles.
Tensor2 mel_filterbank(const SpectralConfig& cfg, int sample_rate);

// Applies a filterbank to a magnitude spectrogram: (frames x bins) -> (frames x n_mels).
Tensor2 apply_mel_filterbank(const Tensor2& mag, const Tensor2& fbank);

MelSpectrogram mel_spectrogram(const Waveform& x, const SpectralConfig& cfg);

// Adjoint of the windowed framed real DFT: scatters a per-(frame,bin)
// complex gradient back onto the time axis. Backbone of the spectral-loss
// gradient.
void stft_adjoint(const std::vector<std::vector<std::complex<double>>>& grad_spec,
                  const SpectralConfig& cfg, std::span<double> grad_time_accum);

// Binary mel container used by the synth command (magic "MELB"): frame count,
// mel count, log flag, row-major doubles.
void save_mel(const MelSpectrogram& m, int sample_rate, const std::string& path);
MelSpectrogram load_mel(const std::string& path, int* sample_rate_out);

}  // namespace agan
