#pragma once

#include <string>
#include <vector>

namespace agan {

// Mono waveform. Samples are nominally in [-1, 1]; save_wav clips before
// quantizing, synthesis clamps, but intermediate model outputs may exceed
// the range.
struct Waveform {
    std::vector<double> samples;
    int sample_rate = 0;

    int length() const { return static_cast<int>(samples.size()); }
};

// 16-bit PCM mono WAV only. Unknown RIFF chunks are skipped on load;
// any other encoding or channel count raises FormatError.
Waveform load_wav(const std::string& path);

// Clips to [-1, 1], quantizes to 16-bit. Round-trip error <= 2^-15 per sample.
void save_wav(const Waveform& x, const std::string& path);

}  // namespace agan
