#pragma once

#include <cstdint>
#include <vector>

#include "agan/audio.hpp"

namespace agan {

// One synthetic "speaker": a timbre family with an f0 range, a harmonic
// amplitude profile and an amplitude envelope family. Distinct specs give
// corpora with measurably different average spectral envelopes.
struct SpeakerSpec {
    double f0_min = 110.0;        // Hz
    double f0_max = 160.0;        // Hz
    double harmonic_decay = 1.0;  // amplitude of harmonic h scales as h^-decay
    double even_harmonic_gain = 1.0;
    double vibrato_rate_hz = 5.0;
    double vibrato_cents = 30.0;  // peak f0 deviation
    double attack_frac = 0.1;     // raised-cosine attack length as clip fraction
    double release_frac = 0.1;
    double noise_level = 0.002;   // white-noise floor amplitude
    int n_harmonics = 24;         // capped at Nyquist per clip

    void validate() const;
};

// Deterministic per (spec, seed, sample_rate, n_clips, clip_len): call order
// and thread do not matter.
std::vector<Waveform> synth_corpus(const SpeakerSpec& spec, int n_clips, int clip_len,
                                   int sample_rate, std::uint64_t seed);

}  // namespace agan
