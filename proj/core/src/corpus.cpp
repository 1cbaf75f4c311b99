#include "agan/corpus.hpp"

#include <algorithm>
#include <cmath>

#include "agan/errors.hpp"
#include "agan/rng.hpp"

namespace agan {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void SpeakerSpec::validate() const {
    if (f0_min <= 0.0 || f0_max < f0_min)
        throw ConfigError("SpeakerSpec: f0 range is empty or non-positive");
    if (n_harmonics < 1) throw ConfigError("SpeakerSpec: n_harmonics must be >= 1");
    if (attack_frac < 0.0 || release_frac < 0.0 || attack_frac + release_frac > 1.0)
        throw ConfigError("SpeakerSpec: invalid envelope fractions");
    if (noise_level < 0.0) throw ConfigError("SpeakerSpec: negative noise level");
    if (vibrato_cents < 0.0 || vibrato_rate_hz < 0.0)
        throw ConfigError("SpeakerSpec: negative vibrato parameters");
}

std::vector<Waveform> synth_corpus(const SpeakerSpec& spec, int n_clips, int clip_len,
                                   int sample_rate, std::uint64_t seed) {
    spec.validate();
    if (n_clips < 1) throw ConfigError("synth_corpus: n_clips must be >= 1");
    if (clip_len < 1) throw ConfigError("synth_corpus: clip_len must be >= 1");
    if (sample_rate <= 0) throw ConfigError("synth_corpus: sample_rate must be positive");

    std::vector<Waveform> out;
    out.reserve(static_cast<std::size_t>(n_clips));
    for (int c = 0; c < n_clips; ++c) {
        // per-clip stream so corpora are stable under any call pattern
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));

        const double f0 = rng.uniform(spec.f0_min, spec.f0_max);
        const double vib_phase = rng.uniform(0.0, kTwoPi);
        const double vib_ratio = std::pow(2.0, spec.vibrato_cents / 1200.0) - 1.0;

        // harmonic amplitudes: h^-decay profile with an even/odd balance
        const double f0_peak = f0 * (1.0 + vib_ratio);
        const int h_cap = std::max(1, static_cast<int>(0.45 * sample_rate / f0_peak));
        const int nh = std::min(spec.n_harmonics, h_cap);
        std::vector<double> amp(nh), phase(nh);
        for (int h = 0; h < nh; ++h) {
            amp[h] = std::pow(h + 1.0, -spec.harmonic_decay);
            if ((h + 1) % 2 == 0) amp[h] *= spec.even_harmonic_gain;
            phase[h] = rng.uniform(0.0, kTwoPi);
        }

        const int attack = static_cast<int>(spec.attack_frac * clip_len);
        const int release = static_cast<int>(spec.release_frac * clip_len);

        Waveform w;
        w.sample_rate = sample_rate;
        w.samples.resize(static_cast<std::size_t>(clip_len));
        double peak = 0.0;
        for (int n = 0; n < clip_len; ++n) {
            const double t = static_cast<double>(n) / sample_rate;
            const double vib = 1.0 + vib_ratio * std::sin(kTwoPi * spec.vibrato_rate_hz * t + vib_phase);
            const double inst_f0 = f0 * vib;
            double s = 0.0;
            for (int h = 0; h < nh; ++h) {
                phase[h] += kTwoPi * inst_f0 * (h + 1) / sample_rate;
                s += amp[h] * std::sin(phase[h]);
            }
            s += spec.noise_level * rng.normal();
            double env = 1.0;
            if (n < attack) env = 0.5 - 0.5 * std::cos(kTwoPi * 0.5 * n / attack);
            else if (n >= clip_len - release)
                env = 0.5 - 0.5 * std::cos(kTwoPi * 0.5 * (clip_len - 1 - n) / release);
            w.samples[static_cast<std::size_t>(n)] = env * s;
            peak = std::max(peak, std::abs(w.samples[static_cast<std::size_t>(n)]));
        }
        if (peak > 0.0) {
            const double gain = 0.9 / peak;
            for (auto& s : w.samples) s *= gain;
        }
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace agan
