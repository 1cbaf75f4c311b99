#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "agan/audio.hpp"
#include "agan/corpus.hpp"
#include "agan/errors.hpp"
#include "agan/spectral.hpp"
#include "test_util.hpp"

using namespace agan;

namespace {

SpectralConfig desk_cfg() {
    SpectralConfig cfg;
    cfg.frame_length = 512;
    cfg.hop = 64;
    return cfg;
}

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("stft defaults match the analysis setup") {
    SpectralConfig cfg;
    CHECK(cfg.frame_length == 2048);
    CHECK(cfg.hop == 256);
    CHECK(cfg.n_mels == 80);
    CHECK(cfg.bins() == 1025);
}

TEST_CASE("stft of zero signal is all zeros") {
    SpectralConfig cfg = desk_cfg();
    std::vector<double> x(1024, 0.0);
    const ComplexSpectrogram s = stft(x, cfg);
    CHECK(s.frames() == (1024 - 512) / 64 + 1);
    CHECK(s.bins() == 257);
    for (const auto& frame : s.values)
        for (const auto& v : frame) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("stft rejects signals shorter than one frame") {
    SpectralConfig cfg = desk_cfg();
    std::vector<double> x(511, 0.1);
    CHECK_THROWS_AS(stft(x, cfg), DataError);
}

TEST_CASE("bin-centered sine concentrates energy in one bin per frame") {
    SpectralConfig cfg = desk_cfg();
    cfg.window = WindowKind::rect;
    const int k0 = 37;
    const int sr = 8000;
    const double f = static_cast<double>(k0) * sr / cfg.frame_length;
    std::vector<double> x(2048);
    for (std::size_t n = 0; n < x.size(); ++n)
        x[n] = std::sin(2.0 * testutil::kPi * f * static_cast<double>(n) / sr);

    const ComplexSpectrogram s = stft(x, cfg);
    for (int fr = 0; fr < s.frames(); ++fr) {
        double total = 0.0, peak = 0.0;
        for (int b = 0; b < s.bins(); ++b) {
            const double m2 = std::norm(s.values[fr][b]);
            total += m2;
            if (b == k0) peak = m2;
        }
        CHECK(peak / total > 0.999);
        // closed-form rectangular-window amplitude N/2
        CHECK(std::abs(s.values[fr][k0]) == doctest::Approx(cfg.frame_length / 2.0).epsilon(1e-9));
    }
}

TEST_CASE("stft matches the direct DFT oracle") {
    Rng rng(11);
    for (const int frame_length : {256, 300, 512}) {
        for (const bool hann : {true, false}) {
            SpectralConfig cfg;
            cfg.frame_length = frame_length;
            cfg.hop = frame_length / 4;
            cfg.window = hann ? WindowKind::hann : WindowKind::rect;
            const auto x = testutil::random_signal(frame_length * 3 + 17, rng);
            const ComplexSpectrogram s = stft(x, cfg);
            const auto oracle = testutil::dft_oracle(x, frame_length, cfg.hop, hann);
            REQUIRE(s.values.size() == oracle.size());
            double max_err = 0.0;
            for (std::size_t f = 0; f < oracle.size(); ++f)
                for (std::size_t b = 0; b < oracle[f].size(); ++b)
                    max_err = std::max(max_err, std::abs(s.values[f][b] - oracle[f][b]));
            CHECK(max_err < 1e-6);
        }
    }
}

TEST_CASE("stft is linear in its input") {
    Rng rng(12);
    SpectralConfig cfg = desk_cfg();
    const auto x = testutil::random_signal(1024, rng);
    std::vector<double> x3(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) x3[i] = 3.0 * x[i];
    const ComplexSpectrogram a = stft(x, cfg);
    const ComplexSpectrogram b = stft(x3, cfg);
    for (int f = 0; f < a.frames(); ++f)
        for (int k = 0; k < a.bins(); ++k)
            CHECK(std::abs(b.values[f][k] - 3.0 * a.values[f][k]) < 1e-9);
}

TEST_CASE("Parseval check with rectangular window") {
    Rng rng(13);
    SpectralConfig cfg = desk_cfg();
    cfg.window = WindowKind::rect;
    const auto x = testutil::random_signal(1024, rng);
    const ComplexSpectrogram s = stft(x, cfg);
    for (int f = 0; f < s.frames(); ++f) {
        double freq_energy = std::norm(s.values[f][0]) + std::norm(s.values[f][s.bins() - 1]);
        for (int b = 1; b < s.bins() - 1; ++b) freq_energy += 2.0 * std::norm(s.values[f][b]);
        double time_energy = 0.0;
        for (int n = 0; n < cfg.frame_length; ++n) {
            const double v = x[static_cast<std::size_t>(f * cfg.hop + n)];
            time_energy += v * v;
        }
        CHECK(freq_energy ==
              doctest::Approx(cfg.frame_length * time_energy).epsilon(1e-6));
    }
}

TEST_CASE("magnitude is the elementwise modulus") {
    SpectralConfig cfg = desk_cfg();
    ComplexSpectrogram s;
    s.config = cfg;
    s.values = {{{3.0, 4.0}, {0.0, 0.0}, {-1.0, 1.0}}};
    const Tensor2 m = magnitude(s);
    CHECK(m.at(0, 0) == doctest::Approx(5.0));
    CHECK(m.at(0, 1) == 0.0);
    CHECK(m.at(0, 2) == doctest::Approx(std::sqrt(2.0)));

    Rng rng(14);
    const auto x = testutil::random_signal(1024, rng);
    const ComplexSpectrogram sx = stft(x, cfg);
    const Tensor2 mx = magnitude(sx);
    for (int f = 0; f < sx.frames(); ++f)
        for (int b = 0; b < sx.bins(); ++b) {
            const double re = sx.values[f][b].real();
            const double im = sx.values[f][b].imag();
            CHECK(mx.at(f, b) == doctest::Approx(std::sqrt(re * re + im * im)).epsilon(1e-12));
        }
}

TEST_CASE("mel filterbank matches an independent construction") {
    SpectralConfig cfg = desk_cfg();
    const int sr = 8000;
    const Tensor2 fb = mel_filterbank(cfg, sr);
    REQUIRE(fb.rows == 80);
    REQUIRE(fb.cols == 257);

    // independent reimplementation of the HTK-mel triangles
    auto to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
    auto to_hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
    const double mel_hi = to_mel(sr / 2.0);
    std::vector<double> edges(82);
    for (int i = 0; i < 82; ++i) edges[i] = to_hz(mel_hi * i / 81.0);
    for (int m = 0; m < 80; ++m) {
        for (int b = 0; b < 257; ++b) {
            const double fhz = b * static_cast<double>(sr) / cfg.frame_length;
            double expect = 0.0;
            if (fhz > edges[m] && fhz < edges[m + 1])
                expect = (fhz - edges[m]) / (edges[m + 1] - edges[m]);
            else if (fhz >= edges[m + 1] && fhz < edges[m + 2])
                expect = (edges[m + 2] - fhz) / (edges[m + 2] - edges[m + 1]);
            CHECK(fb.at(m, b) == doctest::Approx(expect).epsilon(1e-12));
        }
    }

    // positive row sums and contiguous triangular support
    for (int m = 0; m < 80; ++m) {
        double sum = 0.0;
        int first = -1, last = -1;
        for (int b = 0; b < 257; ++b) {
            sum += fb.at(m, b);
            if (fb.at(m, b) > 0.0) {
                if (first < 0) first = b;
                last = b;
            }
        }
        CHECK(sum > 0.0);
        REQUIRE(first >= 0);
        for (int b = first; b <= last; ++b) CHECK(fb.at(m, b) > 0.0);
    }
}

TEST_CASE("mel spectrogram has n_mels columns and log floor on silence") {
    SpectralConfig cfg = desk_cfg();
    Waveform x;
    x.sample_rate = 8000;
    x.samples.assign(1024, 0.0);
    const MelSpectrogram mel = mel_spectrogram(x, cfg);
    CHECK(mel.values.cols == 80);
    CHECK(mel.log_compressed);
    for (double v : mel.values.v) CHECK(v == doctest::Approx(std::log(cfg.eps)));
}

TEST_CASE("mel filterbank application is linear before log compression") {
    Rng rng(15);
    SpectralConfig cfg = desk_cfg();
    const Tensor2 fb = mel_filterbank(cfg, 8000);
    Tensor2 mag(5, cfg.bins());
    for (auto& v : mag.v) v = rng.uniform(0.0, 2.0);
    Tensor2 mag2 = mag;
    for (auto& v : mag2.v) v *= 2.5;
    const Tensor2 a = apply_mel_filterbank(mag, fb);
    const Tensor2 b = apply_mel_filterbank(mag2, fb);
    for (std::size_t i = 0; i < a.v.size(); ++i)
        CHECK(b.v[i] == doctest::Approx(2.5 * a.v[i]).epsilon(1e-12));
}

TEST_CASE("wav round trip stays within 16-bit quantization") {
    const std::string path = tmp_path("agan_test_ramp.wav");
    Waveform x;
    x.sample_rate = 8000;
    x.samples.resize(4000);
    for (std::size_t i = 0; i < x.samples.size(); ++i)
        x.samples[i] = -1.0 + 2.0 * static_cast<double>(i) / (x.samples.size() - 1);
    save_wav(x, path);
    const Waveform y = load_wav(path);
    REQUIRE(y.samples.size() == x.samples.size());
    CHECK(y.sample_rate == 8000);
    double max_err = 0.0;
    for (std::size_t i = 0; i < x.samples.size(); ++i)
        max_err = std::max(max_err, std::abs(x.samples[i] - y.samples[i]));
    CHECK(max_err <= std::pow(2.0, -15.0));
    std::filesystem::remove(path);
}

TEST_CASE("one second of 8 kHz sine loads back with 8000 samples") {
    const std::string path = tmp_path("agan_test_sine.wav");
    Waveform x;
    x.sample_rate = 8000;
    x.samples.resize(8000);
    for (std::size_t i = 0; i < x.samples.size(); ++i)
        x.samples[i] = 0.5 * std::sin(2.0 * testutil::kPi * 440.0 * static_cast<double>(i) / 8000.0);
    save_wav(x, path);
    const Waveform y = load_wav(path);
    CHECK(y.samples.size() == 8000);
    CHECK(y.sample_rate == 8000);
    std::filesystem::remove(path);
}

TEST_CASE("empty or malformed wav raises a format error") {
    const std::string path = tmp_path("agan_test_empty.wav");
    std::ofstream(path).close();
    CHECK_THROWS_AS(load_wav(path), FormatError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_wav(tmp_path("agan_no_such_file.wav")), FormatError);
}

TEST_CASE("mel container round trips") {
    Rng rng(16);
    const std::string path = tmp_path("agan_test.melb");
    MelSpectrogram mel = testutil::random_mel(7, 80, 64, rng);
    save_mel(mel, 8000, path);
    int sr = 0;
    const MelSpectrogram back = load_mel(path, &sr);
    CHECK(sr == 8000);
    CHECK(back.values.rows == 7);
    CHECK(back.values.cols == 80);
    CHECK(back.log_compressed == mel.log_compressed);
    for (std::size_t i = 0; i < mel.values.v.size(); ++i)
        CHECK(back.values.v[i] == mel.values.v[i]);
    std::filesystem::remove(path);
}

TEST_CASE("synthetic corpus is deterministic per spec and seed") {
    SpeakerSpec spec;
    const auto a = synth_corpus(spec, 3, 2048, 8000, 42);
    const auto b = synth_corpus(spec, 3, 2048, 8000, 42);
    REQUIRE(a.size() == 3);
    for (std::size_t c = 0; c < a.size(); ++c) {
        REQUIRE(a[c].samples.size() == 2048);
        for (std::size_t i = 0; i < a[c].samples.size(); ++i)
            CHECK(a[c].samples[i] == b[c].samples[i]);
        for (double v : a[c].samples) {
            CHECK(std::isfinite(v));
            CHECK(std::abs(v) <= 1.0);
        }
    }
    const auto c2 = synth_corpus(spec, 3, 2048, 8000, 43);
    bool any_diff = false;
    for (std::size_t i = 0; i < c2[0].samples.size(); ++i)
        if (c2[0].samples[i] != a[0].samples[i]) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("degenerate speaker specs are rejected") {
    SpeakerSpec spec;
    spec.f0_min = 200.0;
    spec.f0_max = 100.0;
    CHECK_THROWS_AS(synth_corpus(spec, 1, 2048, 8000, 1), ConfigError);
    SpeakerSpec spec2;
    spec2.f0_min = -5.0;
    spec2.f0_max = -1.0;
    CHECK_THROWS_AS(synth_corpus(spec2, 1, 2048, 8000, 1), ConfigError);
    SpeakerSpec ok;
    CHECK_THROWS_AS(synth_corpus(ok, 0, 2048, 8000, 1), ConfigError);
}

TEST_CASE("the two default speakers have distinct spectral envelopes") {
    SpectralConfig cfg = desk_cfg();
    SpeakerSpec a;  // pretrain-family defaults
    SpeakerSpec b;
    b.f0_min = 200.0;
    b.f0_max = 300.0;
    b.harmonic_decay = 0.45;
    b.even_harmonic_gain = 0.35;
    b.vibrato_rate_hz = 6.5;
    b.vibrato_cents = 50.0;
    b.noise_level = 0.01;

    auto mean_log_mel = [&cfg](const std::vector<Waveform>& corpus) {
        std::vector<double> acc(80, 0.0);
        long frames = 0;
        for (const auto& clip : corpus) {
            const MelSpectrogram mel = mel_spectrogram(clip, cfg);
            for (int f = 0; f < mel.values.rows; ++f)
                for (int m = 0; m < 80; ++m) acc[static_cast<std::size_t>(m)] += mel.values.at(f, m);
            frames += mel.values.rows;
        }
        for (auto& v : acc) v /= static_cast<double>(frames);
        return acc;
    };

    const auto ca = synth_corpus(a, 8, 4096, 8000, 7);
    const auto cb = synth_corpus(b, 8, 4096, 8000, 8);
    const auto ma = mean_log_mel(ca);
    const auto mb = mean_log_mel(cb);
    double l1 = 0.0;
    for (int m = 0; m < 80; ++m)
        l1 += std::abs(ma[static_cast<std::size_t>(m)] - mb[static_cast<std::size_t>(m)]);
    CHECK(l1 >= 1.0);
}
