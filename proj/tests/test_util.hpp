#pragma once

// Shared test helpers: independent DFT oracle, finite-difference gradient
// checks, random fixtures. Everything here is deliberately written with
// plain loops, independent of the library's computation paths.

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "agan/layers.hpp"
#include "agan/rng.hpp"
#include "agan/spectral.hpp"

namespace testutil {

constexpr double kPi = 3.14159265358979323846;

// Direct O(N^2) DFT of framed, windowed input; bins 0..N/2.
inline std::vector<std::vector<std::complex<double>>> dft_oracle(
    std::span<const double> x, int frame_length, int hop, bool hann) {
    std::vector<double> w(static_cast<std::size_t>(frame_length), 1.0);
    if (hann)
        for (int i = 0; i < frame_length; ++i)
            w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / frame_length);

    std::vector<std::vector<std::complex<double>>> frames;
    for (int start = 0; start + frame_length <= static_cast<int>(x.size()); start += hop) {
        std::vector<std::complex<double>> bins(static_cast<std::size_t>(frame_length / 2 + 1));
        for (int k = 0; k <= frame_length / 2; ++k) {
            double re = 0.0, im = 0.0;
            for (int n = 0; n < frame_length; ++n) {
                const double v = x[static_cast<std::size_t>(start + n)] * w[static_cast<std::size_t>(n)];
                const double ang = -2.0 * kPi * k * n / frame_length;
                re += v * std::cos(ang);
                im += v * std::sin(ang);
            }
            bins[static_cast<std::size_t>(k)] = {re, im};
        }
        frames.push_back(std::move(bins));
    }
    return frames;
}

struct GradCheckResult {
    double max_rel_err = 0.0;
    int checked = 0;
};

// Central finite differences over every entry of every block. The loss
// callback must re-evaluate the full objective from current parameter
// values. Entries where both gradients are tiny are compared absolutely.
inline GradCheckResult check_gradients(const std::vector<agan::ParamRef>& params,
                                       const std::function<double()>& loss, double step,
                                       double abs_floor = 1e-9) {
    GradCheckResult res;
    for (const auto& p : params) {
        for (std::size_t i = 0; i < p.value->size(); ++i) {
            const double saved = (*p.value)[i];
            (*p.value)[i] = saved + step;
            const double lp = loss();
            (*p.value)[i] = saved - step;
            const double lm = loss();
            (*p.value)[i] = saved;
            const double fd = (lp - lm) / (2.0 * step);
            const double an = (*p.grad)[i];
            const double denom = std::max(std::abs(fd), std::abs(an));
            if (denom > abs_floor)
                res.max_rel_err = std::max(res.max_rel_err, std::abs(fd - an) / denom);
            ++res.checked;
        }
    }
    return res;
}

// Same check for a gradient over a plain vector input.
inline GradCheckResult check_vector_gradient(std::vector<double>& x,
                                             const std::vector<double>& analytic,
                                             const std::function<double()>& loss, double step,
                                             double abs_floor = 1e-9) {
    GradCheckResult res;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + step;
        const double lp = loss();
        x[i] = saved - step;
        const double lm = loss();
        x[i] = saved;
        const double fd = (lp - lm) / (2.0 * step);
        const double denom = std::max(std::abs(fd), std::abs(analytic[i]));
        if (denom > abs_floor)
            res.max_rel_err = std::max(res.max_rel_err, std::abs(fd - analytic[i]) / denom);
        ++res.checked;
    }
    return res;
}

inline std::vector<double> random_signal(int n, agan::Rng& rng, double amp = 0.5) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = rng.uniform(-amp, amp);
    return x;
}

inline agan::MelSpectrogram random_mel(int frames, int n_mels, int hop, agan::Rng& rng) {
    agan::MelSpectrogram mel;
    mel.values = agan::Tensor2(frames, n_mels);
    for (auto& v : mel.values.v) v = rng.uniform(-1.0, 1.0);
    mel.config.n_mels = n_mels;
    mel.config.hop = hop;
    mel.log_compressed = true;
    return mel;
}

}  // namespace testutil
