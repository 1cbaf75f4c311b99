#include "agan/layers.hpp"

#include <cmath>
#include <cstring>

#include "agan/errors.hpp"

namespace agan {

Conv1d::Conv1d(int in_ch, int out_ch, int kernel, int dilation, Pad pad, bool has_bias)
    : in_ch(in_ch), out_ch(out_ch), kernel(kernel), dilation(dilation), pad(pad),
      has_bias(has_bias) {
    if (in_ch < 1 || out_ch < 1 || kernel < 1 || dilation < 1)
        throw ConfigError("Conv1d: invalid dimensions");
    if (pad == Pad::same && kernel % 2 == 0)
        throw ConfigError("Conv1d: symmetric padding needs an odd kernel");
    w.assign(static_cast<std::size_t>(out_ch) * in_ch * kernel, 0.0);
    b.assign(has_bias ? out_ch : 0, 0.0);
    gw.assign(w.size(), 0.0);
    gb.assign(b.size(), 0.0);
}

int Conv1d::tap_offset(int j) const {
    if (pad == Pad::causal) return (j - (kernel - 1)) * dilation;
    return (j - (kernel - 1) / 2) * dilation;
}

void Conv1d::init_uniform(Rng& rng) {
    const double a = std::sqrt(1.0 / (static_cast<double>(in_ch) * kernel));
    for (auto& x : w) x = rng.uniform(-a, a);
    for (auto& x : b) x = rng.uniform(-a, a);
}

void Conv1d::init_zero() {
    std::fill(w.begin(), w.end(), 0.0);
    std::fill(b.begin(), b.end(), 0.0);
}

Tensor2 Conv1d::forward(const Tensor2& x) const {
    if (x.cols != in_ch) throw ShapeError("Conv1d: input channel mismatch");
    const int T = x.rows;
    Tensor2 out(T, out_ch);
    for (int t = 0; t < T; ++t) {
        double* orow = out.row(t);
        if (has_bias)
            for (int oc = 0; oc < out_ch; ++oc) orow[oc] = b[static_cast<std::size_t>(oc)];
        for (int j = 0; j < kernel; ++j) {
            const int src = t + tap_offset(j);
            if (src < 0 || src >= T) continue;
            const double* xrow = x.row(src);
            const double* wj = w.data() + static_cast<std::size_t>(j);
            for (int oc = 0; oc < out_ch; ++oc) {
                const double* woc = wj + static_cast<std::size_t>(oc) * in_ch * kernel;
                double acc = 0.0;
                for (int ic = 0; ic < in_ch; ++ic)
                    acc += woc[static_cast<std::size_t>(ic) * kernel] * xrow[ic];
                orow[oc] += acc;
            }
        }
    }
    return out;
}

void Conv1d::backward(const Tensor2& x, const Tensor2& gout, Tensor2* gx) {
    if (x.cols != in_ch || gout.cols != out_ch || gout.rows != x.rows)
        throw ShapeError("Conv1d: backward shape mismatch");
    const int T = x.rows;
    for (int t = 0; t < T; ++t) {
        const double* grow = gout.row(t);
        if (has_bias)
            for (int oc = 0; oc < out_ch; ++oc) gb[static_cast<std::size_t>(oc)] += grow[oc];
        for (int j = 0; j < kernel; ++j) {
            const int src = t + tap_offset(j);
            if (src < 0 || src >= T) continue;
            const double* xrow = x.row(src);
            double* gxrow = gx ? gx->row(src) : nullptr;
            for (int oc = 0; oc < out_ch; ++oc) {
                const double g = grow[oc];
                if (g == 0.0) continue;
                const std::size_t base = (static_cast<std::size_t>(oc) * in_ch) * kernel + j;
                for (int ic = 0; ic < in_ch; ++ic) {
                    const std::size_t wi = base + static_cast<std::size_t>(ic) * kernel;
                    gw[wi] += g * xrow[ic];
                    if (gxrow) gxrow[ic] += g * w[wi];
                }
            }
        }
    }
}

void Conv1d::zero_grad() {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
}

void Conv1d::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".w", &w, &gw});
    if (has_bias) out.push_back({prefix + ".b", &b, &gb});
}

int Conv1d::param_count() const {
    return static_cast<int>(w.size() + b.size());
}

ConvTranspose1d::ConvTranspose1d(int in_ch, int out_ch, int kernel, int stride)
    : in_ch(in_ch), out_ch(out_ch), kernel(kernel), stride(stride) {
    if (in_ch < 1 || out_ch < 1 || stride < 1 || kernel < stride)
        throw ConfigError("ConvTranspose1d: invalid dimensions (need kernel >= stride)");
    w.assign(static_cast<std::size_t>(out_ch) * in_ch * kernel, 0.0);
    b.assign(out_ch, 0.0);
    gw.assign(w.size(), 0.0);
    gb.assign(b.size(), 0.0);
}

void ConvTranspose1d::init_uniform(Rng& rng) {
    const double a = std::sqrt(1.0 / (static_cast<double>(in_ch) * kernel));
    for (auto& x : w) x = rng.uniform(-a, a);
    for (auto& x : b) x = rng.uniform(-a, a);
}

Tensor2 ConvTranspose1d::forward(const Tensor2& x) const {
    if (x.cols != in_ch) throw ShapeError("ConvTranspose1d: input channel mismatch");
    const int F = x.rows;
    const int T = F * stride;
    const int head = head_crop();
    Tensor2 out(T, out_ch);
    for (int t = 0; t < T; ++t) {
        double* orow = out.row(t);
        for (int oc = 0; oc < out_ch; ++oc) orow[oc] = b[static_cast<std::size_t>(oc)];
    }
    for (int f = 0; f < F; ++f) {
        const double* xrow = x.row(f);
        for (int j = 0; j < kernel; ++j) {
            const int t = f * stride + j - head;
            if (t < 0 || t >= T) continue;
            double* orow = out.row(t);
            for (int oc = 0; oc < out_ch; ++oc) {
                const std::size_t base = (static_cast<std::size_t>(oc) * in_ch) * kernel + j;
                double acc = 0.0;
                for (int ic = 0; ic < in_ch; ++ic)
                    acc += w[base + static_cast<std::size_t>(ic) * kernel] * xrow[ic];
                orow[oc] += acc;
            }
        }
    }
    return out;
}

void ConvTranspose1d::backward(const Tensor2& x, const Tensor2& gout, Tensor2* gx) {
    if (x.cols != in_ch || gout.cols != out_ch || gout.rows != x.rows * stride)
        throw ShapeError("ConvTranspose1d: backward shape mismatch");
    const int F = x.rows;
    const int T = gout.rows;
    const int head = head_crop();
    for (int t = 0; t < T; ++t) {
        const double* grow = gout.row(t);
        for (int oc = 0; oc < out_ch; ++oc) gb[static_cast<std::size_t>(oc)] += grow[oc];
    }
    for (int f = 0; f < F; ++f) {
        const double* xrow = x.row(f);
        double* gxrow = gx ? gx->row(f) : nullptr;
        for (int j = 0; j < kernel; ++j) {
            const int t = f * stride + j - head;
            if (t < 0 || t >= T) continue;
            const double* grow = gout.row(t);
            for (int oc = 0; oc < out_ch; ++oc) {
                const double g = grow[oc];
                if (g == 0.0) continue;
                const std::size_t base = (static_cast<std::size_t>(oc) * in_ch) * kernel + j;
                for (int ic = 0; ic < in_ch; ++ic) {
                    const std::size_t wi = base + static_cast<std::size_t>(ic) * kernel;
                    gw[wi] += g * xrow[ic];
                    if (gxrow) gxrow[ic] += g * w[wi];
                }
            }
        }
    }
}

void ConvTranspose1d::zero_grad() {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
}

void ConvTranspose1d::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".w", &w, &gw});
    out.push_back({prefix + ".b", &b, &gb});
}

int ConvTranspose1d::param_count() const {
    return static_cast<int>(w.size() + b.size());
}

std::uint64_t param_hash(const std::vector<ParamRef>& params) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix = [&h](const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 0x100000001B3ULL;
        }
    };
    for (const auto& pr : params) {
        mix(pr.name.data(), pr.name.size());
        mix(pr.value->data(), pr.value->size() * sizeof(double));
    }
    return h;
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace agan
