#include "agan/spectral.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "agan/errors.hpp"

namespace agan {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_pow2(int n) {
    return n > 0 && (n & (n - 1)) == 0;
}

// In-place iterative radix-2 Cooley-Tukey; sign = -1 forward, +1 inverse
// (unnormalized).
void fft_pow2(std::vector<std::complex<double>>& a, int sign) {
    const int n = static_cast<int>(a.size());
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * kTwoPi / len;
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (int j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Direct transform fallback for non power-of-two frame lengths.
void dft_direct(std::vector<std::complex<double>>& a, int sign) {
    const int n = static_cast<int>(a.size());
    std::vector<std::complex<double>> out(n);
    for (int k = 0; k < n; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (int t = 0; t < n; ++t) {
            const double ang = sign * kTwoPi * k * t / n;
            acc += a[t] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    a = std::move(out);
}

void transform(std::vector<std::complex<double>>& a, int sign) {
    if (is_pow2(static_cast<int>(a.size())))
        fft_pow2(a, sign);
    else
        dft_direct(a, sign);
}

std::vector<double> make_window(WindowKind kind, int n) {
    std::vector<double> w(n, 1.0);
    if (kind == WindowKind::hann) {
        for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / n);
    }
    return w;
}

double hz_to_mel(double f) {
    return 2595.0 * std::log10(1.0 + f / 700.0);
}

double mel_to_hz(double m) {
    return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
}

void put_u32(std::ofstream& f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    f.write(reinterpret_cast<char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& f) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw FormatError("load_mel: truncated file");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

}  // namespace

WindowKind window_from_string(const std::string& name) {
    if (name == "hann") return WindowKind::hann;
    if (name == "rect") return WindowKind::rect;
    throw ConfigError("unknown window function: " + name);
}

std::string window_to_string(WindowKind w) {
    return w == WindowKind::hann ? "hann" : "rect";
}

void SpectralConfig::validate() const {
    if (frame_length < 2) throw ConfigError("frame_length must be >= 2");
    if (hop < 1 || hop > frame_length) throw ConfigError("hop must be in [1, frame_length]");
    if (n_mels < 1) throw ConfigError("n_mels must be >= 1");
    if (eps <= 0.0) throw ConfigError("eps must be positive");
    if (fmin < 0.0) throw ConfigError("fmin must be >= 0");
    if (fmax < 0.0) throw ConfigError("fmax must be >= 0");
}

int stft_frame_count(int length, const SpectralConfig& cfg) {
    if (length < cfg.frame_length) return 0;
    return (length - cfg.frame_length) / cfg.hop + 1;
}

ComplexSpectrogram stft(std::span<const double> x, const SpectralConfig& cfg) {
    cfg.validate();
    const int n = cfg.frame_length;
    if (static_cast<int>(x.size()) < n)
        throw DataError("stft: signal shorter than one frame (" +
                        std::to_string(x.size()) + " < " + std::to_string(n) + ")");

    const int nframes = stft_frame_count(static_cast<int>(x.size()), cfg);
    const int nbins = cfg.bins();
    const std::vector<double> window = make_window(cfg.window, n);

    ComplexSpectrogram out;
    out.config = cfg;
    out.values.resize(nframes);
    std::vector<std::complex<double>> buf(n);
    for (int f = 0; f < nframes; ++f) {
        const int start = f * cfg.hop;
        for (int i = 0; i < n; ++i) buf[i] = std::complex<double>(x[start + i] * window[i], 0.0);
        transform(buf, -1);
        out.values[f].assign(buf.begin(), buf.begin() + nbins);
    }
    return out;
}

ComplexSpectrogram stft(const Waveform& x, const SpectralConfig& cfg) {
    return stft(std::span<const double>(x.samples), cfg);
}

Tensor2 magnitude(const ComplexSpectrogram& s) {
    Tensor2 out(s.frames(), s.bins());
    for (int f = 0; f < out.rows; ++f)
        for (int b = 0; b < out.cols; ++b) out.at(f, b) = std::abs(s.values[f][b]);
    return out;
}

Tensor2 mel_filterbank(const SpectralConfig& cfg, int sample_rate) {
    cfg.validate();
    if (sample_rate <= 0) throw ConfigError("mel_filterbank: sample_rate must be positive");
    const double fmax = cfg.fmax > 0.0 ? cfg.fmax : sample_rate / 2.0;
    if (fmax > sample_rate / 2.0 + 1e-9) throw ConfigError("mel_filterbank: fmax above Nyquist");
    if (cfg.fmin >= fmax) throw ConfigError("mel_filterbank: fmin must be below fmax");

    const int nbins = cfg.bins();
    const double mel_lo = hz_to_mel(cfg.fmin);
    const double mel_hi = hz_to_mel(fmax);
    std::vector<double> edges(cfg.n_mels + 2);
    for (int i = 0; i < cfg.n_mels + 2; ++i)
        edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));

    Tensor2 fb(cfg.n_mels, nbins);
    for (int m = 0; m < cfg.n_mels; ++m) {
        const double f0 = edges[m], f1 = edges[m + 1], f2 = edges[m + 2];
        for (int b = 0; b < nbins; ++b) {
            const double fhz = static_cast<double>(b) * sample_rate / cfg.frame_length;
            double w = 0.0;
            if (fhz > f0 && fhz < f1)
                w = (fhz - f0) / (f1 - f0);
            else if (fhz >= f1 && fhz < f2)
                w = (f2 - fhz) / (f2 - f1);
            fb.at(m, b) = w;
        }
    }
    return fb;
}

Tensor2 apply_mel_filterbank(const Tensor2& mag, const Tensor2& fbank) {
    if (mag.cols != fbank.cols)
        throw ShapeError("apply_mel_filterbank: bin count mismatch");
    Tensor2 out(mag.rows, fbank.rows);
    for (int f = 0; f < mag.rows; ++f) {
        const double* row = mag.row(f);
        for (int m = 0; m < fbank.rows; ++m) {
            const double* w = fbank.row(m);
            double acc = 0.0;
            for (int b = 0; b < mag.cols; ++b) acc += w[b] * row[b];
            out.at(f, m) = acc;
        }
    }
    return out;
}

MelSpectrogram mel_spectrogram(const Waveform& x, const SpectralConfig& cfg) {
    const ComplexSpectrogram spec = stft(x, cfg);
    const Tensor2 mag = magnitude(spec);
    const Tensor2 fbank = mel_filterbank(cfg, x.sample_rate);
    MelSpectrogram mel;
    mel.config = cfg;
    mel.values = apply_mel_filterbank(mag, fbank);
    if (cfg.log_mel) {
        for (auto& v : mel.values.v) v = std::log(v + cfg.eps);
        mel.log_compressed = true;
    }
    return mel;
}

void stft_adjoint(const std::vector<std::vector<std::complex<double>>>& grad_spec,
                  const SpectralConfig& cfg, std::span<double> grad_time_accum) {
    const int n = cfg.frame_length;
    const int nbins = cfg.bins();
    const std::vector<double> window = make_window(cfg.window, n);
    std::vector<std::complex<double>> buf(n);
    for (std::size_t f = 0; f < grad_spec.size(); ++f) {
        if (static_cast<int>(grad_spec[f].size()) != nbins)
            throw ShapeError("stft_adjoint: bin count mismatch");
        // adjoint of the real-input DFT restricted to bins 0..N/2: zero-extend
        // (no Hermitian mirror) and take the real part of the unnormalized
        // inverse transform
        std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
        std::copy(grad_spec[f].begin(), grad_spec[f].end(), buf.begin());
        transform(buf, +1);
        const int start = static_cast<int>(f) * cfg.hop;
        if (start + n > static_cast<int>(grad_time_accum.size()))
            throw ShapeError("stft_adjoint: gradient buffer too short");
        for (int i = 0; i < n; ++i) grad_time_accum[start + i] += buf[i].real() * window[i];
    }
}

void save_mel(const MelSpectrogram& m, int sample_rate, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("save_mel: cannot open " + path);
    f.write("MELB", 4);
    put_u32(f, 1);  // format version
    put_u32(f, static_cast<std::uint32_t>(sample_rate));
    put_u32(f, static_cast<std::uint32_t>(m.values.rows));
    put_u32(f, static_cast<std::uint32_t>(m.values.cols));
    put_u32(f, m.log_compressed ? 1 : 0);
    put_u32(f, static_cast<std::uint32_t>(m.config.hop));
    put_u32(f, static_cast<std::uint32_t>(m.config.frame_length));
    f.write(reinterpret_cast<const char*>(m.values.v.data()),
            static_cast<std::streamsize>(m.values.v.size() * sizeof(double)));
    if (!f) throw DataError("save_mel: write failed: " + path);
}

MelSpectrogram load_mel(const std::string& path, int* sample_rate_out) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("load_mel: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "MELB", 4) != 0) throw FormatError("load_mel: bad magic");
    const std::uint32_t version = get_u32(f);
    if (version != 1) throw FormatError("load_mel: unsupported version");
    const int sr = static_cast<int>(get_u32(f));
    const int rows = static_cast<int>(get_u32(f));
    const int cols = static_cast<int>(get_u32(f));
    const bool logc = get_u32(f) != 0;
    const int hop = static_cast<int>(get_u32(f));
    const int frame_length = static_cast<int>(get_u32(f));
    if (rows < 1 || cols < 1) throw FormatError("load_mel: empty mel matrix");

    MelSpectrogram m;
    m.values = Tensor2(rows, cols);
    m.log_compressed = logc;
    m.config.n_mels = cols;
    m.config.hop = hop;
    m.config.frame_length = frame_length;
    m.config.log_mel = logc;
    f.read(reinterpret_cast<char*>(m.values.v.data()),
           static_cast<std::streamsize>(m.values.v.size() * sizeof(double)));
    if (!f) throw FormatError("load_mel: truncated data");
    if (sample_rate_out) *sample_rate_out = sr;
    return m;
}

}  // namespace agan
