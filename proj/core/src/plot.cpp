#include "agan/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "agan/errors.hpp"

namespace agan {

namespace {

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // row-major, top-down

    Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        if (x < 0 || x >= width || y < 0 || y >= height) return;
        const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
        rgb[i] = r;
        rgb[i + 1] = g;
        rgb[i + 2] = b;
    }
};

void write_bmp(const Image& img, const std::string& path) {
    const int row_bytes = img.width * 3;
    const int pad = (4 - row_bytes % 4) % 4;
    const std::uint32_t data_size = static_cast<std::uint32_t>((row_bytes + pad) * img.height);
    const std::uint32_t file_size = 54 + data_size;

    std::string out;
    out.reserve(file_size);
    auto u16 = [&out](std::uint16_t v) {
        out.push_back(char(v & 0xFF));
        out.push_back(char(v >> 8));
    };
    auto u32 = [&out](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
    };
    out += "BM";
    u32(file_size);
    u32(0);
    u32(54);
    u32(40);  // BITMAPINFOHEADER
    u32(static_cast<std::uint32_t>(img.width));
    u32(static_cast<std::uint32_t>(img.height));
    u16(1);
    u16(24);
    u32(0);
    u32(data_size);
    u32(2835);
    u32(2835);
    u32(0);
    u32(0);
    // rows bottom-up, BGR
    for (int y = img.height - 1; y >= 0; --y) {
        for (int x = 0; x < img.width; ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * img.width + x) * 3;
            out.push_back(static_cast<char>(img.rgb[i + 2]));
            out.push_back(static_cast<char>(img.rgb[i + 1]));
            out.push_back(static_cast<char>(img.rgb[i]));
        }
        for (int p = 0; p < pad; ++p) out.push_back(0);
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("plot: cannot open " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("plot: write failed: " + path);
}

// compact viridis-style gradient
void colormap(double v, std::uint8_t* r, std::uint8_t* g, std::uint8_t* b) {
    static const double stops[9][3] = {
        {0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530},
        {0.207, 0.372, 0.553}, {0.164, 0.471, 0.558}, {0.128, 0.567, 0.551},
        {0.135, 0.659, 0.518}, {0.478, 0.821, 0.318}, {0.993, 0.906, 0.144}};
    v = std::clamp(v, 0.0, 1.0);
    const double pos = v * 8.0;
    const int i = std::min(7, static_cast<int>(pos));
    const double f = pos - i;
    *r = static_cast<std::uint8_t>(255.0 * (stops[i][0] + f * (stops[i + 1][0] - stops[i][0])));
    *g = static_cast<std::uint8_t>(255.0 * (stops[i][1] + f * (stops[i + 1][1] - stops[i][1])));
    *b = static_cast<std::uint8_t>(255.0 * (stops[i][2] + f * (stops[i + 1][2] - stops[i][2])));
}

Tensor2 log_mag(const ComplexSpectrogram& s) {
    Tensor2 out(s.frames(), s.bins());
    for (int f = 0; f < out.rows; ++f)
        for (int b = 0; b < out.cols; ++b)
            out.at(f, b) = std::log(std::abs(s.values[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)]) +
                                    s.config.eps);
    return out;
}

// draws one panel: time on x, frequency on y (low at the bottom)
void draw_panel(Image& img, const Tensor2& lm, int x0, int y0, int w, int h, double lo, double hi,
                int f_lo, int f_hi, int b_lo, int b_hi) {
    const double span = hi > lo ? hi - lo : 1.0;
    for (int py = 0; py < h; ++py) {
        const int bin = b_lo + (b_hi - 1 - b_lo) * (h - 1 - py) / std::max(1, h - 1);
        for (int px = 0; px < w; ++px) {
            const int frame = f_lo + (f_hi - 1 - f_lo) * px / std::max(1, w - 1);
            const double v = (lm.at(frame, bin) - lo) / span;
            std::uint8_t r, g, b;
            colormap(v, &r, &g, &b);
            img.set(x0 + px, y0 + py, r, g, b);
        }
    }
}

}  // namespace

void write_spectrogram_pair_bmp(const ComplexSpectrogram& generated,
                                const ComplexSpectrogram& reference, int sample_rate,
                                const std::string& path, const ZoomSpec& zoom) {
    if (generated.frames() < 1 || reference.frames() < 1)
        throw DataError("plot: empty spectrogram");

    const Tensor2 lg = log_mag(generated);
    const Tensor2 lr = log_mag(reference);

    // one color scale across both panels so the comparison is calibrated
    double lo = lg.v[0], hi = lg.v[0];
    for (double v : lg.v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : lr.v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    const int panel_w = 256, panel_h = 192, gap = 8;
    const bool zoomed = zoom.enabled;
    const int width = panel_w * 2 + gap * 3;
    const int height = zoomed ? panel_h * 2 + gap * 3 : panel_h + gap * 2;
    Image img(width, height);

    draw_panel(img, lg, gap, gap, panel_w, panel_h, lo, hi, 0, lg.rows, 0, lg.cols);
    draw_panel(img, lr, gap * 2 + panel_w, gap, panel_w, panel_h, lo, hi, 0, lr.rows, 0, lr.cols);

    if (zoomed) {
        const SpectralConfig& cfg = generated.config;
        auto frame_of = [&](double seconds, int max_frames) {
            const double frame = seconds * sample_rate / cfg.hop;
            return std::clamp(static_cast<int>(frame), 0, max_frames - 1);
        };
        auto bin_of = [&](double hz, int bins) {
            const double bin = hz * cfg.frame_length / sample_rate;
            return std::clamp(static_cast<int>(bin), 0, bins - 1);
        };
        const int y2 = gap * 2 + panel_h;
        const int fg0 = frame_of(zoom.t0, lg.rows), fg1 = std::max(frame_of(zoom.t1, lg.rows), fg0 + 1);
        const int fr0 = frame_of(zoom.t0, lr.rows), fr1 = std::max(frame_of(zoom.t1, lr.rows), fr0 + 1);
        const int b0 = bin_of(zoom.f0_hz, lg.cols), b1 = std::max(bin_of(zoom.f1_hz, lg.cols), b0 + 1);
        draw_panel(img, lg, gap, y2, panel_w, panel_h, lo, hi, fg0, fg1 + 1, b0, b1 + 1);
        draw_panel(img, lr, gap * 2 + panel_w, y2, panel_w, panel_h, lo, hi, fr0, fr1 + 1, b0, b1 + 1);
    }

    write_bmp(img, path);
}

}  // namespace agan
