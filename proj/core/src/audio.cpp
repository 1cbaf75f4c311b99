#include "agan/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "agan/errors.hpp"

namespace agan {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return std::uint16_t(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(char(v & 0xFF));
    out.push_back(char((v >> 8) & 0xFF));
    out.push_back(char((v >> 16) & 0xFF));
    out.push_back(char((v >> 24) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(char(v & 0xFF));
    out.push_back(char((v >> 8) & 0xFF));
}

}  // namespace

Waveform load_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("load_wav: cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();

    if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
        throw FormatError("load_wav: not a RIFF/WAVE file: " + path);

    int sample_rate = 0;
    int channels = 0;
    int bits = 0;
    int audio_format = 0;
    bool have_fmt = false;
    const unsigned char* data = nullptr;
    std::size_t data_len = 0;

    std::size_t off = 12;
    while (off + 8 <= n) {
        const char* id = reinterpret_cast<const char*>(p + off);
        const std::uint32_t sz = read_u32(p + off + 4);
        const std::size_t body = off + 8;
        if (body + sz > n) throw FormatError("load_wav: truncated chunk in " + path);
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (sz < 16) throw FormatError("load_wav: short fmt chunk");
            audio_format = read_u16(p + body);
            channels = read_u16(p + body + 2);
            sample_rate = static_cast<int>(read_u32(p + body + 4));
            bits = read_u16(p + body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data = p + body;
            data_len = sz;
        }
        off = body + sz + (sz & 1);  // chunks are word-aligned
    }

    if (!have_fmt || data == nullptr) throw FormatError("load_wav: missing fmt or data chunk");
    if (audio_format != 1) throw FormatError("load_wav: only PCM supported");
    if (channels != 1) throw FormatError("load_wav: only mono supported");
    if (bits != 16) throw FormatError("load_wav: only 16-bit supported");
    if (data_len < 2) throw FormatError("load_wav: empty data chunk");

    Waveform w;
    w.sample_rate = sample_rate;
    const std::size_t count = data_len / 2;
    w.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::int16_t s = static_cast<std::int16_t>(data[2 * i] | (data[2 * i + 1] << 8));
        w.samples[i] = static_cast<double>(s) / 32767.0;
    }
    return w;
}

void save_wav(const Waveform& x, const std::string& path) {
    if (x.samples.empty()) throw DataError("save_wav: empty waveform");
    if (x.sample_rate <= 0) throw DataError("save_wav: invalid sample rate");

    const std::uint32_t nbytes = static_cast<std::uint32_t>(x.samples.size() * 2);
    std::string out;
    out.reserve(44 + nbytes);
    out += "RIFF";
    put_u32(out, 36 + nbytes);
    out += "WAVE";
    out += "fmt ";
    put_u32(out, 16);
    put_u16(out, 1);  // PCM
    put_u16(out, 1);  // mono
    put_u32(out, static_cast<std::uint32_t>(x.sample_rate));
    put_u32(out, static_cast<std::uint32_t>(x.sample_rate * 2));
    put_u16(out, 2);
    put_u16(out, 16);
    out += "data";
    put_u32(out, nbytes);
    for (double s : x.samples) {
        const double c = std::clamp(s, -1.0, 1.0);
        const auto q = static_cast<std::int16_t>(std::lrint(c * 32767.0));
        put_u16(out, static_cast<std::uint16_t>(q));
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("save_wav: cannot open " + path + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("save_wav: write failed: " + path);
}

}  // namespace agan
