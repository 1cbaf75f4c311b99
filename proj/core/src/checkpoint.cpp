#include "agan/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "agan/errors.hpp"

namespace agan {

namespace {

constexpr char kMagic[8] = {'A', 'G', 'A', 'N', 'C', 'K', 'P', 'T'};

std::uint32_t crc32(const unsigned char* data, std::size_t len) {
    static std::uint32_t table[256];
    static bool built = false;
    if (!built) {
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            table[i] = c;
        }
        built = true;
    }
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}

void put_str(std::string& out, const std::string& s) {
    put_u64(out, s.size());
    out += s;
}

void put_doubles(std::string& out, const std::vector<double>& v) {
    put_u64(out, v.size());
    const std::size_t bytes = v.size() * sizeof(double);
    const std::size_t at = out.size();
    out.resize(at + bytes);
    std::memcpy(out.data() + at, v.data(), bytes);
}

struct Reader {
    const unsigned char* p;
    std::size_t len;
    std::size_t off = 0;

    void need(std::size_t n) const {
        if (off + n > len) throw CheckpointError("checkpoint: truncated file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[off + i]) << (8 * i);
        off += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[off + i]) << (8 * i);
        off += 8;
        return v;
    }
    std::string str() {
        const std::uint64_t n = u64();
        need(n);
        std::string s(reinterpret_cast<const char*>(p + off), n);
        off += n;
        return s;
    }
    std::vector<double> doubles() {
        const std::uint64_t n = u64();
        need(n * sizeof(double));
        std::vector<double> v(n);
        std::memcpy(v.data(), p + off, n * sizeof(double));
        off += n * sizeof(double);
        return v;
    }
};

}  // namespace

void Checkpoint::save(const std::string& path) const {
    std::string payload;
    put_str(payload, config_text);
    put_u64(payload, counters.size());
    for (const auto& [k, v] : counters) {
        put_str(payload, k);
        put_u64(payload, v);
    }
    put_u32(payload, has_rng_state ? 1 : 0);
    for (std::uint64_t w : rng_state) put_u64(payload, w);
    put_u64(payload, blocks.size());
    for (const auto& [k, v] : blocks) {
        put_str(payload, k);
        put_doubles(payload, v);
    }

    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put_u32(out, kVersion);
    put_u64(out, payload.size());
    out += payload;
    put_u32(out, crc32(reinterpret_cast<const unsigned char*>(payload.data()), payload.size()));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError("checkpoint: cannot open " + path + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw CheckpointError("checkpoint: write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("checkpoint: cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() < sizeof(kMagic) + 4 + 8)
        throw CheckpointError("checkpoint: truncated file: " + path);
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw CheckpointError("checkpoint: bad magic: " + path);

    Reader r{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), sizeof(kMagic)};
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw CheckpointError("checkpoint: version mismatch (file " + std::to_string(version) +
                              ", expected " + std::to_string(kVersion) + ")");
    const std::uint64_t payload_len = r.u64();
    if (r.off + payload_len + 4 > bytes.size())
        throw CheckpointError("checkpoint: truncated payload: " + path);
    const std::uint32_t stored =
        crc32(reinterpret_cast<const unsigned char*>(bytes.data() + r.off), payload_len);

    Reader pr{reinterpret_cast<const unsigned char*>(bytes.data() + r.off), payload_len, 0};
    Checkpoint ck;
    ck.config_text = pr.str();
    const std::uint64_t ncounters = pr.u64();
    for (std::uint64_t i = 0; i < ncounters; ++i) {
        std::string k = pr.str();
        ck.counters[k] = pr.u64();
    }
    ck.has_rng_state = pr.u32() != 0;
    for (auto& w : ck.rng_state) w = pr.u64();
    const std::uint64_t nblocks = pr.u64();
    for (std::uint64_t i = 0; i < nblocks; ++i) {
        std::string k = pr.str();
        ck.blocks[k] = pr.doubles();
    }

    Reader cr{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(),
              r.off + payload_len};
    const std::uint32_t footer = cr.u32();
    if (footer != stored) throw CheckpointError("checkpoint: CRC mismatch (corrupt file): " + path);
    return ck;
}

void Checkpoint::store_params(const std::string& prefix, const std::vector<ParamRef>& params) {
    for (const auto& p : params) blocks[prefix + "." + p.name] = *p.value;
}

void Checkpoint::load_params(const std::string& prefix, const std::vector<ParamRef>& params) const {
    for (const auto& p : params) {
        const auto it = blocks.find(prefix + "." + p.name);
        if (it == blocks.end())
            throw CheckpointError("checkpoint: missing block " + prefix + "." + p.name);
        if (it->second.size() != p.value->size())
            throw CheckpointError("checkpoint: size mismatch for block " + prefix + "." + p.name);
        *p.value = it->second;
    }
}

bool Checkpoint::has_prefix(const std::string& prefix) const {
    const std::string key = prefix + ".";
    for (const auto& [k, v] : blocks)
        if (k.rfind(key, 0) == 0) return true;
    return false;
}

void Checkpoint::store_adam(const std::string& prefix, const AdamState& st) {
    counters[prefix + ".t"] = static_cast<std::uint64_t>(st.t);
    for (const auto& [name, slot] : st.slots) {
        blocks[prefix + ".m." + name] = slot.m;
        blocks[prefix + ".v." + name] = slot.v;
    }
}

AdamState Checkpoint::load_adam(const std::string& prefix) const {
    AdamState st;
    const auto it = counters.find(prefix + ".t");
    if (it == counters.end()) throw CheckpointError("checkpoint: missing optimizer " + prefix);
    st.t = static_cast<long>(it->second);
    const std::string mkey = prefix + ".m.";
    for (const auto& [k, v] : blocks) {
        if (k.rfind(mkey, 0) != 0) continue;
        const std::string name = k.substr(mkey.size());
        const auto vit = blocks.find(prefix + ".v." + name);
        if (vit == blocks.end())
            throw CheckpointError("checkpoint: missing second moment for " + name);
        st.slots[name] = {v, vit->second};
    }
    return st;
}

bool Checkpoint::teacher_free() const {
    static const char* allowed[] = {"generator.", "discriminator.", "adam_g.", "adam_d."};
    for (const auto& [k, v] : blocks) {
        bool ok = false;
        for (const char* pre : allowed)
            if (k.rfind(pre, 0) == 0) ok = true;
        if (!ok) return false;
    }
    return true;
}

}  // namespace agan
