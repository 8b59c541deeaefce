#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "statefuzz/config.hpp"

namespace statefuzz {

// Self-describing model file: 8-byte magic, a key/value text header with
// the config (plus free-form metadata like the vocabulary), then named
// tensors as name, rank, extents and little-endian 64-bit reals.
// Save/load round-trips bit-exactly.
struct Checkpoint {
    RnnConfig config;
    ModelParams params;
    std::map<std::string, std::string> meta;
};

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'S', 'F', 'Z', 'C', 'K', 'P', 'T', '1'};

inline void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

inline void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

inline std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

inline std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

inline double get_f64(std::istream& in) {
    std::uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline std::string hex_encode(const std::string& s) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(s.size() * 2);
    for (unsigned char c : s) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xf]);
    }
    return out;
}

inline std::string hex_decode(const std::string& s) {
    auto val = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        throw ConfigError("bad hex in checkpoint metadata");
    };
    if (s.size() % 2) throw ConfigError("bad hex in checkpoint metadata");
    std::string out;
    out.reserve(s.size() / 2);
    for (std::size_t i = 0; i < s.size(); i += 2)
        out.push_back(static_cast<char>(val(s[i]) * 16 + val(s[i + 1])));
    return out;
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open checkpoint for writing: " + path);
    out.write(detail::kCheckpointMagic, 8);

    std::ostringstream header;
    header << "format_version=1\n";
    header << "cell_kind=" << to_string(ckpt.config.cell_kind) << "\n";
    header << "num_layers=" << ckpt.config.num_layers << "\n";
    header << "state_size=" << ckpt.config.state_size << "\n";
    header << "input_dim=" << ckpt.config.input_dim << "\n";
    header << "vocab_size=" << ckpt.config.vocab_size << "\n";
    header << "embedding_dim=" << ckpt.config.embedding_dim << "\n";
    header << "num_classes=" << ckpt.config.num_classes << "\n";
    header << "output_head=" << to_string(ckpt.config.output_head) << "\n";
    for (auto& [k, v] : ckpt.meta) header << "meta." << k << "=" << detail::hex_encode(v) << "\n";
    const std::string h = header.str();
    detail::put_u32(out, static_cast<std::uint32_t>(h.size()));
    out.write(h.data(), static_cast<std::streamsize>(h.size()));

    detail::put_u32(out, static_cast<std::uint32_t>(ckpt.params.tensors.size()));
    for (auto& [name, tensor] : ckpt.params.tensors) {
        detail::put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::put_u32(out, static_cast<std::uint32_t>(tensor.rank()));
        for (std::size_t e : tensor.shape()) detail::put_u64(out, e);
        for (double v : tensor.vec()) detail::put_f64(out, v);
    }
    if (!out) throw ConfigError("checkpoint write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, detail::kCheckpointMagic, 8) != 0)
        throw ConfigError("not a model checkpoint: " + path);

    const std::uint32_t hlen = detail::get_u32(in);
    std::string header(hlen, '\0');
    in.read(header.data(), hlen);
    if (!in) throw ConfigError("truncated checkpoint header: " + path);

    Checkpoint ckpt;
    std::istringstream hs(header);
    std::string line;
    while (std::getline(hs, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "cell_kind") ckpt.config.cell_kind = cell_kind_from(val);
        else if (key == "num_layers") ckpt.config.num_layers = std::stoull(val);
        else if (key == "state_size") ckpt.config.state_size = std::stoull(val);
        else if (key == "input_dim") ckpt.config.input_dim = std::stoull(val);
        else if (key == "vocab_size") ckpt.config.vocab_size = std::stoull(val);
        else if (key == "embedding_dim") ckpt.config.embedding_dim = std::stoull(val);
        else if (key == "num_classes") ckpt.config.num_classes = std::stoull(val);
        else if (key == "output_head") ckpt.config.output_head = output_head_from(val);
        else if (key.rfind("meta.", 0) == 0)
            ckpt.meta[key.substr(5)] = detail::hex_decode(val);
    }

    const std::uint32_t count = detail::get_u32(in);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t nlen = detail::get_u32(in);
        std::string name(nlen, '\0');
        in.read(name.data(), nlen);
        const std::uint32_t rank = detail::get_u32(in);
        std::vector<std::size_t> shape(rank);
        for (auto& e : shape) e = detail::get_u64(in);
        Tensor t(shape);
        for (auto& v : t.vec()) v = detail::get_f64(in);
        if (!in) throw ConfigError("truncated checkpoint tensor: " + name);
        ckpt.params.tensors.emplace(std::move(name), std::move(t));
    }
    ckpt.config.validate();
    ckpt.params.check_shapes(ckpt.config);
    return ckpt;
}

}  // namespace statefuzz
