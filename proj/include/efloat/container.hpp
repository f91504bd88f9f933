#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "efloat/codec.hpp"
#include "efloat/entropy.hpp"
#include "efloat/error.hpp"
#include "efloat/model.hpp"

// The EFLT container, a frozen byte layout (integers little-endian, payload
// bits MSB-first within bytes):
//
//   magic "EFLT"                      4 bytes
//   version                           u8  (= 1)
//   n, bits per value                 u8
//   K, max code width                 u8
//   symbol mode                       u8  (0 exponent-only, 1 joint)
//   rounding                          u8  (0 detr, 1 stoc)
//   token count                       u64
//   dimension                         u32
//   present symbol count              u16
//   (symbol u16, code length u8)      per present symbol, symbol ascending
//   (byte length u16, UTF-8 bytes)    per token
//   payload crc32                     u32
//   payload byte count                u64
//   payload                           token_count * dim values, n bits each,
//                                     zero padded to a whole byte
//
// Canonical codes are rebuilt from the stored lengths, so the code table
// section stays a few dozen bytes for typical exponent alphabets.

namespace efloat {

inline constexpr std::array<uint8_t, 4> kContainerMagic = {'E', 'F', 'L', 'T'};
inline constexpr uint8_t kContainerVersion = 1;

inline uint32_t crc32(std::span<const uint8_t> bytes) noexcept {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    uint32_t c = 0xFFFFFFFFu;
    for (uint8_t b : bytes) c = table[(c ^ b) & 0xFFu] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

inline bool valid_utf8(std::string_view s) noexcept {
    size_t i = 0;
    while (i < s.size()) {
        const uint8_t b = static_cast<uint8_t>(s[i]);
        int extra;
        uint32_t cp;
        if (b < 0x80) {
            ++i;
            continue;
        } else if ((b & 0xE0) == 0xC0) {
            extra = 1;
            cp = b & 0x1Fu;
        } else if ((b & 0xF0) == 0xE0) {
            extra = 2;
            cp = b & 0x0Fu;
        } else if ((b & 0xF8) == 0xF0) {
            extra = 3;
            cp = b & 0x07u;
        } else {
            return false;
        }
        if (i + extra >= s.size()) return false;
        for (int k = 1; k <= extra; ++k) {
            const uint8_t c = static_cast<uint8_t>(s[i + k]);
            if ((c & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (c & 0x3Fu);
        }
        // overlongs, surrogates, out of range
        static constexpr uint32_t min_cp[4] = {0, 0x80, 0x800, 0x10000};
        if (cp < min_cp[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += extra + 1;
    }
    return true;
}

namespace detail {

struct ByteWriter {
    std::vector<uint8_t> out;

    void u8(uint8_t v) { out.push_back(v); }
    void u16(uint16_t v) {
        out.push_back(v & 0xFF);
        out.push_back(v >> 8);
    }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xFF);
    }
    void bytes(std::span<const uint8_t> b) { out.insert(out.end(), b.begin(), b.end()); }
};

struct ByteReader {
    std::span<const uint8_t> in;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > in.size())
            throw error(errc::data, "container: truncated at byte " + std::to_string(pos));
    }
    uint8_t u8() {
        need(1);
        return in[pos++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = uint16_t(in[pos]) | uint16_t(in[pos + 1]) << 8;
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(in[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(in[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    std::span<const uint8_t> bytes(size_t n) {
        need(n);
        auto s = in.subspan(pos, n);
        pos += n;
        return s;
    }
};

} // namespace detail

struct CompressedModel {
    EFloatConfig config;  // rounding seed not serialized; kind only
    uint64_t token_count = 0;
    uint32_t dim = 0;
    CodeLengths lengths;
    std::vector<std::string> tokens;
    std::vector<uint8_t> payload;

    CanonicalCodeTable code_table() const { return canonical_codes(lengths); }
    DecoderTable build_decoder() const {
        return build_decoder_table(code_table(), config.max_code_width);
    }

    std::vector<float> decode_all(const DecoderTable& dec) const {
        return decode_stream(payload, dec, config, token_count * dim);
    }
    std::vector<float> decode_row(const DecoderTable& dec, size_t row) const {
        if (row >= token_count)
            throw error(errc::data, "container: row " + std::to_string(row) + " out of range");
        return efloat::decode_row(payload, dec, config, dim, row);
    }
};

inline std::vector<uint8_t> write_compressed(const EmbeddingModel& model, const EFloatConfig& cfg,
                                             const CanonicalCodeTable& table) {
    cfg.validate();
    if (model.matrix.size() != model.token_count() * model.dim)
        throw error(errc::contract, "container: matrix size does not match tokens x dim");
    if (table.mode != cfg.mode)
        throw error(errc::contract, "container: code table mode does not match config");

    detail::ByteWriter w;
    w.bytes(kContainerMagic);
    w.u8(kContainerVersion);
    w.u8(static_cast<uint8_t>(cfg.bits));
    w.u8(static_cast<uint8_t>(cfg.max_code_width));
    w.u8(static_cast<uint8_t>(cfg.mode));
    w.u8(static_cast<uint8_t>(cfg.rounding.kind));
    w.u64(model.token_count());
    w.u32(static_cast<uint32_t>(model.dim));

    uint16_t present = 0;
    for (const auto& e : table.entries) present += e.len != 0;
    w.u16(present);
    for (uint32_t sym = 0; sym < table.entries.size(); ++sym)
        if (table.entries[sym].len != 0) {
            w.u16(static_cast<uint16_t>(sym));
            w.u8(table.entries[sym].len);
        }

    for (const std::string& tok : model.tokens) {
        if (tok.size() > 0xFFFF)
            throw error(errc::data, "container: token longer than 65535 bytes");
        if (!valid_utf8(tok))
            throw error(errc::data, "container: token is not valid UTF-8: '" + tok + "'");
        w.u16(static_cast<uint16_t>(tok.size()));
        w.bytes(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(tok.data()), tok.size()));
    }

    const std::vector<uint8_t> payload = encode_stream(model.values(), table, cfg);
    w.u32(crc32(payload));
    w.u64(payload.size());
    w.bytes(payload);
    return std::move(w.out);
}

inline CompressedModel read_compressed(std::span<const uint8_t> bytes) {
    detail::ByteReader r{bytes};
    const auto magic = r.bytes(4);
    if (!std::equal(magic.begin(), magic.end(), kContainerMagic.begin()))
        throw error(errc::data, "container: bad magic (not an EFLT file)");
    const uint8_t version = r.u8();
    if (version != kContainerVersion)
        throw error(errc::data, "container: unsupported version " + std::to_string(version));

    CompressedModel cm;
    cm.config.bits = r.u8();
    cm.config.max_code_width = r.u8();
    const uint8_t mode = r.u8();
    if (mode > 1) throw error(errc::data, "container: bad symbol mode");
    cm.config.mode = static_cast<SymbolMode>(mode);
    const uint8_t rounding = r.u8();
    if (rounding > 1) throw error(errc::data, "container: bad rounding id");
    cm.config.rounding.kind = static_cast<Rounding>(rounding);
    cm.config.validate();
    cm.token_count = r.u64();
    cm.dim = r.u32();

    cm.lengths = CodeLengths(cm.config.mode);
    const uint16_t present = r.u16();
    if (present > symbol_space(cm.config.mode))
        throw error(errc::data, "container: present symbol count exceeds alphabet");
    int last_symbol = -1;
    for (uint16_t i = 0; i < present; ++i) {
        const uint16_t sym = r.u16();
        const uint8_t len = r.u8();
        if (sym >= symbol_space(cm.config.mode) || static_cast<int>(sym) <= last_symbol)
            throw error(errc::data, "container: code table symbols not ascending");
        if (len == 0 || len > cm.config.max_code_width)
            throw error(errc::data, "container: code length out of range");
        cm.lengths.lengths[sym] = len;
        last_symbol = sym;
    }

    cm.tokens.reserve(cm.token_count);
    for (uint64_t t = 0; t < cm.token_count; ++t) {
        const uint16_t len = r.u16();
        const auto b = r.bytes(len);
        cm.tokens.emplace_back(reinterpret_cast<const char*>(b.data()), b.size());
        if (!valid_utf8(cm.tokens.back()))
            throw error(errc::data, "container: token is not valid UTF-8");
    }

    const uint32_t crc = r.u32();
    const uint64_t payload_bytes = r.u64();
    const uint64_t value_bits =
        cm.token_count * static_cast<uint64_t>(cm.dim) * static_cast<uint64_t>(cm.config.bits);
    if (payload_bytes != (value_bits + 7) / 8)
        throw error(errc::data, "container: payload size does not match token count x dim");
    const auto payload = r.bytes(payload_bytes);
    cm.payload.assign(payload.begin(), payload.end());
    if (r.pos != bytes.size())
        throw error(errc::data, "container: trailing bytes after payload");
    if (crc32(cm.payload) != crc)
        throw error(errc::data, "container: payload checksum mismatch");
    return cm;
}

} // namespace efloat
