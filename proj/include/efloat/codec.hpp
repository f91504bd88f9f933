#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "efloat/bitstream.hpp"
#include "efloat/entropy.hpp"
#include "efloat/error.hpp"
#include "efloat/fp_bits.hpp"
#include "efloat/parallel.hpp"

// The EFn codec. Every value occupies a fixed n-bit word whose internal
// exponent/significand boundary moves with the entropy code:
//
//   exponent-only mode:   [ sign:1 | coded exponent:len | significand:n-1-len ]
//   joint mode:           [ coded sign+exponent:len | significand:n-len ]
//
// Words are packed most-significant-bit first, value i at bit offset i*n,
// so any row of a matrix can be decoded without touching the rest.

namespace efloat {

using EFloatWord = uint32_t;  // low cfg.bits hold the word

struct EFloatConfig {
    int bits = 16;                                  // n, total bits per value
    int max_code_width = 8;                         // K
    SymbolMode mode = SymbolMode::ExponentOnly;
    RoundingMode rounding = RoundingMode::detr();

    int sign_bits() const noexcept { return mode == SymbolMode::ExponentOnly ? 1 : 0; }

    // Significand width for a given coded-exponent length; >= 1 by the
    // validated invariants below.
    int significand_width(int code_len) const noexcept {
        return bits - sign_bits() - code_len;
    }

    void validate() const {
        if (bits < 8 || bits > 28)
            throw error(errc::config, "efloat config: bit budget must be in [8, 28]");
        if (max_code_width < 1 || max_code_width > 16)
            throw error(errc::config, "efloat config: max code width must be in [1, 16]");
        if (max_code_width > bits - sign_bits() - 1)
            throw error(errc::config,
                        "efloat config: max code width leaves no significand bit (need K <= n-" +
                            std::to_string(sign_bits() + 1) + ")");
    }
};

class missing_symbol_error : public error {
public:
    missing_symbol_error(uint32_t symbol, size_t index)
        : error(errc::data, "exponent symbol " + std::to_string(symbol) +
                                " has no code table entry (element " + std::to_string(index) + ")"),
          symbol_(symbol),
          index_(index) {}

    uint32_t symbol() const noexcept { return symbol_; }
    size_t element_index() const noexcept { return index_; }

private:
    uint32_t symbol_;
    size_t index_;
};

namespace detail {

inline uint32_t field_mask(int bits) noexcept {
    return bits >= 32 ? 0xFFFFFFFFu : (1u << bits) - 1;
}

// Stored significand for a value: top bits of the FP32 significand, rounded;
// left-aligned with zero fill when the field is wider than 23 bits.
inline uint32_t store_significand(const Fp32Parts& p, int sig_width, RoundingMode mode,
                                  uint64_t index) {
    if (sig_width >= kFp32SignificandBits)
        return p.significand << (sig_width - kFp32SignificandBits);
    if (p.biased_exponent == 255)
        return truncate_special_significand(p.significand, sig_width);
    const double draw = mode.kind == Rounding::Stoc ? stoc_draw(mode.seed, index) : 0.0;
    return round_significand(p.significand, sig_width, mode, draw);
}

inline uint32_t restore_significand(uint32_t stored, int sig_width) noexcept {
    if (sig_width >= kFp32SignificandBits) return stored >> (sig_width - kFp32SignificandBits);
    return stored << (kFp32SignificandBits - sig_width);
}

} // namespace detail

inline EFloatWord encode_value(float x, const CanonicalCodeTable& table, const EFloatConfig& cfg,
                               uint64_t index = 0) {
    const Fp32Parts p = decompose_fp32(bits_of(x));
    const uint32_t sym = symbol_of_bits(bits_of(x), cfg.mode);
    if (!table.has(sym)) throw missing_symbol_error(sym, index);
    const CanonicalCodeTable::Entry& e = table.at(sym);
    const int sig_width = cfg.significand_width(e.len);
    const uint32_t stored = detail::store_significand(p, sig_width, cfg.rounding, index);
    uint32_t word = (static_cast<uint32_t>(e.code) << sig_width) | stored;
    if (cfg.mode == SymbolMode::ExponentOnly) word |= p.sign << (cfg.bits - 1);
    return word;
}

// One-level decoder table: 2^K entries indexed by the K bits that follow the
// sign. A code of length l occupies 2^(K-l) consecutive entries, making the
// unused index bits don't-cares; lookup is a single load.
struct DecoderTable {
    struct Entry {
        uint16_t symbol = 0;
        uint8_t len = 0;  // 0 = no code covers this index
    };

    int width = 0;  // K
    std::vector<Entry> entries;

    const Entry& lookup(uint32_t window) const noexcept { return entries[window]; }

    size_t invalid_entries() const noexcept {
        size_t n = 0;
        for (const Entry& e : entries) n += e.len == 0;
        return n;
    }
};

inline DecoderTable build_decoder_table(const CanonicalCodeTable& table, int max_code_width) {
    if (max_code_width < 1 || max_code_width > 16)
        throw error(errc::config, "decoder table: width must be in [1, 16]");
    DecoderTable dec;
    dec.width = max_code_width;
    dec.entries.assign(size_t(1) << max_code_width, {});
    for (uint32_t sym = 0; sym < table.entries.size(); ++sym) {
        const CanonicalCodeTable::Entry& e = table.entries[sym];
        if (e.len == 0) continue;
        if (e.len > max_code_width)
            throw error(errc::contract, "decoder table: code longer than table width");
        const uint32_t first = e.code << (max_code_width - e.len);
        const uint32_t span = 1u << (max_code_width - e.len);
        for (uint32_t i = 0; i < span; ++i)
            dec.entries[first + i] = {static_cast<uint16_t>(sym), e.len};
    }
    return dec;
}

inline float decode_value(EFloatWord word, const DecoderTable& dec, const EFloatConfig& cfg) {
    const int n = cfg.bits;
    const int K = dec.width;
    uint32_t sign = 0;
    uint32_t window;
    if (cfg.mode == SymbolMode::ExponentOnly) {
        sign = (word >> (n - 1)) & 1u;
        window = (word >> (n - 1 - K)) & detail::field_mask(K);
    } else {
        window = (word >> (n - K)) & detail::field_mask(K);
    }
    const DecoderTable::Entry& e = dec.lookup(window);
    if (e.len == 0) throw error(errc::data, "efloat decode: invalid coded exponent (corrupt stream?)");
    const int sig_width = cfg.significand_width(e.len);
    const uint32_t stored = word & detail::field_mask(sig_width);
    Fp32Parts p;
    p.significand = detail::restore_significand(stored, sig_width);
    p.biased_exponent = e.symbol & 0xFFu;
    p.sign = cfg.mode == SymbolMode::ExponentOnly ? sign : (e.symbol >> 8);
    return float_of(compose_fp32(p));
}

// Two-level decoder table: a 2^L1 root plus one overflow sub-table per
// distinct L1-bit prefix of the longer codes. Decodes exactly like the
// one-level table with far fewer entries when long codes are rare.
struct TwoLevelDecoderTable {
    struct RootEntry {
        uint16_t symbol = 0;
        uint8_t len = 0;       // direct hit when != 0
        int32_t sub = -1;      // offset into `sub` when >= 0
        uint8_t sub_bits = 0;  // index width of that sub-table
    };

    int width = 0;      // K: window size accepted by lookup
    int root_bits = 0;  // L1
    std::vector<RootEntry> root;
    std::vector<DecoderTable::Entry> sub;

    size_t entry_count() const noexcept { return root.size() + sub.size(); }

    DecoderTable::Entry lookup(uint32_t window) const noexcept {
        const uint32_t prefix = window >> (width - root_bits);
        const RootEntry& r = root[prefix];
        if (r.len != 0) return {r.symbol, r.len};
        if (r.sub < 0) return {};
        const uint32_t rest =
            (window >> (width - root_bits - r.sub_bits)) & detail::field_mask(r.sub_bits);
        return sub[static_cast<uint32_t>(r.sub) + rest];
    }
};

inline TwoLevelDecoderTable build_two_level_table(const CanonicalCodeTable& table,
                                                  int max_code_width, int root_bits) {
    if (root_bits < 1 || root_bits >= max_code_width)
        throw error(errc::config, "two-level table: need 1 <= L1 < K");
    TwoLevelDecoderTable dec;
    dec.width = max_code_width;
    dec.root_bits = root_bits;
    dec.root.assign(size_t(1) << root_bits, {});

    // Direct entries for the short codes.
    for (uint32_t sym = 0; sym < table.entries.size(); ++sym) {
        const CanonicalCodeTable::Entry& e = table.entries[sym];
        if (e.len == 0 || e.len > root_bits) continue;
        const uint32_t first = e.code << (root_bits - e.len);
        const uint32_t span = 1u << (root_bits - e.len);
        for (uint32_t i = 0; i < span; ++i)
            dec.root[first + i] = {static_cast<uint16_t>(sym), e.len, -1, 0};
    }

    // Longer codes, grouped by root prefix. Each group's sub-table is sized
    // by the longest code it must resolve.
    std::vector<int> group_max(size_t(1) << root_bits, 0);
    for (uint32_t sym = 0; sym < table.entries.size(); ++sym) {
        const CanonicalCodeTable::Entry& e = table.entries[sym];
        if (e.len <= root_bits) continue;
        if (e.len > max_code_width)
            throw error(errc::contract, "two-level table: code longer than table width");
        const uint32_t prefix = e.code >> (e.len - root_bits);
        group_max[prefix] = std::max<int>(group_max[prefix], e.len);
    }
    for (uint32_t prefix = 0; prefix < group_max.size(); ++prefix) {
        if (group_max[prefix] == 0) continue;
        const int bits = group_max[prefix] - root_bits;
        dec.root[prefix] = {0, 0, static_cast<int32_t>(dec.sub.size()), static_cast<uint8_t>(bits)};
        dec.sub.resize(dec.sub.size() + (size_t(1) << bits));
    }
    for (uint32_t sym = 0; sym < table.entries.size(); ++sym) {
        const CanonicalCodeTable::Entry& e = table.entries[sym];
        if (e.len <= root_bits) continue;
        const uint32_t prefix = e.code >> (e.len - root_bits);
        const TwoLevelDecoderTable::RootEntry& r = dec.root[prefix];
        const uint32_t tail = e.code & detail::field_mask(e.len - root_bits);
        const int dup = r.sub_bits - (e.len - root_bits);
        const uint32_t first = tail << dup;
        for (uint32_t i = 0; i < (1u << dup); ++i)
            dec.sub[static_cast<uint32_t>(r.sub) + first + i] = {static_cast<uint16_t>(sym), e.len};
    }
    return dec;
}

inline float decode_value(EFloatWord word, const TwoLevelDecoderTable& dec,
                          const EFloatConfig& cfg) {
    const int n = cfg.bits;
    const int K = dec.width;
    uint32_t sign = 0;
    uint32_t window;
    if (cfg.mode == SymbolMode::ExponentOnly) {
        sign = (word >> (n - 1)) & 1u;
        window = (word >> (n - 1 - K)) & detail::field_mask(K);
    } else {
        window = (word >> (n - K)) & detail::field_mask(K);
    }
    const DecoderTable::Entry e = dec.lookup(window);
    if (e.len == 0) throw error(errc::data, "efloat decode: invalid coded exponent (corrupt stream?)");
    const int sig_width = cfg.significand_width(e.len);
    const uint32_t stored = word & detail::field_mask(sig_width);
    Fp32Parts p;
    p.significand = detail::restore_significand(stored, sig_width);
    p.biased_exponent = e.symbol & 0xFFu;
    p.sign = cfg.mode == SymbolMode::ExponentOnly ? sign : (e.symbol >> 8);
    return float_of(compose_fp32(p));
}

// Packs values at a fixed n-bit pitch; the tail byte is zero padded.
inline std::vector<uint8_t> encode_stream(std::span<const float> values,
                                          const CanonicalCodeTable& table,
                                          const EFloatConfig& cfg) {
    cfg.validate();
    // Find the first uncovered symbol up front so the error is deterministic
    // and the packing loop below cannot fail halfway.
    for (size_t i = 0; i < values.size(); ++i) {
        const uint32_t sym = symbol_of(values[i], cfg.mode);
        if (!table.has(sym)) throw missing_symbol_error(sym, i);
    }
    std::vector<EFloatWord> words(values.size());
    parallel_for(values.size(), [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) words[i] = encode_value(values[i], table, cfg, i);
    });
    BitWriter w;
    for (EFloatWord word : words) w.put(word, cfg.bits);
    return std::move(w).take();
}

inline void decode_into(std::span<const uint8_t> payload, const DecoderTable& dec,
                        const EFloatConfig& cfg, size_t first, size_t count,
                        std::span<float> out) {
    BitReader r(payload);
    if ((first + count) * static_cast<size_t>(cfg.bits) > r.bit_size())
        throw error(errc::data, "efloat decode: payload shorter than value count");
    parallel_for(count, [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            const uint64_t word = r.read_at((first + i) * cfg.bits, cfg.bits);
            out[i] = decode_value(static_cast<EFloatWord>(word), dec, cfg);
        }
    });
}

inline std::vector<float> decode_stream(std::span<const uint8_t> payload, const DecoderTable& dec,
                                        const EFloatConfig& cfg, size_t count) {
    cfg.validate();
    std::vector<float> out(count);
    decode_into(payload, dec, cfg, 0, count, out);
    return out;
}

// Decodes the `dim` values of one row, seeking straight to its bit offset.
inline std::vector<float> decode_row(std::span<const uint8_t> payload, const DecoderTable& dec,
                                     const EFloatConfig& cfg, size_t dim, size_t row_index) {
    cfg.validate();
    if (dim == 0) return {};
    const size_t rows = payload.size() * 8 / (static_cast<size_t>(cfg.bits) * dim);
    if (row_index >= rows)
        throw error(errc::data, "efloat decode: row index out of range");
    std::vector<float> out(dim);
    decode_into(payload, dec, cfg, row_index * dim, dim, out);
    return out;
}

} // namespace efloat
