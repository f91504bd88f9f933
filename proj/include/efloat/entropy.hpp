#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <span>
#include <vector>

#include "efloat/error.hpp"
#include "efloat/fp_bits.hpp"

// Exponent histogram collection and length-limited canonical Huffman code
// construction over the 256-symbol exponent alphabet (or the 512-symbol
// joint sign+exponent alphabet).

namespace efloat {

enum class SymbolMode : uint8_t {
    ExponentOnly = 0,       // symbol = biased exponent, alphabet size 256
    JointSignExponent = 1,  // symbol = (sign << 8) | biased exponent, alphabet size 512
};

constexpr size_t symbol_space(SymbolMode mode) noexcept {
    return mode == SymbolMode::ExponentOnly ? 256 : 512;
}

inline uint32_t symbol_of_bits(uint32_t fp32_bits, SymbolMode mode) noexcept {
    const Fp32Parts p = decompose_fp32(fp32_bits);
    return mode == SymbolMode::ExponentOnly ? p.biased_exponent
                                            : (p.sign << 8) | p.biased_exponent;
}

inline uint32_t symbol_of(float value, SymbolMode mode) noexcept {
    return symbol_of_bits(bits_of(value), mode);
}

struct SymbolHistogram {
    SymbolMode mode = SymbolMode::ExponentOnly;
    std::vector<uint64_t> counts;  // indexed by symbol
    uint64_t total = 0;

    explicit SymbolHistogram(SymbolMode m = SymbolMode::ExponentOnly)
        : mode(m), counts(symbol_space(m), 0) {}

    void add(uint32_t symbol, uint64_t n = 1) {
        counts.at(symbol) += n;
        total += n;
    }

    // Element-wise merge of a partial histogram (parallel collection).
    void merge(const SymbolHistogram& other) {
        if (other.mode != mode)
            throw error(errc::contract, "histogram merge: mode mismatch");
        for (size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
        total += other.total;
    }

    size_t present() const noexcept {
        size_t n = 0;
        for (uint64_t c : counts) n += c != 0;
        return n;
    }

    // Copy with every absent symbol given count 1, for pre-built tables that
    // must cover exponents unseen in the sampled data.
    SymbolHistogram with_all_symbols() const {
        SymbolHistogram h = *this;
        for (uint64_t& c : h.counts) {
            if (c == 0) {
                c = 1;
                ++h.total;
            }
        }
        return h;
    }
};

// Counts every stride-th value's symbol, starting at index 0.
inline SymbolHistogram build_histogram(std::span<const float> values, SymbolMode mode,
                                       size_t sample_stride = 1) {
    if (sample_stride < 1)
        throw error(errc::contract, "build_histogram: stride must be >= 1");
    SymbolHistogram hist(mode);
    for (size_t i = 0; i < values.size(); i += sample_stride)
        hist.add(symbol_of(values[i], mode));
    return hist;
}

struct CodeLengths {
    SymbolMode mode = SymbolMode::ExponentOnly;
    std::vector<uint8_t> lengths;  // 0 = symbol absent

    explicit CodeLengths(SymbolMode m = SymbolMode::ExponentOnly)
        : mode(m), lengths(symbol_space(m), 0) {}

    int max_length() const noexcept {
        uint8_t m = 0;
        for (uint8_t l : lengths) m = std::max(m, l);
        return m;
    }
};

inline double kraft_sum(const CodeLengths& cl) noexcept {
    double s = 0.0;
    for (uint8_t l : cl.lengths)
        if (l) s += std::ldexp(1.0, -int(l));
    return s;
}

// Optimal prefix-code lengths under a maximum width, via package-merge.
//
// The chosen length multiset minimizes sum(count * length) subject to
// Kraft <= 1 and length <= max_width. Lengths are then assigned to symbols
// sorted by (count descending, symbol ascending) so that more frequent
// exponents always get the shorter codes and the output is deterministic.
inline CodeLengths limited_huffman_lengths(const SymbolHistogram& hist, int max_width) {
    if (max_width < 1 || max_width > 32)
        throw error(errc::config, "limited_huffman_lengths: max width must be in [1, 32]");

    struct Leaf {
        uint64_t count;
        uint32_t symbol;
    };
    std::vector<Leaf> present;
    for (uint32_t s = 0; s < hist.counts.size(); ++s)
        if (hist.counts[s] != 0) present.push_back({hist.counts[s], s});

    CodeLengths out(hist.mode);
    const size_t m = present.size();
    if (m == 0) return out;
    if (m == 1) {
        // A lone symbol still gets a 1-bit code so every word has a
        // decodable exponent field.
        out.lengths[present[0].symbol] = 1;
        return out;
    }
    if (max_width < 64 && m > (size_t(1) << max_width))
        throw error(errc::capacity, "limited_huffman_lengths: more symbols than codes of max width");

    // Package-merge works on weights sorted ascending; each item remembers
    // which leaves it packages so chosen items can be charged back.
    std::vector<size_t> order(m);
    for (size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (present[a].count != present[b].count) return present[a].count < present[b].count;
        return present[a].symbol < present[b].symbol;
    });

    struct Item {
        uint64_t weight;
        std::vector<uint16_t> leaves;  // positions in the sorted order
    };
    std::vector<Item> leaves_items(m);
    for (size_t i = 0; i < m; ++i)
        leaves_items[i] = {present[order[i]].count, {static_cast<uint16_t>(i)}};

    std::vector<Item> list = leaves_items;
    for (int level = 1; level < max_width; ++level) {
        std::vector<Item> packages;
        packages.reserve(list.size() / 2);
        for (size_t i = 0; i + 1 < list.size(); i += 2) {
            Item pkg;
            pkg.weight = list[i].weight + list[i + 1].weight;
            pkg.leaves = list[i].leaves;
            pkg.leaves.insert(pkg.leaves.end(), list[i + 1].leaves.begin(), list[i + 1].leaves.end());
            packages.push_back(std::move(pkg));
        }
        std::vector<Item> next;
        next.reserve(m + packages.size());
        std::merge(leaves_items.begin(), leaves_items.end(), packages.begin(), packages.end(),
                   std::back_inserter(next),
                   [](const Item& a, const Item& b) { return a.weight < b.weight; });
        list = std::move(next);
    }

    std::vector<uint8_t> len_per_pos(m, 0);
    for (size_t i = 0; i < 2 * m - 2; ++i)
        for (uint16_t leaf : list[i].leaves) ++len_per_pos[leaf];

    // Reassign the multiset: shortest lengths to the heaviest symbols.
    std::vector<uint8_t> multiset(len_per_pos);
    std::sort(multiset.begin(), multiset.end());
    std::vector<size_t> by_weight_desc(m);
    for (size_t i = 0; i < m; ++i) by_weight_desc[i] = i;
    std::sort(by_weight_desc.begin(), by_weight_desc.end(), [&](size_t a, size_t b) {
        if (present[a].count != present[b].count) return present[a].count > present[b].count;
        return present[a].symbol < present[b].symbol;
    });
    for (size_t i = 0; i < m; ++i)
        out.lengths[present[by_weight_desc[i]].symbol] = multiset[i];
    return out;
}

struct CanonicalCodeTable {
    struct Entry {
        uint32_t code = 0;  // right-aligned, `len` significant bits
        uint8_t len = 0;    // 0 = symbol absent
    };

    SymbolMode mode = SymbolMode::ExponentOnly;
    int max_width = 0;  // largest assigned length
    std::vector<Entry> entries;

    bool has(uint32_t symbol) const noexcept {
        return symbol < entries.size() && entries[symbol].len != 0;
    }
    const Entry& at(uint32_t symbol) const { return entries.at(symbol); }

    size_t present() const noexcept {
        size_t n = 0;
        for (const Entry& e : entries) n += e.len != 0;
        return n;
    }
};

// Canonical assignment: codes issued in increasing (length, symbol) order.
// The table is therefore fully determined by the lengths alone, which is
// what the serialized container stores.
inline CanonicalCodeTable canonical_codes(const CodeLengths& cl) {
    CanonicalCodeTable table;
    table.mode = cl.mode;
    table.entries.resize(cl.lengths.size());

    std::vector<uint32_t> syms;
    for (uint32_t s = 0; s < cl.lengths.size(); ++s)
        if (cl.lengths[s] != 0) syms.push_back(s);
    if (syms.empty()) return table;

    std::sort(syms.begin(), syms.end(), [&](uint32_t a, uint32_t b) {
        if (cl.lengths[a] != cl.lengths[b]) return cl.lengths[a] < cl.lengths[b];
        return a < b;
    });

    const int max_len = cl.lengths[syms.back()];
    uint64_t kraft = 0;  // in units of 2^-max_len
    for (uint32_t s : syms) kraft += uint64_t(1) << (max_len - cl.lengths[s]);
    if (kraft > (uint64_t(1) << max_len))
        throw error(errc::contract, "canonical_codes: lengths violate the Kraft inequality");

    uint32_t code = 0;
    int prev_len = cl.lengths[syms.front()];
    for (size_t i = 0; i < syms.size(); ++i) {
        const uint32_t s = syms[i];
        const int len = cl.lengths[s];
        if (i != 0) code = (code + 1) << (len - prev_len);
        table.entries[s] = {code, static_cast<uint8_t>(len)};
        prev_len = len;
    }
    table.max_width = max_len;
    return table;
}

// Count-weighted mean code length in bits/symbol.
inline double average_code_width(const SymbolHistogram& hist, const CodeLengths& cl) {
    if (hist.total == 0)
        throw error(errc::contract, "average_code_width: empty histogram");
    uint64_t weighted = 0;
    for (size_t s = 0; s < hist.counts.size(); ++s)
        weighted += hist.counts[s] * cl.lengths[s];
    return static_cast<double>(weighted) / static_cast<double>(hist.total);
}

} // namespace efloat
