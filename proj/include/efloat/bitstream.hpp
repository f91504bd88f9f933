#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "efloat/error.hpp"

// Bit packing, most-significant-bit first within each byte. Prefix codes
// read naturally left to right in this order.

namespace efloat {

class BitWriter {
public:
    // Appends the low `nbits` of `value`, most significant first.
    void put(uint64_t value, int nbits) {
        for (int i = nbits - 1; i >= 0; --i) {
            const uint32_t bit = (value >> i) & 1u;
            if (fill_ == 0) bytes_.push_back(0);
            bytes_.back() = static_cast<uint8_t>(bytes_.back() | (bit << (7 - fill_)));
            fill_ = (fill_ + 1) & 7;
        }
    }

    size_t bit_count() const noexcept { return bytes_.size() * 8 - (fill_ ? 8 - fill_ : 0); }

    // Remaining bits of the last byte are already zero.
    std::vector<uint8_t> take() && { return std::move(bytes_); }
    const std::vector<uint8_t>& bytes() const noexcept { return bytes_; }

private:
    std::vector<uint8_t> bytes_;
    unsigned fill_ = 0;  // bits used in the last byte, 0..7 (0 = byte full/none)
};

class BitReader {
public:
    explicit BitReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

    // Reads `nbits` starting at absolute bit offset `pos`.
    uint64_t read_at(size_t pos, int nbits) const {
        if (pos + static_cast<size_t>(nbits) > bytes_.size() * 8)
            throw error(errc::data, "bitstream: read past end of payload");
        uint64_t v = 0;
        for (int i = 0; i < nbits; ++i, ++pos)
            v = (v << 1) | ((bytes_[pos >> 3] >> (7 - (pos & 7))) & 1u);
        return v;
    }

    size_t bit_size() const noexcept { return bytes_.size() * 8; }

private:
    std::span<const uint8_t> bytes_;
};

} // namespace efloat
