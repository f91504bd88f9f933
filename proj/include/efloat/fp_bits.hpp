#pragma once

#include <bit>
#include <cstdint>

#include "efloat/error.hpp"

// IEEE 754 binary32 field access plus the reduced-precision conversions
// (BF16, FP16) used as comparison baselines. Significand truncation supports
// deterministic round-to-nearest (DETR) and stochastic (STOC) modes.

namespace efloat {

inline constexpr int kFp32SignificandBits = 23;
inline constexpr int kFp32ExponentBias = 127;
inline constexpr uint32_t kFp32SignificandMask = (1u << kFp32SignificandBits) - 1;

struct Fp32Parts {
    uint32_t sign;             // 0 or 1
    uint32_t biased_exponent;  // [0, 255]
    uint32_t significand;      // 23 bits, no implied leading 1

    bool operator==(const Fp32Parts&) const = default;
};

constexpr Fp32Parts decompose_fp32(uint32_t bits) noexcept {
    return Fp32Parts{
        bits >> 31,
        (bits >> kFp32SignificandBits) & 0xFFu,
        bits & kFp32SignificandMask,
    };
}

constexpr uint32_t compose_fp32(const Fp32Parts& p) {
    if (p.sign > 1 || p.biased_exponent > 255 || p.significand > kFp32SignificandMask)
        throw error(errc::contract, "compose_fp32: field out of range");
    return (p.sign << 31) | (p.biased_exponent << kFp32SignificandBits) | p.significand;
}

inline uint32_t bits_of(float x) noexcept { return std::bit_cast<uint32_t>(x); }
inline float float_of(uint32_t bits) noexcept { return std::bit_cast<float>(bits); }

inline bool is_nan_bits(uint32_t bits) noexcept {
    const Fp32Parts p = decompose_fp32(bits);
    return p.biased_exponent == 255 && p.significand != 0;
}

enum class Rounding : uint8_t { Detr = 0, Stoc = 1 };

struct RoundingMode {
    Rounding kind = Rounding::Detr;
    uint64_t seed = 0;  // used by Stoc only

    static constexpr RoundingMode detr() { return {Rounding::Detr, 0}; }
    static constexpr RoundingMode stoc(uint64_t seed) { return {Rounding::Stoc, seed}; }
};

// Counter-based generator: one value per (seed, element index), so stochastic
// rounding of a stream is reproducible and independent of evaluation order.
inline uint64_t mix_u64(uint64_t seed, uint64_t index) noexcept {
    uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Uniform draw in [0, 1).
inline double stoc_draw(uint64_t seed, uint64_t index) noexcept {
    return static_cast<double>(mix_u64(seed, index) >> 11) * 0x1.0p-53;
}

// Truncates a 23-bit significand to keep_width bits.
//
// DETR increments the kept field when the leading dropped bit is 1; STOC
// increments with probability value(d)/2^(d+1), d dropped bits. Either way an
// increment that would carry out of the kept field is suppressed (the field
// saturates at all-ones) so the exponent is never disturbed.
inline uint32_t round_significand(uint32_t m, int keep_width, RoundingMode mode, double draw = 0.0) {
    if (keep_width < 1 || keep_width > kFp32SignificandBits)
        throw error(errc::contract, "round_significand: keep_width out of range");
    const int d = kFp32SignificandBits - keep_width;
    uint32_t kept = m >> d;
    if (d == 0) return kept;

    const uint32_t dropped = m & ((1u << d) - 1);
    bool increment = false;
    if (mode.kind == Rounding::Detr) {
        increment = (dropped >> (d - 1)) & 1u;
    } else {
        const double p = static_cast<double>(dropped) / static_cast<double>(1ull << (d + 1));
        increment = draw < p;
    }
    const uint32_t all_ones = (1u << keep_width) - 1;
    if (increment && kept != all_ones) ++kept;
    return kept;
}

namespace detail {

// Shared by the 16-bit baselines and the EFn encoder: truncate the
// significand of a special value (biased exponent 255) without rounding, and
// keep NaN a NaN when every surviving payload bit happens to be zero.
inline uint32_t truncate_special_significand(uint32_t m, int keep_width) noexcept {
    uint32_t kept = m >> (kFp32SignificandBits - keep_width);
    if (m != 0 && kept == 0) kept = 1u << (keep_width - 1);
    return kept;
}

} // namespace detail

// FP32 -> BF16: same sign and 8-bit exponent, significand cut to 7 bits.
inline uint16_t to_bf16(float x, RoundingMode mode = RoundingMode::detr(), uint64_t index = 0) {
    const Fp32Parts p = decompose_fp32(bits_of(x));
    uint32_t sig;
    if (p.biased_exponent == 255) {
        sig = detail::truncate_special_significand(p.significand, 7);
    } else {
        const double draw = mode.kind == Rounding::Stoc ? stoc_draw(mode.seed, index) : 0.0;
        sig = round_significand(p.significand, 7, mode, draw);
    }
    return static_cast<uint16_t>((p.sign << 15) | (p.biased_exponent << 7) | sig);
}

inline float widen_bf16(uint16_t b) noexcept {
    return float_of(static_cast<uint32_t>(b) << 16);
}

inline constexpr int kFp16ExponentBias = 15;

// FP32 -> FP16: exponent re-biased, significand cut to 10 bits. Magnitudes
// outside the FP16 normal range become +-Inf / signed zero; FP16 denormals
// are never produced.
inline uint16_t to_fp16(float x, RoundingMode mode = RoundingMode::detr(), uint64_t index = 0) {
    const Fp32Parts p = decompose_fp32(bits_of(x));
    const uint16_t sign = static_cast<uint16_t>(p.sign << 15);
    if (p.biased_exponent == 255) {
        const uint32_t sig = detail::truncate_special_significand(p.significand, 10);
        return static_cast<uint16_t>(sign | (31u << 10) | sig);
    }
    if (p.biased_exponent == 0) return sign;  // zero or denormal: flush
    const int unbiased = static_cast<int>(p.biased_exponent) - kFp32ExponentBias;
    if (unbiased > 15) return static_cast<uint16_t>(sign | (31u << 10));
    if (unbiased < -14) return sign;
    const double draw = mode.kind == Rounding::Stoc ? stoc_draw(mode.seed, index) : 0.0;
    const uint32_t sig = round_significand(p.significand, 10, mode, draw);
    return static_cast<uint16_t>(sign | static_cast<uint32_t>(unbiased + kFp16ExponentBias) << 10 | sig);
}

inline float widen_fp16(uint16_t h) noexcept {
    const uint32_t sign = (h >> 15) & 1u;
    const uint32_t exp = (h >> 10) & 0x1Fu;
    uint32_t sig = h & 0x3FFu;
    if (exp == 31) return float_of((sign << 31) | (255u << 23) | (sig << 13));
    if (exp == 0) {
        if (sig == 0) return float_of(sign << 31);
        // FP16 denormal: renormalize into an FP32 normal.
        int shift = 0;
        while ((sig & 0x400u) == 0) {
            sig <<= 1;
            ++shift;
        }
        const uint32_t e = static_cast<uint32_t>(kFp32ExponentBias - kFp16ExponentBias + 1 - shift);
        return float_of((sign << 31) | (e << 23) | ((sig & 0x3FFu) << 13));
    }
    const uint32_t e = exp - kFp16ExponentBias + kFp32ExponentBias;
    return float_of((sign << 31) | (e << 23) | (sig << 13));
}

} // namespace efloat
