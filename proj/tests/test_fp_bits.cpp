#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "efloat/fp_bits.hpp"

using namespace efloat;

TEST_CASE("decompose_fp32 basic patterns") {
    CHECK(decompose_fp32(0x3F800000) == Fp32Parts{0, 127, 0});
    CHECK(decompose_fp32(0x80000000) == Fp32Parts{1, 0, 0});
    CHECK(decompose_fp32(0x3E9FBE77) == Fp32Parts{0, 125, 0x1FBE77});
    CHECK(bits_of(0.312f) == 0x3E9FBE77);
}

TEST_CASE("decompose fields match arithmetic reconstruction") {
    // Independent route: rebuild the numeric value from the decomposed
    // fields with ldexp and compare against the float itself.
    std::mt19937_64 gen(7);
    int checked = 0;
    while (checked < 20000) {
        const uint32_t bits = static_cast<uint32_t>(gen());
        const Fp32Parts p = decompose_fp32(bits);
        if (p.biased_exponent == 0 || p.biased_exponent == 255) continue;  // normals only
        const double mant = 1.0 + static_cast<double>(p.significand) * 0x1.0p-23;
        const double value = std::ldexp(p.sign ? -mant : mant, int(p.biased_exponent) - 127);
        CHECK(value == static_cast<double>(float_of(bits)));
        ++checked;
    }
}

TEST_CASE("compose_fp32 basic patterns and overflow") {
    CHECK(compose_fp32({0, 127, 0}) == 0x3F800000);
    CHECK(compose_fp32({1, 255, 0}) == 0xFF800000);
    CHECK(float_of(compose_fp32({1, 255, 0})) == -std::numeric_limits<float>::infinity());
    CHECK(compose_fp32({0, 125, 0x200000}) == 0x3EA00000);
    CHECK(float_of(0x3EA00000) == 0.3125f);
    CHECK_THROWS_AS(compose_fp32({2, 0, 0}), error);
    CHECK_THROWS_AS(compose_fp32({0, 256, 0}), error);
    CHECK_THROWS_AS(compose_fp32({0, 0, 1u << 23}), error);
}

TEST_CASE("compose(decompose(x)) round-trips random patterns") {
    std::mt19937_64 gen(11);
    for (int i = 0; i < 1'000'000; ++i) {
        const uint32_t bits = static_cast<uint32_t>(gen());
        CHECK(compose_fp32(decompose_fp32(bits)) == bits);
    }
    // NaN payloads in particular
    CHECK(compose_fp32(decompose_fp32(0x7FC00001)) == 0x7FC00001);
    CHECK(compose_fp32(decompose_fp32(0xFF800123)) == 0xFF800123);
}

TEST_CASE("round_significand DETR rules") {
    CHECK(round_significand(0x7FFFFF, 7, RoundingMode::detr()) == 0x7F);  // carry suppressed
    CHECK(round_significand(0x400000, 7, RoundingMode::detr()) == 0x40);  // leading dropped bit 0
    CHECK(round_significand(0x00FFFF, 7, RoundingMode::detr()) == 0x01);  // round up
    CHECK(round_significand(0x123456, 23, RoundingMode::detr()) == 0x123456);  // nothing dropped
    CHECK_THROWS_AS(round_significand(0, 0, RoundingMode::detr()), error);
    CHECK_THROWS_AS(round_significand(0, 24, RoundingMode::detr()), error);
}

TEST_CASE("round_significand result always fits keep_width") {
    std::mt19937_64 gen(3);
    for (int i = 0; i < 50000; ++i) {
        const uint32_t m = static_cast<uint32_t>(gen()) & kFp32SignificandMask;
        const int keep = 1 + static_cast<int>(gen() % 23);
        const uint32_t r = round_significand(m, keep, RoundingMode::detr());
        CHECK(r < (1u << keep));
    }
}

TEST_CASE("round_significand DETR error within one kept ULP") {
    std::mt19937_64 gen(5);
    for (int i = 0; i < 50000; ++i) {
        const uint32_t m = static_cast<uint32_t>(gen()) & kFp32SignificandMask;
        const int keep = 1 + static_cast<int>(gen() % 23);
        const uint32_t r = round_significand(m, keep, RoundingMode::detr());
        const double original = static_cast<double>(m) * 0x1.0p-23;
        const double kept = static_cast<double>(r) * std::ldexp(1.0, -keep);
        CHECK(std::fabs(kept - original) <= std::ldexp(1.0, -keep));
    }
}

TEST_CASE("round_significand STOC distribution and reproducibility") {
    const uint32_t m = 0x155554;  // arbitrary
    const int keep = 10;
    const int d = 23 - keep;
    const uint32_t dropped = m & ((1u << d) - 1);
    const double p = static_cast<double>(dropped) / static_cast<double>(1u << (d + 1));

    const RoundingMode mode = RoundingMode::stoc(42);
    const int trials = 100000;
    int ups = 0;
    for (int i = 0; i < trials; ++i) {
        const uint32_t r = round_significand(m, keep, mode, stoc_draw(mode.seed, i));
        CHECK((r == (m >> d) || r == (m >> d) + 1));
        ups += r == (m >> d) + 1;
    }
    const double freq = static_cast<double>(ups) / trials;
    const double sigma = std::sqrt(p * (1 - p) / trials);
    CHECK(std::fabs(freq - p) < 5 * sigma);

    // Fixed seed and index: bit-identical on every call.
    for (int i = 0; i < 100; ++i) {
        CHECK(round_significand(m, keep, mode, stoc_draw(mode.seed, i)) ==
              round_significand(m, keep, mode, stoc_draw(mode.seed, i)));
    }
}

TEST_CASE("to_bf16 examples") {
    CHECK(to_bf16(1.0f) == 0x3F80);
    CHECK(widen_bf16(0x3F80) == 1.0f);
    CHECK(to_bf16(std::numeric_limits<float>::infinity()) == 0x7F80);
    CHECK(to_bf16(0.312f) == 0x3EA0);
    CHECK(widen_bf16(0x3EA0) == 0.3125f);
    CHECK(to_bf16(-0.0f) == 0x8000);
    CHECK(widen_bf16(to_bf16(-0.0f)) == 0.0f);
    CHECK(std::signbit(widen_bf16(to_bf16(-0.0f))));
}

TEST_CASE("to_bf16 NaN stays NaN even when the payload is truncated away") {
    const float nan_low_payload = float_of(0x7F8000FF);  // payload only in dropped bits
    CHECK(std::isnan(nan_low_payload));
    const uint16_t b = to_bf16(nan_low_payload);
    CHECK(std::isnan(widen_bf16(b)));
    const uint16_t bn = to_bf16(float_of(0xFF8003FF));
    CHECK(std::isnan(widen_bf16(bn)));
}

TEST_CASE("to_bf16 exact when low significand bits are zero") {
    std::mt19937_64 gen(13);
    for (int i = 0; i < 20000; ++i) {
        const uint32_t bits = static_cast<uint32_t>(gen()) & 0xFFFF0000u;
        const float x = float_of(bits);
        if (std::isnan(x)) continue;
        CHECK(bits_of(widen_bf16(to_bf16(x))) == bits);
    }
}

TEST_CASE("to_fp16 examples") {
    CHECK(to_fp16(1.0f) == 0x3C00);
    CHECK(to_fp16(1e30f) == 0x7C00);
    CHECK(widen_fp16(0x7C00) == std::numeric_limits<float>::infinity());
    CHECK(to_fp16(1e-30f) == 0x0000);
    CHECK(widen_fp16(to_fp16(1e-30f)) == 0.0f);
    CHECK(to_fp16(-1e-30f) == 0x8000);
    CHECK(std::signbit(widen_fp16(to_fp16(-1e-30f))));
    CHECK(std::isnan(widen_fp16(to_fp16(std::numeric_limits<float>::quiet_NaN()))));
    // NaN whose surviving payload bits would be zero
    CHECK(std::isnan(widen_fp16(to_fp16(float_of(0x7F800001)))));
    // largest FP16 normal magnitude is preserved
    CHECK(widen_fp16(to_fp16(65504.0f)) == 65504.0f);
}

TEST_CASE("widen_fp16 handles denormal inputs") {
    CHECK(widen_fp16(0x0001) == std::ldexp(1.0f, -24));
    CHECK(widen_fp16(0x03FF) == 1023.0f * std::ldexp(1.0f, -24));
    CHECK(widen_fp16(0x8001) == -std::ldexp(1.0f, -24));
}

TEST_CASE("fp16 round-trip on representable values") {
    std::mt19937_64 gen(17);
    for (int i = 0; i < 20000; ++i) {
        // random FP16 normal, widened: must survive the round trip
        const uint16_t h = static_cast<uint16_t>(gen());
        const uint32_t exp = (h >> 10) & 0x1F;
        if (exp == 0 || exp == 31) continue;
        const float x = widen_fp16(h);
        CHECK(to_fp16(x) == h);
    }
}

TEST_CASE("stochastic conversions are reproducible per element index") {
    const RoundingMode mode = RoundingMode::stoc(99);
    std::mt19937_64 gen(23);
    for (int i = 0; i < 1000; ++i) {
        const float x = float_of(static_cast<uint32_t>(gen()));
        if (std::isnan(x)) continue;
        CHECK(to_bf16(x, mode, i) == to_bf16(x, mode, i));
        CHECK(to_fp16(x, mode, i) == to_fp16(x, mode, i));
    }
}
