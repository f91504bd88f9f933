#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "efloat/error.hpp"
#include "efloat/fp_bits.hpp"
#include "efloat/model.hpp"

// Synthetic embedding models for tests and benchmarks. Exponents follow a
// discretized bell over a fixed window of unique values; significands and
// signs are uniform.

namespace efloat {

struct SynthConfig {
    size_t tokens = 1000;
    size_t dim = 50;
    int exp_center = -2;       // unbiased exponent of the histogram peak
    double exp_spread = 2.0;   // bell width, in exponent steps
    int unique_exponents = 23; // window size
    uint64_t seed = 0;
};

namespace detail {

// Bell shape: Gaussian core with an exponential lower tail, cut off at the
// window edges. Trained embedding weights are normalized, so their exponent
// histograms stop abruptly a little above the peak while trailing off for
// many steps below it; the mix reproduces that asymmetry.
inline std::vector<double> synth_exponent_weights(const SynthConfig& cfg, int& lo_offset) {
    const double sigma = cfg.exp_spread;
    const int hi = static_cast<int>(std::llround(sigma));
    const int lo = hi - (cfg.unique_exponents - 1);
    lo_offset = lo;
    std::vector<double> w;
    w.reserve(cfg.unique_exponents);
    for (int j = lo; j <= hi; ++j) {
        const double gauss = std::exp(-(double(j) * j) / (2.0 * sigma * sigma));
        double v = gauss;
        if (j < 0) v = std::max(gauss, std::exp(double(j) / (1.4 * sigma)));
        w.push_back(v);
    }
    return w;
}

} // namespace detail

inline EmbeddingModel synth_model(const SynthConfig& cfg) {
    if (cfg.tokens < 1 || cfg.dim < 1)
        throw error(errc::config, "synth: need at least one token and one dimension");
    if (cfg.unique_exponents < 1 || cfg.unique_exponents > 64)
        throw error(errc::config, "synth: unique exponent count must be in [1, 64]");
    if (!(cfg.exp_spread > 0.0))
        throw error(errc::config, "synth: spread must be positive");

    int lo = 0;
    const std::vector<double> weights = detail::synth_exponent_weights(cfg, lo);
    const int biased_lo = kFp32ExponentBias + cfg.exp_center + lo;
    const int biased_hi = biased_lo + cfg.unique_exponents - 1;
    if (biased_lo < 1 || biased_hi > 254)
        throw error(errc::config, "synth: exponent window leaves the FP32 normal range");

    std::vector<double> cumulative(weights.size());
    double total = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
        total += weights[i];
        cumulative[i] = total;
    }

    EmbeddingModel model;
    model.dim = cfg.dim;
    model.tokens.reserve(cfg.tokens);
    model.matrix.reserve(cfg.tokens * cfg.dim);
    std::mt19937_64 gen(cfg.seed);
    for (size_t t = 0; t < cfg.tokens; ++t) model.tokens.push_back("t" + std::to_string(t));
    for (size_t i = 0; i < cfg.tokens * cfg.dim; ++i) {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53 * total;
        size_t pick = 0;
        while (pick + 1 < cumulative.size() && cumulative[pick] <= u) ++pick;
        const uint64_t bits = gen();
        Fp32Parts p;
        p.sign = static_cast<uint32_t>(bits >> 63);
        p.biased_exponent = static_cast<uint32_t>(biased_lo + pick);
        p.significand = static_cast<uint32_t>(bits) & kFp32SignificandMask;
        model.matrix.push_back(float_of(compose_fp32(p)));
    }
    return model;
}

} // namespace efloat
