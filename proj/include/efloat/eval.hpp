#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "efloat/codec.hpp"
#include "efloat/entropy.hpp"
#include "efloat/error.hpp"
#include "efloat/fp_bits.hpp"
#include "efloat/model.hpp"
#include "efloat/parallel.hpp"

// Precision and ranking-quality evaluation: RMSE and RMSE ratios across
// formats, cosine top-k queries, NDCG@k against the FP32 ranking, and the
// value-distribution analyses (leading decimal digit, significand bits,
// exponent statistics).

namespace efloat {

struct FormatSpec {
    enum class Kind : uint8_t { Fp32, Bf16, Fp16, Efn };

    Kind kind = Kind::Fp32;
    int bits = 32;

    bool operator==(const FormatSpec&) const = default;

    static FormatSpec fp32() { return {Kind::Fp32, 32}; }
    static FormatSpec bf16() { return {Kind::Bf16, 16}; }
    static FormatSpec fp16() { return {Kind::Fp16, 16}; }
    static FormatSpec efn(int n) { return {Kind::Efn, n}; }

    static FormatSpec parse(std::string_view name) {
        if (name == "fp32") return fp32();
        if (name == "bf16") return bf16();
        if (name == "fp16") return fp16();
        if (name.size() > 2 && name.substr(0, 2) == "ef") {
            int n = 0;
            for (char c : name.substr(2)) {
                if (c < '0' || c > '9') n = -1;
                if (n < 0) break;
                n = n * 10 + (c - '0');
            }
            if (n >= 8 && n <= 28) return efn(n);
        }
        throw error(errc::config, "unknown format name: '" + std::string(name) + "'");
    }

    std::string name() const {
        switch (kind) {
        case Kind::Fp32: return "fp32";
        case Kind::Bf16: return "bf16";
        case Kind::Fp16: return "fp16";
        case Kind::Efn: return "ef" + std::to_string(bits);
        }
        return "?";
    }
};

// Round-trips every value through the given format. For EFn the code table
// is built from the values themselves; the requested max code width is
// clamped to what the bit budget allows (e.g. EF8 cannot carry 8-bit codes).
inline std::vector<float> reconstruct(std::span<const float> values, FormatSpec fmt,
                                      int max_code_width, SymbolMode mode, RoundingMode rounding) {
    std::vector<float> out(values.size());
    switch (fmt.kind) {
    case FormatSpec::Kind::Fp32:
        std::copy(values.begin(), values.end(), out.begin());
        break;
    case FormatSpec::Kind::Bf16:
        parallel_for(values.size(), [&](size_t b, size_t e) {
            for (size_t i = b; i < e; ++i) out[i] = widen_bf16(to_bf16(values[i], rounding, i));
        });
        break;
    case FormatSpec::Kind::Fp16:
        parallel_for(values.size(), [&](size_t b, size_t e) {
            for (size_t i = b; i < e; ++i) out[i] = widen_fp16(to_fp16(values[i], rounding, i));
        });
        break;
    case FormatSpec::Kind::Efn: {
        EFloatConfig cfg;
        cfg.bits = fmt.bits;
        cfg.mode = mode;
        cfg.rounding = rounding;
        cfg.max_code_width = std::min(max_code_width, fmt.bits - cfg.sign_bits() - 1);
        cfg.validate();
        const SymbolHistogram hist = build_histogram(values, mode);
        const CanonicalCodeTable table = canonical_codes(limited_huffman_lengths(hist, cfg.max_code_width));
        const DecoderTable dec = build_decoder_table(table, cfg.max_code_width);
        parallel_for(values.size(), [&](size_t b, size_t e) {
            for (size_t i = b; i < e; ++i)
                out[i] = decode_value(encode_value(values[i], table, cfg, i), dec, cfg);
        });
        break;
    }
    }
    return out;
}

// Root mean square of element-wise differences. Pairs where either side is
// not finite are skipped; the skip count is reported through `excluded`.
inline double rmse(std::span<const float> original, std::span<const float> reconstructed,
                   size_t* excluded = nullptr) {
    if (original.size() != reconstructed.size())
        throw error(errc::contract, "rmse: length mismatch");
    if (original.empty()) throw error(errc::contract, "rmse: empty input");
    long double sum = 0.0L;
    size_t used = 0;
    for (size_t i = 0; i < original.size(); ++i) {
        const double a = original[i];
        const double b = reconstructed[i];
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        const double d = a - b;
        sum += static_cast<long double>(d) * d;
        ++used;
    }
    if (excluded) *excluded = original.size() - used;
    if (used == 0) throw error(errc::data, "rmse: no finite value pairs");
    return std::sqrt(static_cast<double>(sum / used));
}

struct RmseEntry {
    FormatSpec format;
    double rmse = 0.0;
    size_t excluded = 0;
};

struct RmseReport {
    std::vector<RmseEntry> entries;

    const RmseEntry* find(FormatSpec f) const {
        for (const RmseEntry& e : entries)
            if (e.format == f) return &e;
        return nullptr;
    }

    // rmse(base) / rmse(target); > 1 means the target representation is
    // closer to the original. Exact targets give an infinite ratio.
    static double ratio(double base_rmse, double target_rmse) {
        if (target_rmse == 0.0) return std::numeric_limits<double>::infinity();
        return base_rmse / target_rmse;
    }
};

inline RmseReport rmse_ratio_report(const EmbeddingModel& model,
                                    std::span<const FormatSpec> formats, int max_code_width,
                                    SymbolMode mode, RoundingMode rounding) {
    RmseReport report;
    for (const FormatSpec& fmt : formats) {
        RmseEntry entry;
        entry.format = fmt;
        const std::vector<float> recon =
            reconstruct(model.values(), fmt, max_code_width, mode, rounding);
        entry.rmse = model.matrix.empty() ? 0.0 : rmse(model.values(), recon, &entry.excluded);
        report.entries.push_back(entry);
    }
    return report;
}

enum class QueryDirection : uint8_t { Similar, Dissimilar };

struct RankedItem {
    size_t index;
    double score;
};

struct RankedResult {
    std::vector<RankedItem> items;  // best first for the chosen direction
};

inline double cosine(std::span<const float> a, std::span<const float> b) {
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Exact top-k by cosine score over all rows except the query and any masked
// candidates. Ties break toward the lower token index so rankings are total
// orders and NDCG is well defined.
inline RankedResult topk_query(std::span<const float> matrix, size_t dim, size_t query_index,
                               size_t k, QueryDirection direction,
                               std::span<const uint8_t> candidate_mask = {}) {
    const size_t count = dim == 0 ? 0 : matrix.size() / dim;
    if (query_index >= count) throw error(errc::contract, "topk_query: query index out of range");
    if (k >= count) throw error(errc::contract, "topk_query: k must be below the token count");
    const std::span<const float> q = matrix.subspan(query_index * dim, dim);
    double qn = 0;
    for (float v : q) qn += static_cast<double>(v) * v;
    if (qn == 0) throw error(errc::data, "topk_query: query vector has zero norm");

    std::vector<RankedItem> scored;
    scored.reserve(count - 1);
    for (size_t t = 0; t < count; ++t) {
        if (t == query_index) continue;
        if (!candidate_mask.empty() && candidate_mask[t]) continue;
        scored.push_back({t, cosine(q, matrix.subspan(t * dim, dim))});
    }
    const auto better = [direction](const RankedItem& a, const RankedItem& b) {
        if (a.score != b.score)
            return direction == QueryDirection::Similar ? a.score > b.score : a.score < b.score;
        return a.index < b.index;
    };
    const size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + take, scored.end(), better);
    scored.resize(take);
    return RankedResult{std::move(scored)};
}

// Graded NDCG: an item at baseline position p (0-based) has relevance k-p,
// items outside the baseline top-k have relevance 0; positions are
// discounted by log2(i+2). The baseline ordering itself is the ideal.
inline double ndcg_at_k(const RankedResult& test, const RankedResult& baseline, size_t k) {
    if (baseline.items.empty()) throw error(errc::contract, "ndcg_at_k: empty baseline");
    if (k > test.items.size() || k > baseline.items.size())
        throw error(errc::contract, "ndcg_at_k: k exceeds ranking length");
    double dcg = 0, idcg = 0;
    for (size_t i = 0; i < k; ++i) {
        double rel = 0;
        for (size_t p = 0; p < k; ++p)
            if (baseline.items[p].index == test.items[i].index) {
                rel = static_cast<double>(k - p);
                break;
            }
        const double discount = std::log2(static_cast<double>(i) + 2.0);
        dcg += rel / discount;
        idcg += static_cast<double>(k - i) / discount;
    }
    return dcg / idcg;
}

struct QuerySuiteConfig {
    size_t queries = 20;
    size_t k = 10;
    uint64_t seed = 0;
    QueryDirection direction = QueryDirection::Similar;
};

struct QuerySuiteEntry {
    FormatSpec format;
    double mean_ndcg = 0.0;
};

namespace detail {

// mt19937_64 is fully specified, and we stick to raw draws so results are
// identical across standard libraries.
inline size_t bounded_draw(std::mt19937_64& gen, size_t bound) {
    return static_cast<size_t>(gen() % bound);
}

inline std::vector<size_t> sample_distinct(std::mt19937_64& gen, std::vector<size_t> pool,
                                           size_t n) {
    std::vector<size_t> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        const size_t j = i + bounded_draw(gen, pool.size() - i);
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

} // namespace detail

// Runs q seeded queries per format: rankings computed inside the
// reconstructed model are scored against the FP32 rankings. Zero-norm rows
// are kept out of the query pool and the candidate set of both sides.
inline std::vector<QuerySuiteEntry> query_suite(const EmbeddingModel& model,
                                                const QuerySuiteConfig& qcfg,
                                                std::span<const FormatSpec> formats,
                                                int max_code_width, SymbolMode mode,
                                                RoundingMode rounding) {
    if (qcfg.queries < 1 || qcfg.k < 1) throw error(errc::config, "query suite: need q >= 1, k >= 1");
    if (qcfg.queries > model.token_count())
        throw error(errc::config, "query suite: more queries than tokens");
    if (qcfg.k >= model.token_count())
        throw error(errc::config, "query suite: k must be below the token count");

    std::vector<uint8_t> zero_mask(model.token_count(), 0);
    std::vector<size_t> pool;
    for (size_t t = 0; t < model.token_count(); ++t) {
        double n2 = 0;
        for (float v : model.row(t)) n2 += static_cast<double>(v) * v;
        if (n2 == 0)
            zero_mask[t] = 1;
        else
            pool.push_back(t);
    }
    if (pool.size() < qcfg.queries)
        throw error(errc::data, "query suite: not enough nonzero vectors for the query count");

    std::mt19937_64 gen(qcfg.seed);
    const std::vector<size_t> queries = detail::sample_distinct(gen, std::move(pool), qcfg.queries);

    std::vector<RankedResult> baselines(queries.size());
    parallel_for(queries.size(), [&](size_t b, size_t e) {
        for (size_t i = b; i < e; ++i)
            baselines[i] =
                topk_query(model.values(), model.dim, queries[i], qcfg.k, qcfg.direction, zero_mask);
    });

    std::vector<QuerySuiteEntry> out;
    for (const FormatSpec& fmt : formats) {
        const std::vector<float> recon =
            reconstruct(model.values(), fmt, max_code_width, mode, rounding);
        std::vector<double> scores(queries.size());
        parallel_for(queries.size(), [&](size_t b, size_t e) {
            for (size_t i = b; i < e; ++i) {
                const RankedResult test =
                    topk_query(recon, model.dim, queries[i], qcfg.k, qcfg.direction, zero_mask);
                scores[i] = ndcg_at_k(test, baselines[i], qcfg.k);
            }
        });
        double mean = 0;
        for (double s : scores) mean += s;
        out.push_back({fmt, mean / static_cast<double>(scores.size())});
    }
    return out;
}

// Frequencies of the leading nonzero decimal digit of |value| over the
// finite nonzero values.
inline std::array<double, 9> benford_digits(std::span<const float> values) {
    std::array<uint64_t, 9> counts{};
    uint64_t total = 0;
    for (float v : values) {
        if (!std::isfinite(v) || v == 0.0f) continue;
        const double a = std::fabs(static_cast<double>(v));
        double mant = a / std::pow(10.0, std::floor(std::log10(a)));
        if (mant < 1.0) mant *= 10.0;
        if (mant >= 10.0) mant /= 10.0;
        int digit = static_cast<int>(mant);
        digit = std::clamp(digit, 1, 9);
        ++counts[digit - 1];
        ++total;
    }
    if (total == 0) throw error(errc::data, "benford_digits: no finite nonzero values");
    std::array<double, 9> freq{};
    for (int d = 0; d < 9; ++d)
        freq[d] = static_cast<double>(counts[d]) / static_cast<double>(total);
    return freq;
}

// Probability of each significand bit being 1; position 1 is the most
// significant of the 23 stored bits.
inline std::array<double, 23> significand_bit_distribution(std::span<const float> values) {
    if (values.empty())
        throw error(errc::contract, "significand_bit_distribution: empty input");
    std::array<uint64_t, 23> counts{};
    for (float v : values) {
        const uint32_t m = decompose_fp32(bits_of(v)).significand;
        for (int p = 0; p < 23; ++p) counts[p] += (m >> (22 - p)) & 1u;
    }
    std::array<double, 23> out{};
    for (int p = 0; p < 23; ++p)
        out[p] = static_cast<double>(counts[p]) / static_cast<double>(values.size());
    return out;
}

struct ExponentStats {
    size_t unique_exponents = 0;
    int min_code_width = 0;
    int max_code_width = 0;
    double avg_code_width = 0.0;
    double avg_significand_width = 0.0;
    size_t present_symbols = 0;
};

inline ExponentStats exponent_stats(std::span<const float> values, const EFloatConfig& cfg,
                                    size_t sample_stride = 1) {
    cfg.validate();
    const SymbolHistogram hist = build_histogram(values, cfg.mode, sample_stride);
    if (hist.total == 0) throw error(errc::data, "exponent_stats: empty model");
    const CodeLengths lengths = limited_huffman_lengths(hist, cfg.max_code_width);

    ExponentStats st;
    std::array<uint8_t, 256> seen_exponent{};
    int min_w = 255, max_w = 0;
    for (uint32_t s = 0; s < hist.counts.size(); ++s) {
        if (hist.counts[s] == 0) continue;
        ++st.present_symbols;
        seen_exponent[s & 0xFFu] = 1;
        min_w = std::min<int>(min_w, lengths.lengths[s]);
        max_w = std::max<int>(max_w, lengths.lengths[s]);
    }
    for (uint8_t b : seen_exponent) st.unique_exponents += b;
    st.min_code_width = min_w;
    st.max_code_width = max_w;
    st.avg_code_width = average_code_width(hist, lengths);
    st.avg_significand_width = cfg.bits - cfg.sign_bits() - st.avg_code_width;
    return st;
}

} // namespace efloat
