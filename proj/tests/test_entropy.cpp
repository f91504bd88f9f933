#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "efloat/entropy.hpp"
#include "reference.hpp"

using namespace efloat;

namespace {

SymbolHistogram hist_from_counts(const std::vector<std::pair<uint32_t, uint64_t>>& counts,
                                 SymbolMode mode = SymbolMode::ExponentOnly) {
    SymbolHistogram h(mode);
    for (auto [sym, c] : counts) h.add(sym, c);
    return h;
}

bool prefix_free(const CanonicalCodeTable& t) {
    for (uint32_t a = 0; a < t.entries.size(); ++a) {
        if (!t.entries[a].len) continue;
        for (uint32_t b = 0; b < t.entries.size(); ++b) {
            if (a == b || !t.entries[b].len) continue;
            const auto& ea = t.entries[a];
            const auto& eb = t.entries[b];
            if (ea.len <= eb.len && (eb.code >> (eb.len - ea.len)) == ea.code) return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("build_histogram counts exponent symbols") {
    const std::vector<float> values = {1.0f, 1.0f, 0.5f};
    const SymbolHistogram h = build_histogram(values, SymbolMode::ExponentOnly);
    CHECK(h.total == 3);
    CHECK(h.counts[127] == 2);
    CHECK(h.counts[126] == 1);
    CHECK(h.present() == 2);
}

TEST_CASE("build_histogram joint mode folds the sign in") {
    const std::vector<float> values = {-1.0f, 1.0f};
    const SymbolHistogram h = build_histogram(values, SymbolMode::JointSignExponent);
    CHECK(h.counts[(1u << 8) | 127] == 1);
    CHECK(h.counts[127] == 1);
    CHECK(h.total == 2);
}

TEST_CASE("build_histogram stride sampling") {
    std::vector<float> values(1'000'000, 1.0f);
    const SymbolHistogram h = build_histogram(values, SymbolMode::ExponentOnly, 10);
    CHECK(h.total == 100'000);
    CHECK_THROWS_AS(build_histogram(values, SymbolMode::ExponentOnly, 0), error);
}

TEST_CASE("build_histogram of nothing is empty") {
    const SymbolHistogram h = build_histogram({}, SymbolMode::ExponentOnly);
    CHECK(h.total == 0);
    CHECK(h.present() == 0);
}

TEST_CASE("histogram merge adds element-wise") {
    SymbolHistogram a = hist_from_counts({{10, 3}, {20, 1}});
    const SymbolHistogram b = hist_from_counts({{10, 2}, {30, 5}});
    a.merge(b);
    CHECK(a.counts[10] == 5);
    CHECK(a.counts[20] == 1);
    CHECK(a.counts[30] == 5);
    CHECK(a.total == 11);
}

TEST_CASE("with_all_symbols covers the whole alphabet") {
    const SymbolHistogram h = hist_from_counts({{10, 7}}).with_all_symbols();
    CHECK(h.present() == 256);
    CHECK(h.counts[10] == 7);
    CHECK(h.counts[11] == 1);
    CHECK(h.total == 7 + 255);
}

TEST_CASE("limited_huffman_lengths on the classic 2-1-1 example") {
    const SymbolHistogram h = hist_from_counts({{65, 2}, {66, 1}, {67, 1}});
    const CodeLengths cl = limited_huffman_lengths(h, 8);
    CHECK(cl.lengths[65] == 1);
    CHECK(cl.lengths[66] == 2);
    CHECK(cl.lengths[67] == 2);
    CHECK(average_code_width(h, cl) == 1.5);
}

TEST_CASE("limited_huffman_lengths hits the exhaustive optimum under K=4") {
    const std::vector<uint64_t> counts = {21, 13, 8, 5, 3, 2, 1, 1};
    SymbolHistogram h(SymbolMode::ExponentOnly);
    for (size_t i = 0; i < counts.size(); ++i) h.add(static_cast<uint32_t>(i), counts[i]);
    const CodeLengths cl = limited_huffman_lengths(h, 4);

    uint64_t weighted = 0;
    int max_len = 0;
    for (size_t i = 0; i < counts.size(); ++i) {
        CHECK(cl.lengths[i] >= 1);
        max_len = std::max<int>(max_len, cl.lengths[i]);
        weighted += counts[i] * cl.lengths[i];
    }
    CHECK(max_len <= 4);
    CHECK(kraft_sum(cl) <= 1.0);
    CHECK(weighted == testref::exhaustive_limited_optimum(counts, 4));
}

TEST_CASE("single symbol still gets a 1-bit code") {
    const SymbolHistogram h = hist_from_counts({{200, 7}});
    const CodeLengths cl = limited_huffman_lengths(h, 8);
    CHECK(cl.lengths[200] == 1);
    CHECK(cl.max_length() == 1);
}

TEST_CASE("limited_huffman_lengths errors") {
    const SymbolHistogram h =
        hist_from_counts({{1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}});
    CHECK_THROWS_AS(limited_huffman_lengths(h, 2), error);  // 5 symbols, 4 codes
    CHECK_THROWS_AS(limited_huffman_lengths(h, 0), error);
}

TEST_CASE("fibonacci counts would exceed the cap without limiting") {
    // Fibonacci weights force a maximally skewed Huffman tree.
    std::vector<uint64_t> counts(30);
    uint64_t a = 1, b = 1;
    for (auto& c : counts) {
        c = a;
        const uint64_t n = a + b;
        a = b;
        b = n;
    }
    const std::vector<int> unconstrained = testref::huffman_lengths(counts);
    CHECK(*std::max_element(unconstrained.begin(), unconstrained.end()) > 8);

    SymbolHistogram h(SymbolMode::ExponentOnly);
    for (size_t i = 0; i < counts.size(); ++i) h.add(static_cast<uint32_t>(i), counts[i]);
    for (int K : {5, 8, 10}) {
        const CodeLengths cl = limited_huffman_lengths(h, K);
        CHECK(cl.max_length() <= K);
        CHECK(kraft_sum(cl) <= 1.0 + 1e-12);
        CHECK_NOTHROW(canonical_codes(cl));
    }
}

TEST_CASE("matches unconstrained Huffman cost when the limit is slack") {
    std::mt19937_64 gen(101);
    for (int iter = 0; iter < 200; ++iter) {
        const size_t m = 2 + gen() % 15;
        std::vector<uint64_t> counts(m);
        SymbolHistogram h(SymbolMode::ExponentOnly);
        for (size_t i = 0; i < m; ++i) {
            counts[i] = 1 + gen() % 1000;
            h.add(static_cast<uint32_t>(i), counts[i]);
        }
        const std::vector<int> ref = testref::huffman_lengths(counts);
        const int ref_max = *std::max_element(ref.begin(), ref.end());
        const int K = std::max(ref_max, 16);
        const CodeLengths cl = limited_huffman_lengths(h, K);
        std::vector<int> got(m);
        for (size_t i = 0; i < m; ++i) got[i] = cl.lengths[i];
        CHECK(testref::weighted_length(counts, got) == testref::weighted_length(counts, ref));
    }
}

TEST_CASE("more frequent symbols never get longer codes") {
    std::mt19937_64 gen(303);
    for (int iter = 0; iter < 100; ++iter) {
        SymbolHistogram h(SymbolMode::ExponentOnly);
        const size_t m = 2 + gen() % 30;
        for (size_t i = 0; i < m; ++i) h.add(static_cast<uint32_t>(gen() % 256), 1 + gen() % 100000);
        const CodeLengths cl = limited_huffman_lengths(h, 8);
        for (uint32_t a = 0; a < 256; ++a)
            for (uint32_t b = 0; b < 256; ++b)
                if (h.counts[a] && h.counts[b] && h.counts[a] >= h.counts[b])
                    CHECK(cl.lengths[a] <= cl.lengths[b]);
    }
}

TEST_CASE("tightening the limit never shrinks the average width") {
    std::mt19937_64 gen(404);
    for (int iter = 0; iter < 50; ++iter) {
        SymbolHistogram h(SymbolMode::ExponentOnly);
        const size_t m = 2 + gen() % 14;  // fits K=4
        for (size_t i = 0; i < m; ++i) h.add(static_cast<uint32_t>(i), 1 + gen() % 100000);
        double prev = 0.0;
        for (int K : {12, 10, 8, 5, 4}) {
            const double avg = average_code_width(h, limited_huffman_lengths(h, K));
            CHECK(avg >= prev - 1e-12);
            prev = avg;
        }
    }
}

TEST_CASE("canonical code assignment follows (length, symbol) order") {
    CodeLengths cl(SymbolMode::ExponentOnly);
    cl.lengths[10] = 1;
    cl.lengths[11] = 2;
    cl.lengths[12] = 3;
    cl.lengths[13] = 3;
    const CanonicalCodeTable t = canonical_codes(cl);
    CHECK(t.entries[10].code == 0b0);
    CHECK(t.entries[11].code == 0b10);
    CHECK(t.entries[12].code == 0b110);
    CHECK(t.entries[13].code == 0b111);
    CHECK(t.max_width == 3);
    CHECK(t.present() == 4);
}

TEST_CASE("canonical codes for the 2-1-1 histogram are 0, 10, 11") {
    const SymbolHistogram h = hist_from_counts({{65, 2}, {66, 1}, {67, 1}});
    const CanonicalCodeTable t = canonical_codes(limited_huffman_lengths(h, 8));
    CHECK(t.entries[65].code == 0b0);
    CHECK(t.entries[65].len == 1);
    CHECK(t.entries[66].code == 0b10);
    CHECK(t.entries[67].code == 0b11);
}

TEST_CASE("canonical codes for a uniform 4-symbol alphabet") {
    CodeLengths cl(SymbolMode::ExponentOnly);
    for (uint32_t s = 40; s < 44; ++s) cl.lengths[s] = 2;
    const CanonicalCodeTable t = canonical_codes(cl);
    for (uint32_t s = 40; s < 44; ++s) CHECK(t.entries[s].code == s - 40);
}

TEST_CASE("canonical_codes rejects Kraft violations") {
    CodeLengths cl(SymbolMode::ExponentOnly);
    cl.lengths[1] = 1;
    cl.lengths[2] = 1;
    cl.lengths[3] = 2;
    CHECK_THROWS_AS(canonical_codes(cl), error);
}

TEST_CASE("generated tables are always prefix-free") {
    std::mt19937_64 gen(505);
    for (int iter = 0; iter < 50; ++iter) {
        SymbolHistogram h(SymbolMode::ExponentOnly);
        const size_t m = 1 + gen() % 36;
        for (size_t i = 0; i < m; ++i) h.add(static_cast<uint32_t>(gen() % 256), 1 + gen() % 1000000);
        const CanonicalCodeTable t = canonical_codes(limited_huffman_lengths(h, 8));
        CHECK(prefix_free(t));
    }
}

TEST_CASE("average_code_width basics") {
    const SymbolHistogram single = hist_from_counts({{5, 9}});
    CHECK(average_code_width(single, limited_huffman_lengths(single, 8)) == 1.0);

    SymbolHistogram uniform(SymbolMode::ExponentOnly);
    for (uint32_t s = 0; s < 4; ++s) uniform.add(s, 10);
    CHECK(average_code_width(uniform, limited_huffman_lengths(uniform, 8)) == 2.0);

    const SymbolHistogram empty(SymbolMode::ExponentOnly);
    CHECK_THROWS_AS(average_code_width(empty, CodeLengths(SymbolMode::ExponentOnly)), error);
}
