#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "efloat/error.hpp"
#include "efloat/fp_bits.hpp"

// Embedding-model file parsing: word2vec text, word2vec binary, GloVe text.

namespace efloat {

struct EmbeddingModel {
    std::vector<std::string> tokens;
    size_t dim = 0;
    std::vector<float> matrix;  // row-major, tokens.size() * dim

    size_t token_count() const noexcept { return tokens.size(); }

    std::span<const float> row(size_t i) const {
        return std::span<const float>(matrix).subspan(i * dim, dim);
    }
    std::span<float> row(size_t i) {
        return std::span<float>(matrix).subspan(i * dim, dim);
    }

    std::span<const float> values() const noexcept { return matrix; }
};

namespace detail {

inline bool parse_float(std::string_view field, float& out) {
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

inline bool parse_u64(std::string_view field, uint64_t& out) {
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

inline std::string format_float(float v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace detail

// Word2vec text ("count dim" header) or GloVe text (headerless); a first
// line of exactly two integer fields is taken as a header.
inline EmbeddingModel load_text_model(std::istream& in) {
    EmbeddingModel model;
    std::unordered_set<std::string> seen;
    uint64_t declared_count = 0;
    bool has_header = false;
    bool first_line = true;
    size_t line_no = 0;
    std::string line;

    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = detail::split_fields(line);
        if (fields.empty()) continue;

        if (first_line) {
            first_line = false;
            uint64_t a = 0, b = 0;
            if (fields.size() == 2 && detail::parse_u64(fields[0], a) &&
                detail::parse_u64(fields[1], b)) {
                has_header = true;
                declared_count = a;
                model.dim = b;
                continue;
            }
        }

        if (model.dim == 0 && model.tokens.empty()) {
            if (fields.size() < 2)
                throw error(errc::data, "text model: line " + std::to_string(line_no) +
                                            " has no vector values");
            model.dim = fields.size() - 1;
        }
        if (fields.size() != model.dim + 1)
            throw error(errc::data, "text model: line " + std::to_string(line_no) + " has " +
                                        std::to_string(fields.size() - 1) + " values, expected " +
                                        std::to_string(model.dim));
        for (size_t i = 1; i < fields.size(); ++i) {
            float v;
            if (!detail::parse_float(fields[i], v))
                throw error(errc::data, "text model: line " + std::to_string(line_no) +
                                            ": non-numeric field '" + std::string(fields[i]) + "'");
            model.matrix.push_back(v);
        }
        model.tokens.emplace_back(fields[0]);
        if (!seen.insert(model.tokens.back()).second)
            throw error(errc::data,
                        "text model: duplicate token '" + model.tokens.back() + "'");
    }

    if (has_header && model.tokens.size() != declared_count)
        throw error(errc::data, "text model: header declares " + std::to_string(declared_count) +
                                    " tokens, found " + std::to_string(model.tokens.size()));
    if (has_header && !model.tokens.empty() && model.matrix.size() != model.tokens.size() * model.dim)
        throw error(errc::data, "text model: matrix size mismatch");
    return model;
}

// Word2vec binary: ASCII "count dim\n" header, then per token the token
// bytes up to a space followed by dim little-endian FP32 values and an
// optional newline.
inline EmbeddingModel load_binary_model(std::span<const uint8_t> bytes) {
    size_t pos = 0;
    const auto offset_error = [&](const std::string& what) {
        return error(errc::data, "binary model: " + what + " at byte " + std::to_string(pos));
    };

    size_t header_end = 0;
    while (header_end < bytes.size() && bytes[header_end] != '\n') ++header_end;
    if (header_end == bytes.size()) throw offset_error("missing header line");
    const std::string_view header(reinterpret_cast<const char*>(bytes.data()), header_end);
    const auto fields = detail::split_fields(header);
    uint64_t count = 0, dim = 0;
    if (fields.size() != 2 || !detail::parse_u64(fields[0], count) ||
        !detail::parse_u64(fields[1], dim))
        throw offset_error("bad header '" + std::string(header) + "'");
    pos = header_end + 1;

    EmbeddingModel model;
    model.dim = dim;
    model.tokens.reserve(count);
    model.matrix.reserve(count * dim);
    std::unordered_set<std::string> seen;

    for (uint64_t t = 0; t < count; ++t) {
        size_t tok_end = pos;
        while (tok_end < bytes.size() && bytes[tok_end] != ' ') ++tok_end;
        if (tok_end == bytes.size()) throw offset_error("truncated token");
        model.tokens.emplace_back(reinterpret_cast<const char*>(bytes.data() + pos),
                                  tok_end - pos);
        if (!seen.insert(model.tokens.back()).second)
            throw error(errc::data,
                        "binary model: duplicate token '" + model.tokens.back() + "'");
        pos = tok_end + 1;
        if (pos + 4 * dim > bytes.size()) throw offset_error("truncated vector");
        for (uint64_t i = 0; i < dim; ++i) {
            const uint32_t w = uint32_t(bytes[pos]) | uint32_t(bytes[pos + 1]) << 8 |
                               uint32_t(bytes[pos + 2]) << 16 | uint32_t(bytes[pos + 3]) << 24;
            model.matrix.push_back(float_of(w));
            pos += 4;
        }
        if (pos < bytes.size() && bytes[pos] == '\n') ++pos;
    }
    return model;
}

inline void write_text_model(std::ostream& out, const EmbeddingModel& model) {
    out << model.token_count() << ' ' << model.dim << '\n';
    for (size_t t = 0; t < model.token_count(); ++t) {
        out << model.tokens[t];
        for (float v : model.row(t)) out << ' ' << detail::format_float(v);
        out << '\n';
    }
}

inline void write_binary_model(std::ostream& out, const EmbeddingModel& model) {
    out << model.token_count() << ' ' << model.dim << '\n';
    for (size_t t = 0; t < model.token_count(); ++t) {
        out << model.tokens[t] << ' ';
        for (float v : model.row(t)) {
            const uint32_t w = bits_of(v);
            const char le[4] = {char(w & 0xFF), char((w >> 8) & 0xFF), char((w >> 16) & 0xFF),
                                char(w >> 24)};
            out.write(le, 4);
        }
        out.put('\n');
    }
}

inline std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::data, "cannot open file: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return bytes;
}

// Loads a model file, working out the dialect from the content: a two-field
// integer first line marks a word2vec header (text or binary payload),
// anything else is treated as headerless GloVe text.
inline EmbeddingModel load_model(const std::string& path) {
    const std::vector<uint8_t> bytes = read_file_bytes(path);
    size_t header_end = 0;
    while (header_end < bytes.size() && bytes[header_end] != '\n') ++header_end;
    const auto fields = detail::split_fields(
        std::string_view(reinterpret_cast<const char*>(bytes.data()), header_end));
    uint64_t a = 0, b = 0;
    const bool two_int_header = fields.size() == 2 && detail::parse_u64(fields[0], a) &&
                                detail::parse_u64(fields[1], b);

    std::string text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    if (!two_int_header) {
        std::istringstream in(text);
        return load_text_model(in);
    }
    try {
        std::istringstream in(text);
        return load_text_model(in);
    } catch (const error&) {
        return load_binary_model(bytes);
    }
}

} // namespace efloat
