#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "embias/common.hpp"

namespace embias {

struct StringViewHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

// Immutable vocabulary plus dense float32 matrix, in file order. File order
// is descending corpus frequency for word2vec GoogleNews, and the frequency
// filter depends on it being preserved exactly.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::uint32_t dim, std::vector<std::string> words, std::vector<float> matrix);

    std::uint32_t dim() const noexcept { return dim_; }
    std::uint32_t count() const noexcept { return static_cast<std::uint32_t>(words_.size()); }
    const std::vector<std::string>& words() const noexcept { return words_; }
    const std::string& word(std::uint32_t row) const { return words_.at(row); }

    std::span<const float> row(std::uint32_t i) const {
        return {matrix_.data() + static_cast<std::size_t>(i) * dim_, dim_};
    }
    const std::vector<float>& matrix() const noexcept { return matrix_; }

    std::optional<std::uint32_t> find(std::string_view token) const;
    // Throws MissingWordError naming the token.
    std::uint32_t require(std::string_view token) const;
    std::span<const float> lookup(std::string_view token) const { return row(require(token)); }
    bool contains(std::string_view token) const { return find(token).has_value(); }

    // Per-record trailing-newline flags as seen by the binary parser; kept so
    // serialization reproduces the input bytes exactly. Tables built in
    // memory default to a newline after every record (the classic layout).
    const std::vector<bool>& record_newlines() const noexcept { return record_newlines_; }
    void set_record_newlines(std::vector<bool> flags);

private:
    friend EmbeddingTable parse_word2vec_binary(std::istream&, const struct ParseOptions&,
                                                std::vector<std::string>*);
    std::uint32_t dim_ = 0;
    std::vector<std::string> words_;
    std::vector<float> matrix_;  // count x dim, row-major
    std::unordered_map<std::string, std::uint32_t, StringViewHash, std::equal_to<>> index_;
    std::vector<bool> record_newlines_;
};

struct ParseOptions {
    std::size_t max_token_bytes = 1000;  // longer tokens signal a corrupt stream
};

// Binary word2vec: ASCII header "<count> <dim>\n", then per record the token
// bytes terminated by 0x20 followed by dim little-endian float32 values and
// an optional single trailing '\n'. Duplicate tokens keep the first
// occurrence and append a warning. Floats are taken bit-exact.
EmbeddingTable parse_word2vec_binary(std::istream& in, const ParseOptions& opts = {},
                                     std::vector<std::string>* warnings = nullptr);

// Text word2vec: optional "<count> <dim>" header line, then one
// "token v1 ... vdim" line per word.
EmbeddingTable parse_word2vec_text(std::istream& in, const ParseOptions& opts = {},
                                   std::vector<std::string>* warnings = nullptr);

void write_word2vec_binary(const EmbeddingTable& table, std::ostream& out);
// Writes shortest round-trip decimal floats so text -> parse is lossless.
void write_word2vec_text(const EmbeddingTable& table, std::ostream& out, bool header = true);

enum class EmbeddingFormat { Binary, Text };

EmbeddingTable load_embedding(const std::string& path, EmbeddingFormat format,
                              std::vector<std::string>* warnings = nullptr);

// Unit-norm image of every row. Zero-norm source rows are flagged and must
// be excluded from similarity queries.
class NormalizedView {
public:
    explicit NormalizedView(const EmbeddingTable& table);

    const EmbeddingTable& source() const noexcept { return *table_; }
    std::span<const float> row(std::uint32_t i) const {
        return {unit_.data() + static_cast<std::size_t>(i) * table_->dim(), table_->dim()};
    }
    bool zero_norm(std::uint32_t i) const { return zero_[i]; }

private:
    const EmbeddingTable* table_;
    std::vector<float> unit_;
    std::vector<bool> zero_;
};

// u.v / (|u||v|), accumulated in double and clamped to [-1, 1].
// Throws InvalidArgument on a zero vector.
double cosine(std::span<const float> u, std::span<const float> v);
double cosine(std::span<const double> u, std::span<const double> v);
double cosine(const EmbeddingTable& table, std::string_view a, std::string_view b);

// L2 norms of every row, double accumulation.
std::vector<double> row_norms(const EmbeddingTable& table, unsigned threads = 1);

// True when the token survives the frequency-statistics filter: ASCII
// letters only (this drops digits, punctuation and multiword underscore
// phrases) and at most 20 characters.
bool frequent_word_eligible(std::string_view token) noexcept;

// Rows of the first n words that pass frequent_word_eligible, in file order.
// Throws InvalidArgument when n exceeds the vocabulary size.
std::vector<std::uint32_t> frequent_word_filter(const EmbeddingTable& table, std::uint32_t n = 50000);

// Provenance hash over dim, words and matrix bytes.
std::uint64_t table_checksum(const EmbeddingTable& table);

// Sidecar cache for data derived from one embedding file: row norms and the
// default frequent-word filter. Versioned header; load fails closed (returns
// nullopt) on version or source-checksum mismatch.
struct EmbeddingCache {
    std::uint64_t source_checksum = 0;
    std::uint32_t count = 0;
    std::uint32_t dim = 0;
    std::vector<double> norms;
    std::vector<std::uint32_t> frequent_rows;
};

void write_embedding_cache(const EmbeddingCache& cache, const std::string& path);
std::optional<EmbeddingCache> try_load_embedding_cache(const std::string& path,
                                                       std::uint64_t expected_source_checksum);

}  // namespace embias
