#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "embias/embedding.hpp"

namespace embias {

enum class Direction { First, Second, Neutral };
enum class Measure { DbWa, Ripa, Nbm };

// Direction is the sign of the score; exact zeros are Neutral.
inline Direction direction_of(double value) noexcept {
    if (value > 0.0) return Direction::First;
    if (value < 0.0) return Direction::Second;
    return Direction::Neutral;
}

std::string_view to_string(Direction d) noexcept;
std::string_view to_string(Measure m) noexcept;
std::optional<Measure> measure_from_string(std::string_view name) noexcept;

// Ordered gendered word pair; by convention the first member is the
// female-associated word, so Direction::First reads as female-leaning.
struct BasePair {
    std::string first;
    std::string second;

    BasePair(std::string f, std::string s);

    BasePair swapped() const { return {second, first}; }
    std::string label() const { return first + "/" + second; }
};

struct BiasScore {
    double value = 0.0;
    Measure measure = Measure::DbWa;
    BasePair pair;
    Direction direction = Direction::Neutral;
};

// A base pair resolved against a table, with both difference axes
// precomputed: the normalized-member difference for DB/WA and the
// unit-normalized raw difference for RIPA.
class PairAxis {
public:
    PairAxis(const EmbeddingTable& table, const BasePair& pair);

    const BasePair& pair() const noexcept { return pair_; }
    std::uint32_t first_row() const noexcept { return x_row_; }
    std::uint32_t second_row() const noexcept { return y_row_; }

    // w_hat . (x_hat - y_hat), clamped to [-2, 2].
    double dbwa_value(const EmbeddingTable& table, std::uint32_t w_row) const;
    // w . (x - y)/||x - y||, raw vectors throughout. Throws when x == y.
    double ripa_value(const EmbeddingTable& table, std::uint32_t w_row) const;

private:
    BasePair pair_;
    std::uint32_t x_row_ = 0;
    std::uint32_t y_row_ = 0;
    std::vector<double> diff_normed_;    // x_hat - y_hat
    std::vector<double> diff_unit_raw_;  // (x - y)/||x - y||; empty when x == y
};

BiasScore direct_bias(const EmbeddingTable& table, std::string_view w, const BasePair& pair);
BiasScore ripa(const EmbeddingTable& table, std::string_view w, const BasePair& pair);

// mean cos(w, x in X) - mean cos(w, y in Y). Equals direct_bias for
// singleton sets.
BiasScore word_association(const EmbeddingTable& table, std::string_view w,
                           std::span<const std::string> X, std::span<const std::string> Y);

// Candidate pool for NBM: tokens restricted to the vocabulary, de-duplicated,
// zero-norm rows dropped, with a precomputed normalized sub-matrix.
class NeutralSet {
public:
    static NeutralSet build(const EmbeddingTable& table, std::span<const std::string> tokens,
                            std::vector<std::string>* dropped = nullptr);

    std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(rows_.size()); }
    std::uint32_t vocab_row(std::uint32_t pos) const { return rows_[pos]; }
    const std::vector<std::uint32_t>& vocab_rows() const noexcept { return rows_; }
    std::span<const double> unit(std::uint32_t pos) const {
        return {unit_.data() + static_cast<std::size_t>(pos) * dim_, dim_};
    }
    std::optional<std::uint32_t> position_of(std::uint32_t vocab_row) const;

private:
    std::uint32_t dim_ = 0;
    std::vector<std::uint32_t> rows_;
    std::vector<double> unit_;
    std::unordered_map<std::uint32_t, std::uint32_t> row_to_pos_;
};

// The K candidates most cosine-similar to w, excluding w itself; ties break
// by ascending vocabulary row so results are stable across runs and
// platforms. Returned as positions into the candidate set, best first.
std::vector<std::uint32_t> top_k_neighbor_positions(const EmbeddingTable& table,
                                                    std::uint32_t w_row,
                                                    const NeutralSet& candidates, std::uint32_t k);

// Same neighbors as vocabulary rows / tokens.
std::vector<std::uint32_t> top_k_neighbor_rows(const EmbeddingTable& table, std::uint32_t w_row,
                                               const NeutralSet& candidates, std::uint32_t k);
std::vector<std::string> top_k_neighbors(const EmbeddingTable& table, std::string_view w,
                                         const NeutralSet& candidates, std::uint32_t k);

// DB/WA direction of every candidate under one pair, indexed by candidate
// position. Lets NBM reuse one neighborhood across base pairs.
std::vector<Direction> candidate_directions(const EmbeddingTable& table,
                                            const NeutralSet& candidates, const PairAxis& axis);

// (|First neighbors| - |Second neighbors|) / K over the K nearest
// candidates; exact-zero neighbors count in neither set.
BiasScore nbm(const EmbeddingTable& table, std::string_view w, const BasePair& pair,
              const NeutralSet& candidates, std::uint32_t k = 100);

double nbm_value_from_neighbors(std::span<const std::uint32_t> neighbor_positions,
                                std::span<const Direction> directions, std::uint32_t k);

// Batch helpers used by the experiment harness; outputs are input-ordered
// regardless of the parallelism degree.
std::vector<double> dbwa_values(const EmbeddingTable& table, std::span<const std::uint32_t> rows,
                                const PairAxis& axis, unsigned threads = 1);
std::vector<double> ripa_values(const EmbeddingTable& table, std::span<const std::uint32_t> rows,
                                const PairAxis& axis, unsigned threads = 1);
std::vector<std::vector<std::uint32_t>> top_k_neighbor_positions_batch(
    const EmbeddingTable& table, std::span<const std::uint32_t> w_rows,
    const NeutralSet& candidates, std::uint32_t k, unsigned threads = 1);

}  // namespace embias
