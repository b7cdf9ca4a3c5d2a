#include "embias/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "embias/parallel.hpp"

namespace embias {

namespace {

double dot_raw(std::span<const float> w, std::span<const double> axis) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += static_cast<double>(w[i]) * axis[i];
    return acc;
}

double norm_of(std::span<const float> v) {
    double ss = 0.0;
    for (const float x : v) ss += static_cast<double>(x) * x;
    return std::sqrt(ss);
}

std::string join(std::span<const std::string> tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ',';
        out += t;
    }
    return out;
}

}  // namespace

std::string_view to_string(Direction d) noexcept {
    switch (d) {
        case Direction::First: return "first";
        case Direction::Second: return "second";
        case Direction::Neutral: return "neutral";
    }
    return "?";
}

std::string_view to_string(Measure m) noexcept {
    switch (m) {
        case Measure::DbWa: return "DB/WA";
        case Measure::Ripa: return "RIPA";
        case Measure::Nbm: return "NBM";
    }
    return "?";
}

std::optional<Measure> measure_from_string(std::string_view name) noexcept {
    if (name == "dbwa" || name == "DB/WA" || name == "db" || name == "wa") return Measure::DbWa;
    if (name == "ripa" || name == "RIPA") return Measure::Ripa;
    if (name == "nbm" || name == "NBM") return Measure::Nbm;
    return std::nullopt;
}

BasePair::BasePair(std::string f, std::string s) : first(std::move(f)), second(std::move(s)) {
    if (first == second) {
        throw InvalidArgument("degenerate base pair: \"" + first + "\" twice");
    }
    if (first.empty() || second.empty()) {
        throw InvalidArgument("base pair members must be non-empty");
    }
}

PairAxis::PairAxis(const EmbeddingTable& table, const BasePair& pair)
    : pair_(pair), x_row_(table.require(pair.first)), y_row_(table.require(pair.second)) {
    const auto x = table.row(x_row_);
    const auto y = table.row(y_row_);
    const double nx = norm_of(x);
    const double ny = norm_of(y);
    if (nx == 0.0 || ny == 0.0) {
        throw InvalidArgument("base pair member has a zero vector: " + pair_.label());
    }
    const std::uint32_t dim = table.dim();
    diff_normed_.resize(dim);
    for (std::uint32_t j = 0; j < dim; ++j) {
        diff_normed_[j] = static_cast<double>(x[j]) / nx - static_cast<double>(y[j]) / ny;
    }
    std::vector<double> diff_raw(dim);
    double ss = 0.0;
    for (std::uint32_t j = 0; j < dim; ++j) {
        diff_raw[j] = static_cast<double>(x[j]) - static_cast<double>(y[j]);
        ss += diff_raw[j] * diff_raw[j];
    }
    const double diff_norm = std::sqrt(ss);
    if (diff_norm > 0.0) {
        diff_unit_raw_.resize(dim);
        for (std::uint32_t j = 0; j < dim; ++j) diff_unit_raw_[j] = diff_raw[j] / diff_norm;
    }
}

double PairAxis::dbwa_value(const EmbeddingTable& table, std::uint32_t w_row) const {
    const auto w = table.row(w_row);
    const double nw = norm_of(w);
    if (nw == 0.0) {
        throw InvalidArgument("zero vector for word \"" + table.word(w_row) + "\"");
    }
    return std::clamp(dot_raw(w, diff_normed_) / nw, -2.0, 2.0);
}

double PairAxis::ripa_value(const EmbeddingTable& table, std::uint32_t w_row) const {
    if (diff_unit_raw_.empty()) {
        throw InvalidArgument("RIPA undefined: base pair " + pair_.label() +
                              " has a zero difference vector");
    }
    return dot_raw(table.row(w_row), diff_unit_raw_);
}

BiasScore direct_bias(const EmbeddingTable& table, std::string_view w, const BasePair& pair) {
    const PairAxis axis(table, pair);
    const double value = axis.dbwa_value(table, table.require(w));
    return {value, Measure::DbWa, pair, direction_of(value)};
}

BiasScore ripa(const EmbeddingTable& table, std::string_view w, const BasePair& pair) {
    const PairAxis axis(table, pair);
    const double value = axis.ripa_value(table, table.require(w));
    return {value, Measure::Ripa, pair, direction_of(value)};
}

BiasScore word_association(const EmbeddingTable& table, std::string_view w,
                           std::span<const std::string> X, std::span<const std::string> Y) {
    if (X.empty() || Y.empty()) throw InvalidArgument("word_association: empty attribute set");
    const auto wv = table.lookup(w);
    double mean_x = 0.0;
    for (const auto& x : X) mean_x += cosine(wv, table.lookup(x));
    mean_x /= static_cast<double>(X.size());
    double mean_y = 0.0;
    for (const auto& y : Y) mean_y += cosine(wv, table.lookup(y));
    mean_y /= static_cast<double>(Y.size());
    const double value = mean_x - mean_y;

    std::string f = join(X), s = join(Y);
    if (f == s) {
        f = "X{" + f + "}";
        s = "Y{" + s + "}";
    }
    return {value, Measure::DbWa, BasePair(std::move(f), std::move(s)), direction_of(value)};
}

NeutralSet NeutralSet::build(const EmbeddingTable& table, std::span<const std::string> tokens,
                             std::vector<std::string>* dropped) {
    NeutralSet set;
    set.dim_ = table.dim();
    set.rows_.reserve(tokens.size());
    for (const auto& token : tokens) {
        const auto row = table.find(token);
        if (!row) {
            if (dropped) dropped->push_back(token);
            continue;
        }
        if (set.row_to_pos_.contains(*row)) continue;  // duplicate token, keep first
        const auto v = table.row(*row);
        const double norm = norm_of(v);
        if (norm == 0.0) {
            if (dropped) dropped->push_back(token);
            continue;
        }
        set.row_to_pos_.emplace(*row, static_cast<std::uint32_t>(set.rows_.size()));
        set.rows_.push_back(*row);
        for (const float x : v) set.unit_.push_back(static_cast<double>(x) / norm);
    }
    return set;
}

std::optional<std::uint32_t> NeutralSet::position_of(std::uint32_t vocab_row) const {
    const auto it = row_to_pos_.find(vocab_row);
    if (it == row_to_pos_.end()) return std::nullopt;
    return it->second;
}

namespace {

// Scores every candidate against the unit query and keeps the top k by
// (score desc, vocab row asc). The score kernel is a fixed-order double
// dot product so single and batch paths agree bit for bit.
std::vector<std::uint32_t> select_top_k(std::uint32_t w_row, const NeutralSet& candidates,
                                        std::uint32_t k, const std::vector<double>& w_unit) {
    const std::uint32_t n = candidates.size();
    const auto self = candidates.position_of(w_row);
    const std::uint32_t eligible = n - (self ? 1u : 0u);
    if (k > eligible) {
        throw InvalidArgument("top_k_neighbors: K=" + std::to_string(k) + " exceeds " +
                              std::to_string(eligible) + " eligible candidates");
    }
    std::vector<double> scores(n);
    for (std::uint32_t pos = 0; pos < n; ++pos) {
        const auto c = candidates.unit(pos);
        double acc = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) acc += w_unit[j] * c[j];
        scores[pos] = acc;
    }
    std::vector<std::uint32_t> order;
    order.reserve(n);
    for (std::uint32_t pos = 0; pos < n; ++pos) {
        if (self && pos == *self) continue;
        order.push_back(pos);
    }
    const auto better = [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return candidates.vocab_row(a) < candidates.vocab_row(b);
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), better);
    order.resize(k);
    return order;
}

std::vector<double> unit_query(const EmbeddingTable& table, std::uint32_t w_row) {
    const auto w = table.row(w_row);
    const double nw = norm_of(w);
    if (nw == 0.0) {
        throw InvalidArgument("zero vector for word \"" + table.word(w_row) + "\"");
    }
    std::vector<double> unit(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) unit[j] = static_cast<double>(w[j]) / nw;
    return unit;
}

}  // namespace

std::vector<std::uint32_t> top_k_neighbor_positions(const EmbeddingTable& table,
                                                    std::uint32_t w_row,
                                                    const NeutralSet& candidates,
                                                    std::uint32_t k) {
    return select_top_k(w_row, candidates, k, unit_query(table, w_row));
}

std::vector<std::uint32_t> top_k_neighbor_rows(const EmbeddingTable& table, std::uint32_t w_row,
                                               const NeutralSet& candidates, std::uint32_t k) {
    auto positions = top_k_neighbor_positions(table, w_row, candidates, k);
    std::vector<std::uint32_t> rows(positions.size());
    std::transform(positions.begin(), positions.end(), rows.begin(),
                   [&](std::uint32_t pos) { return candidates.vocab_row(pos); });
    return rows;
}

std::vector<std::string> top_k_neighbors(const EmbeddingTable& table, std::string_view w,
                                         const NeutralSet& candidates, std::uint32_t k) {
    const auto rows = top_k_neighbor_rows(table, table.require(w), candidates, k);
    std::vector<std::string> tokens(rows.size());
    std::transform(rows.begin(), rows.end(), tokens.begin(),
                   [&](std::uint32_t row) { return table.word(row); });
    return tokens;
}

std::vector<Direction> candidate_directions(const EmbeddingTable& table,
                                            const NeutralSet& candidates, const PairAxis& axis) {
    std::vector<Direction> dirs(candidates.size());
    for (std::uint32_t pos = 0; pos < candidates.size(); ++pos) {
        dirs[pos] = direction_of(axis.dbwa_value(table, candidates.vocab_row(pos)));
    }
    return dirs;
}

double nbm_value_from_neighbors(std::span<const std::uint32_t> neighbor_positions,
                                std::span<const Direction> directions, std::uint32_t k) {
    std::int64_t first = 0, second = 0;
    for (const std::uint32_t pos : neighbor_positions) {
        switch (directions[pos]) {
            case Direction::First: ++first; break;
            case Direction::Second: ++second; break;
            case Direction::Neutral: break;
        }
    }
    return static_cast<double>(first - second) / static_cast<double>(k);
}

BiasScore nbm(const EmbeddingTable& table, std::string_view w, const BasePair& pair,
              const NeutralSet& candidates, std::uint32_t k) {
    if (k == 0) throw InvalidArgument("nbm: K must be positive");
    const PairAxis axis(table, pair);
    const auto positions = top_k_neighbor_positions(table, table.require(w), candidates, k);
    const auto dirs = candidate_directions(table, candidates, axis);
    const double value = nbm_value_from_neighbors(positions, dirs, k);
    return {value, Measure::Nbm, pair, direction_of(value)};
}

std::vector<double> dbwa_values(const EmbeddingTable& table, std::span<const std::uint32_t> rows,
                                const PairAxis& axis, unsigned threads) {
    return parallel_map<double>(
        rows.size(), threads, [&](std::size_t i) { return axis.dbwa_value(table, rows[i]); });
}

std::vector<double> ripa_values(const EmbeddingTable& table, std::span<const std::uint32_t> rows,
                                const PairAxis& axis, unsigned threads) {
    return parallel_map<double>(
        rows.size(), threads, [&](std::size_t i) { return axis.ripa_value(table, rows[i]); });
}

std::vector<std::vector<std::uint32_t>> top_k_neighbor_positions_batch(
    const EmbeddingTable& table, std::span<const std::uint32_t> w_rows,
    const NeutralSet& candidates, std::uint32_t k, unsigned threads) {
    return parallel_map<std::vector<std::uint32_t>>(
        w_rows.size(), threads,
        [&](std::size_t i) {
            return top_k_neighbor_positions(table, w_rows[i], candidates, k);
        },
        16);
}

}  // namespace embias
