#pragma once

// Independent reference implementations used only by tests. Each computes
// its answer by direct enumeration with its own arithmetic, never through
// the code path it is checking.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "embias/embedding.hpp"
#include "embias/measures.hpp"

namespace embias::oracle {

inline double cosine_direct(std::span<const float> u, std::span<const float> v) {
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += static_cast<double>(u[i]) * v[i];
        nu += static_cast<double>(u[i]) * u[i];
        nv += static_cast<double>(v[i]) * v[i];
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

// Full-scan top-k by (cosine desc, vocabulary row asc), excluding the query
// word itself.
inline std::vector<std::uint32_t> knn_full_scan(const EmbeddingTable& table, std::uint32_t w_row,
                                                std::span<const std::uint32_t> candidate_rows,
                                                std::uint32_t k) {
    struct Scored {
        double score;
        std::uint32_t row;
    };
    std::vector<Scored> scored;
    for (const auto row : candidate_rows) {
        if (row == w_row) continue;
        scored.push_back({cosine_direct(table.row(w_row), table.row(row)), row});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.row < b.row;
    });
    std::vector<std::uint32_t> rows;
    for (std::uint32_t i = 0; i < k && i < scored.size(); ++i) rows.push_back(scored[i].row);
    return rows;
}

// DB direction by the raw sign of cos(w,x) - cos(w,y).
inline int db_direction(const EmbeddingTable& table, std::uint32_t w, std::uint32_t x,
                        std::uint32_t y) {
    const double d = cosine_direct(table.row(w), table.row(x)) -
                     cosine_direct(table.row(w), table.row(y));
    if (d > 0) return +1;
    if (d < 0) return -1;
    return 0;
}

// Independent recount of the NBM numerator over a neighbor list.
inline double nbm_recount(const EmbeddingTable& table, std::span<const std::uint32_t> neighbors,
                          std::uint32_t x, std::uint32_t y, std::uint32_t k) {
    long f = 0, m = 0;
    for (const auto row : neighbors) {
        const int d = db_direction(table, row, x, y);
        f += d > 0;
        m += d < 0;
    }
    return static_cast<double>(f - m) / static_cast<double>(k);
}

// Cohen's kappa by explicit contingency table.
inline double cohen_recount(std::span<const int> a, std::span<const int> b) {
    const double n = static_cast<double>(a.size());
    std::map<std::pair<int, int>, double> cells;
    std::map<int, double> ma, mb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cells[{a[i], b[i]}] += 1.0;
        ma[a[i]] += 1.0;
        mb[b[i]] += 1.0;
    }
    double p_o = 0.0;
    for (const auto& [key, count] : cells) {
        if (key.first == key.second) p_o += count;
    }
    p_o /= n;
    double p_e = 0.0;
    for (const auto& [label, ca] : ma) {
        const auto it = mb.find(label);
        if (it != mb.end()) p_e += (ca / n) * (it->second / n);
    }
    if (p_e == 1.0) return 1.0;
    return (p_o - p_e) / (1.0 - p_e);
}

// Fleiss' kappa from first principles over a subjects x annotators grid.
inline double fleiss_recount(std::span<const int> labels, std::size_t n_subjects,
                             std::size_t n_annotators) {
    std::map<int, std::size_t> category_index;
    for (const int l : labels) category_index.emplace(l, category_index.size());
    const std::size_t k = category_index.size();
    if (k == 1) return 1.0;
    std::vector<double> pj(k, 0.0);
    double p_bar = 0.0;
    const double n = static_cast<double>(n_annotators);
    for (std::size_t s = 0; s < n_subjects; ++s) {
        std::vector<double> counts(k, 0.0);
        for (std::size_t a = 0; a < n_annotators; ++a) {
            counts[category_index.at(labels[s * n_annotators + a])] += 1.0;
        }
        double sum_sq = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            sum_sq += counts[c] * counts[c];
            pj[c] += counts[c];
        }
        p_bar += (sum_sq - n) / (n * (n - 1.0));
    }
    p_bar /= static_cast<double>(n_subjects);
    double p_e = 0.0;
    for (const double mass : pj) {
        const double p = mass / (static_cast<double>(n_subjects) * n);
        p_e += p * p;
    }
    return (p_bar - p_e) / (1.0 - p_e);
}

inline double pearson_plain(std::span<const double> xs, std::span<const double> ys) {
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double num = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        sx += (xs[i] - mx) * (xs[i] - mx);
        sy += (ys[i] - my) * (ys[i] - my);
    }
    return num / std::sqrt(sx * sy);
}

// Exhaustive two-sided permutation p-value over all n! orders of ys.
inline double pearson_exhaustive_p(std::span<const double> xs, std::span<const double> ys) {
    std::vector<std::size_t> perm(xs.size());
    std::iota(perm.begin(), perm.end(), 0);
    const double r_obs = std::abs(pearson_plain(xs, ys));
    std::uint64_t hits = 0, total = 0;
    std::vector<double> permuted(ys.size());
    do {
        for (std::size_t i = 0; i < perm.size(); ++i) permuted[i] = ys[perm[i]];
        if (std::abs(pearson_plain(xs, permuted)) >= r_obs - 1e-12) ++hits;
        ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(hits) / static_cast<double>(total);
}

// Sequential two-pass mean / population standard deviation.
inline std::pair<double, double> two_pass_stats(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (const double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (const double x : xs) var += (x - mean) * (x - mean);
    return {mean, std::sqrt(var / n)};
}

}  // namespace embias::oracle
