#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "embias/measures.hpp"
#include "embias/stats.hpp"

namespace embias {

// "a is to b as c is to ?"
struct AnalogyQuery {
    std::string a, b, c;
};

struct AnalogyAnswer {
    std::string token;
    std::uint32_t row = 0;
    double score = 0.0;  // cosine of the winner against the composed query
};

// argmax over the vocabulary minus {a, b, c} of cos(w, b_hat - a_hat + c_hat).
// Ties break toward the lower vocabulary row. Pass precomputed row norms to
// amortize repeated queries.
AnalogyAnswer solve_3cosadd(const EmbeddingTable& table, const AnalogyQuery& query,
                            unsigned threads = 1, const std::vector<double>* norms = nullptr);

// Google analogy file: ": <category-name>" opens a category, every other
// nonempty line is exactly 4 whitespace-separated tokens.
struct AnalogySuite {
    struct Category {
        std::string name;
        std::vector<std::array<std::string, 4>> questions;
    };
    std::vector<Category> categories;
};

AnalogySuite parse_analogy_suite(std::istream& in);
AnalogySuite load_analogy_suite(const std::string& path);

struct TemplateSuiteOptions {
    std::vector<std::string> excluded_categories{"family"};
    unsigned threads = 1;
    const std::vector<double>* norms = nullptr;  // precomputed row norms, optional
};

struct TemplateCategoryResult {
    std::string name;
    std::uint32_t pairs = 0;  // unique pairs first seen in this category
    std::uint32_t attempted = 0;
    std::uint32_t correct = 0;
    std::uint32_t skipped = 0;  // out-of-vocabulary members
};

struct TemplateSuiteReport {
    std::uint32_t unique_pairs = 0;
    std::uint32_t attempted = 0;
    std::uint32_t correct = 0;
    std::uint32_t skipped_oov = 0;
    double accuracy = 0.0;  // correct / attempted
    PopulationStats pair_cosine;
    std::vector<TemplateCategoryResult> categories;
};

// Deduplicates the (x, y) pairs of every non-excluded category (both halves
// of each 4-token question, first-seen category attribution) and solves
// "<pair.second> is to x as <pair.first> is to ?" for each; a pair counts as
// correct only when the winner equals y exactly.
TemplateSuiteReport run_template_suite(const EmbeddingTable& table, const AnalogySuite& suite,
                                       const BasePair& template_pair,
                                       const TemplateSuiteOptions& options = {});

struct BiasedPair {
    std::uint32_t x_row = 0;
    std::uint32_t y_row = 0;
    double score = 0.0;      // cos(x_hat - y_hat, first_hat - second_hat)
    double cosine_xy = 0.0;  // cos(x, y)
};

// Ordered candidate pairs (x, y), x != y, with ||x_hat - y_hat|| <= delta
// (equivalently cos(x, y) >= 1 - delta^2/2), ranked by alignment of their
// difference vector with the template pair's. Returns the top_n best.
std::vector<BiasedPair> generate_biased_pairs(const EmbeddingTable& table, const BasePair& pair,
                                              std::span<const std::uint32_t> candidate_rows,
                                              double delta, std::uint32_t top_n,
                                              unsigned threads = 1);

struct SimilarityBaselines {
    PopulationStats pair;        // cos(a, b) over sampled distinct pairs
    PopulationStats difference;  // cos(a - b, c - d) over sampled distinct 4-tuples
};

// Seeded sampling over the given candidate rows; identical seeds reproduce
// identical reports.
SimilarityBaselines random_similarity_baselines(const EmbeddingTable& table,
                                                std::span<const std::uint32_t> candidate_rows,
                                                std::uint64_t n = 100000, std::uint64_t seed = 0);

}  // namespace embias
