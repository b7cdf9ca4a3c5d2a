#pragma once

#include <string>
#include <vector>

#include "embias/common.hpp"
#include "embias/embedding.hpp"

namespace embias::test {

// Bijective letters-only token ("a", "b", ..., "z", "aa", ...), so generated
// vocabularies stay unique and pass the frequency filter.
inline std::string letter_token(std::size_t i) {
    std::string out;
    do {
        out.insert(out.begin(), static_cast<char>('a' + i % 26));
        i = i / 26;
    } while (i-- > 0);
    return out;
}

// Uniform double in [-1, 1] built from uniform_below so fixtures are
// identical on every platform.
inline double uniform_pm1(Rng& rng) {
    return static_cast<double>(uniform_below(rng, 2000001)) / 1e6 - 1.0;
}

inline EmbeddingTable random_table(std::uint32_t count, std::uint32_t dim, std::uint64_t seed,
                                   double scale = 1.0) {
    Rng rng(seed);
    std::vector<std::string> words;
    std::vector<float> matrix;
    words.reserve(count);
    matrix.reserve(static_cast<std::size_t>(count) * dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        words.push_back(letter_token(i));
        bool nonzero = false;
        for (std::uint32_t j = 0; j < dim; ++j) {
            const float v = static_cast<float>(uniform_pm1(rng) * scale);
            nonzero = nonzero || v != 0.0f;
            matrix.push_back(v);
        }
        if (!nonzero) matrix[matrix.size() - dim] = 1e-3f;
    }
    return EmbeddingTable(dim, std::move(words), std::move(matrix));
}

inline std::vector<std::string> all_words(const EmbeddingTable& table) { return table.words(); }

}  // namespace embias::test
