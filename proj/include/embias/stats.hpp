#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "embias/common.hpp"

namespace embias {

// Chance-corrected agreement. `degenerate` marks inputs whose chance
// agreement is 1 (every annotator constant on one label); such inputs are
// reported as 1 rather than NaN so experiment means stay finite.
struct KappaResult {
    double value = 0.0;
    bool degenerate = false;
};

// Cohen's kappa for two annotators over categorical labels.
KappaResult cohen_kappa(std::span<const int> a, std::span<const int> b);

// Fully populated subjects x annotators grid of categorical labels.
// Subjects with missing labels must be dropped before construction.
struct AnnotationMatrix {
    std::uint32_t n_subjects = 0;
    std::uint32_t n_annotators = 0;
    std::vector<int> labels;  // row-major, subjects x annotators

    int at(std::uint32_t subject, std::uint32_t annotator) const {
        return labels[static_cast<std::size_t>(subject) * n_annotators + annotator];
    }
};

KappaResult fleiss_kappa(const AnnotationMatrix& m);

// Landis-Koch interpretation bands.
std::string_view kappa_band(double k);

struct PearsonResult {
    double r = 0.0;
    double p = 1.0;
    bool exhaustive = false;  // p from full enumeration rather than sampling
};

// Sample correlation with a two-sided permutation p-value: the fraction of
// permutations of ys with |r_perm| >= |r| (within 1e-12). Enumerates all n!
// permutations when n! <= 500,000; otherwise draws `permutations` seeded
// samples and reports the add-one smoothed fraction.
PearsonResult pearson_r(std::span<const double> xs, std::span<const double> ys,
                        std::uint64_t permutations = 100000, std::uint64_t seed = 0);

struct PopulationStats {
    double mean = 0.0;
    double std = 0.0;  // population denominator
    std::uint64_t n = 0;
};

// Streaming mean/std accumulator with compensated sums. Merging partials in
// a fixed order reproduces the sequential result bit for bit.
class PopulationAccumulator {
public:
    void add(double x) noexcept {
        sum_.add(x);
        sumsq_.add(x * x);
        ++n_;
    }
    void merge(const PopulationAccumulator& other) noexcept {
        sum_.merge(other.sum_);
        sumsq_.merge(other.sumsq_);
        n_ += other.n_;
    }
    std::uint64_t count() const noexcept { return n_; }
    PopulationStats finalize() const;

private:
    CompensatedSum sum_;
    CompensatedSum sumsq_;
    std::uint64_t n_ = 0;
};

PopulationStats population_stats(std::span<const double> scores);

}  // namespace embias
