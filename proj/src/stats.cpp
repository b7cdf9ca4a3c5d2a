#include "embias/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace embias {

namespace {

constexpr double kTieEps = 1e-12;
constexpr std::uint64_t kExhaustiveLimit = 500000;

bool constant(std::span<const int> v) {
    return std::all_of(v.begin(), v.end(), [&](int x) { return x == v.front(); });
}

double factorial_capped(std::size_t n, std::uint64_t cap) {
    std::uint64_t f = 1;
    for (std::size_t i = 2; i <= n; ++i) {
        f *= i;
        if (f > cap) return static_cast<double>(cap) + 1.0;
    }
    return static_cast<double>(f);
}

}  // namespace

KappaResult cohen_kappa(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw InvalidArgument("cohen_kappa: length mismatch");
    if (a.empty()) throw InvalidArgument("cohen_kappa: empty input");
    const double n = static_cast<double>(a.size());

    if (constant(a) && constant(b) && a.front() == b.front()) {
        // Chance agreement is exactly 1; observed agreement is necessarily 1 too.
        return {1.0, true};
    }

    std::size_t matches = 0;
    std::unordered_map<int, std::size_t> ca, cb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == b[i]) ++matches;
        ++ca[a[i]];
        ++cb[b[i]];
    }
    const double p_o = static_cast<double>(matches) / n;
    double p_e = 0.0;
    for (const auto& [label, count_a] : ca) {
        const auto it = cb.find(label);
        if (it != cb.end()) {
            p_e += (static_cast<double>(count_a) / n) * (static_cast<double>(it->second) / n);
        }
    }
    return {(p_o - p_e) / (1.0 - p_e), false};
}

KappaResult fleiss_kappa(const AnnotationMatrix& m) {
    if (m.n_subjects < 1) throw InvalidArgument("fleiss_kappa: no subjects");
    if (m.n_annotators < 2) throw InvalidArgument("fleiss_kappa: need at least 2 annotators");
    if (m.labels.size() != static_cast<std::size_t>(m.n_subjects) * m.n_annotators) {
        throw InvalidArgument("fleiss_kappa: incomplete grid");
    }

    // Map labels to a dense category range.
    std::unordered_map<int, std::size_t> categories;
    for (const int l : m.labels) categories.emplace(l, categories.size());
    if (categories.size() == 1) return {1.0, true};

    const double n = m.n_annotators;
    const double big_n = m.n_subjects;
    std::vector<double> category_mass(categories.size(), 0.0);
    std::vector<std::size_t> counts(categories.size());
    double p_bar = 0.0;
    for (std::uint32_t i = 0; i < m.n_subjects; ++i) {
        std::fill(counts.begin(), counts.end(), 0);
        for (std::uint32_t j = 0; j < m.n_annotators; ++j) {
            ++counts[categories.at(m.at(i, j))];
        }
        double sum_sq = 0.0;
        for (std::size_t c = 0; c < counts.size(); ++c) {
            sum_sq += static_cast<double>(counts[c]) * counts[c];
            category_mass[c] += static_cast<double>(counts[c]);
        }
        p_bar += (sum_sq - n) / (n * (n - 1.0));
    }
    p_bar /= big_n;
    double p_e = 0.0;
    for (const double mass : category_mass) {
        const double p_c = mass / (big_n * n);
        p_e += p_c * p_c;
    }
    return {(p_bar - p_e) / (1.0 - p_e), false};
}

std::string_view kappa_band(double k) {
    if (k < 0.0) return "poor";
    if (k <= 0.20) return "slight";
    if (k <= 0.40) return "fair";
    if (k <= 0.60) return "moderate";
    if (k <= 0.80) return "substantial";
    return "almost perfect";
}

namespace {

struct CenteredSeries {
    std::vector<double> dx, dy;
    double sxx = 0.0, syy = 0.0;
};

CenteredSeries center(std::span<const double> xs, std::span<const double> ys) {
    CenteredSeries s;
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    s.dx.reserve(xs.size());
    s.dy.reserve(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        s.dx.push_back(xs[i] - mx);
        s.dy.push_back(ys[i] - my);
        s.sxx += s.dx.back() * s.dx.back();
        s.syy += s.dy.back() * s.dy.back();
    }
    return s;
}

}  // namespace

PearsonResult pearson_r(std::span<const double> xs, std::span<const double> ys,
                        std::uint64_t permutations, std::uint64_t seed) {
    if (xs.size() != ys.size()) throw InvalidArgument("pearson_r: length mismatch");
    if (xs.size() < 3) throw InvalidArgument("pearson_r: need at least 3 points");
    const auto s = center(xs, ys);
    if (s.sxx == 0.0 || s.syy == 0.0) throw InvalidArgument("pearson_r: constant series");

    const double denom = std::sqrt(s.sxx * s.syy);
    auto r_of = [&](const std::vector<std::size_t>& perm) {
        double num = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) num += s.dx[i] * s.dy[perm[i]];
        return num / denom;
    };

    std::vector<std::size_t> perm(xs.size());
    std::iota(perm.begin(), perm.end(), 0);
    const double r = r_of(perm);
    const double threshold = std::abs(r) - kTieEps;

    PearsonResult result;
    result.r = r;
    const double total = factorial_capped(xs.size(), kExhaustiveLimit);
    if (total <= static_cast<double>(kExhaustiveLimit)) {
        std::uint64_t hits = 0, count = 0;
        std::sort(perm.begin(), perm.end());
        do {
            if (std::abs(r_of(perm)) >= threshold) ++hits;
            ++count;
        } while (std::next_permutation(perm.begin(), perm.end()));
        result.p = static_cast<double>(hits) / static_cast<double>(count);
        result.exhaustive = true;
    } else {
        if (permutations == 0) throw InvalidArgument("pearson_r: permutations must be positive");
        Rng rng(seed);
        std::uint64_t hits = 0;
        for (std::uint64_t it = 0; it < permutations; ++it) {
            for (std::size_t i = perm.size(); i > 1; --i) {
                std::swap(perm[i - 1], perm[uniform_below(rng, i)]);
            }
            if (std::abs(r_of(perm)) >= threshold) ++hits;
        }
        result.p = static_cast<double>(hits + 1) / static_cast<double>(permutations + 1);
        result.exhaustive = false;
    }
    return result;
}

PopulationStats PopulationAccumulator::finalize() const {
    if (n_ == 0) throw InvalidArgument("population_stats: empty stream");
    PopulationStats out;
    out.n = n_;
    const double n = static_cast<double>(n_);
    out.mean = sum_.value() / n;
    const double var = sumsq_.value() / n - out.mean * out.mean;
    out.std = std::sqrt(std::max(var, 0.0));
    return out;
}

PopulationStats population_stats(std::span<const double> scores) {
    PopulationAccumulator acc;
    for (const double x : scores) acc.add(x);
    return acc.finalize();
}

}  // namespace embias
