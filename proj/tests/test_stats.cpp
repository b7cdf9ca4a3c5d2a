#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "embias/stats.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace embias;

namespace {

std::vector<int> random_labels(Rng& rng, std::size_t n, int n_categories) {
    std::vector<int> labels(n);
    for (auto& l : labels) l = static_cast<int>(uniform_below(rng, n_categories));
    return labels;
}

}  // namespace

TEST_CASE("cohen kappa basics") {
    const std::vector<int> mixed{0, 1, 0, 1, 1};
    CHECK(cohen_kappa(mixed, mixed).value == doctest::Approx(1.0));
    CHECK(!cohen_kappa(mixed, mixed).degenerate);

    // a = (F,F,M,M), b = (F,M,F,M): p_o = 0.5, p_e = 0.5, kappa = 0.
    const std::vector<int> a{0, 0, 1, 1}, b{0, 1, 0, 1};
    CHECK(cohen_kappa(a, b).value == doctest::Approx(0.0));

    const std::vector<int> constant{2, 2, 2};
    const auto degenerate = cohen_kappa(constant, constant);
    CHECK(degenerate.value == doctest::Approx(1.0));
    CHECK(degenerate.degenerate);

    CHECK_THROWS_AS(cohen_kappa(a, mixed), InvalidArgument);
    CHECK_THROWS_AS(cohen_kappa(std::vector<int>{}, std::vector<int>{}), InvalidArgument);
}

TEST_CASE("cohen kappa matches the contingency-table oracle on random lists") {
    Rng rng(42);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + uniform_below(rng, 40);
        const int k = 2 + static_cast<int>(uniform_below(rng, 3));
        const auto a = random_labels(rng, n, k);
        const auto b = random_labels(rng, n, k);
        const auto ours = cohen_kappa(a, b);
        const double reference = oracle::cohen_recount(a, b);
        REQUIRE(ours.value == doctest::Approx(reference).epsilon(1e-12));
        // Symmetry in the arguments.
        REQUIRE(cohen_kappa(b, a).value == doctest::Approx(ours.value).epsilon(1e-12));
    }
}

TEST_CASE("cohen kappa is invariant under category relabeling") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + uniform_below(rng, 30);
        const auto a = random_labels(rng, n, 3);
        const auto b = random_labels(rng, n, 3);
        const auto base = cohen_kappa(a, b);
        const int remap[3] = {7, -2, 100};  // arbitrary bijection
        std::vector<int> ra(n), rb(n);
        for (std::size_t i = 0; i < n; ++i) {
            ra[i] = remap[a[i]];
            rb[i] = remap[b[i]];
        }
        REQUIRE(cohen_kappa(ra, rb).value == doctest::Approx(base.value).epsilon(1e-12));
    }
}

TEST_CASE("fleiss kappa basics and hand example") {
    // All annotators identical per subject, two categories across subjects.
    AnnotationMatrix unanimous;
    unanimous.n_subjects = 4;
    unanimous.n_annotators = 3;
    unanimous.labels = {0, 0, 0, 1, 1, 1, 0, 0, 0, 1, 1, 1};
    CHECK(fleiss_kappa(unanimous).value == doctest::Approx(1.0));
    CHECK(!fleiss_kappa(unanimous).degenerate);

    // 3 subjects x 3 annotators, worked by hand: kappa = 1/46.
    AnnotationMatrix hand;
    hand.n_subjects = 3;
    hand.n_annotators = 3;
    hand.labels = {0, 0, 1, 1, 1, 1, 0, 1, 2};
    CHECK(fleiss_kappa(hand).value == doctest::Approx(1.0 / 46.0).epsilon(1e-12));

    AnnotationMatrix single;
    single.n_subjects = 2;
    single.n_annotators = 2;
    single.labels = {5, 5, 5, 5};
    CHECK(fleiss_kappa(single).value == doctest::Approx(1.0));
    CHECK(fleiss_kappa(single).degenerate);

    AnnotationMatrix ragged;
    ragged.n_subjects = 2;
    ragged.n_annotators = 2;
    ragged.labels = {0, 1, 0};
    CHECK_THROWS_AS(fleiss_kappa(ragged), InvalidArgument);
}

TEST_CASE("fleiss kappa matches the oracle and is permutation invariant") {
    Rng rng(4242);
    for (int trial = 0; trial < 1000; ++trial) {
        AnnotationMatrix m;
        m.n_subjects = 2 + static_cast<std::uint32_t>(uniform_below(rng, 12));
        m.n_annotators = 2 + static_cast<std::uint32_t>(uniform_below(rng, 5));
        m.labels = random_labels(rng, static_cast<std::size_t>(m.n_subjects) * m.n_annotators, 3);
        const auto ours = fleiss_kappa(m);
        const double reference = oracle::fleiss_recount(m.labels, m.n_subjects, m.n_annotators);
        if (ours.degenerate) {
            REQUIRE(reference == doctest::Approx(1.0));
            continue;
        }
        REQUIRE(ours.value == doctest::Approx(reference).epsilon(1e-12));

        // Permuting subjects or annotators must not change the value.
        AnnotationMatrix subject_swapped = m;
        for (std::uint32_t a = 0; a < m.n_annotators; ++a) {
            std::swap(subject_swapped.labels[a],
                      subject_swapped.labels[(m.n_subjects - 1) * m.n_annotators + a]);
        }
        REQUIRE(fleiss_kappa(subject_swapped).value == doctest::Approx(ours.value).epsilon(1e-12));
        AnnotationMatrix annotator_swapped = m;
        for (std::uint32_t s = 0; s < m.n_subjects; ++s) {
            std::swap(annotator_swapped.labels[s * m.n_annotators],
                      annotator_swapped.labels[s * m.n_annotators + m.n_annotators - 1]);
        }
        REQUIRE(fleiss_kappa(annotator_swapped).value ==
                doctest::Approx(ours.value).epsilon(1e-12));
    }
}

TEST_CASE("two-annotator fleiss tracks cohen in sign and band on correlated raters") {
    // Correlated annotators (second copies the first with a small flip rate)
    // keep both statistics well inside one interpretation band.
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 400;
        std::vector<int> a = random_labels(rng, n, 2);
        std::vector<int> b = a;
        for (auto& l : b) {
            if (uniform_below(rng, 100) < 15) l = 1 - l;
        }
        const auto ck = cohen_kappa(a, b);
        AnnotationMatrix m;
        m.n_subjects = static_cast<std::uint32_t>(n);
        m.n_annotators = 2;
        m.labels.reserve(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            m.labels.push_back(a[i]);
            m.labels.push_back(b[i]);
        }
        const auto fk = fleiss_kappa(m);
        REQUIRE((ck.value > 0) == (fk.value > 0));
        REQUIRE(kappa_band(ck.value) == kappa_band(fk.value));
    }
}

TEST_CASE("kappa bands follow the conventional ranges") {
    CHECK(kappa_band(-0.1) == "poor");
    CHECK(kappa_band(0.0) == "slight");
    CHECK(kappa_band(0.20) == "slight");
    CHECK(kappa_band(0.29) == "fair");
    CHECK(kappa_band(0.40) == "fair");
    CHECK(kappa_band(0.42) == "moderate");
    CHECK(kappa_band(0.45) == "moderate");
    CHECK(kappa_band(0.60) == "moderate");
    CHECK(kappa_band(0.80) == "substantial");
    CHECK(kappa_band(0.83) == "almost perfect");
    CHECK(kappa_band(1.0) == "almost perfect");
}

TEST_CASE("pearson correlation endpoints and invariances") {
    const std::vector<double> xs{1, 2, 3, 5, 8, 13};
    std::vector<double> ys = xs;
    CHECK(pearson_r(xs, ys).r == doctest::Approx(1.0));
    for (auto& y : ys) y = -y;
    CHECK(pearson_r(xs, ys).r == doctest::Approx(-1.0));

    // Positive affine transform leaves r unchanged; negative scaling flips it.
    std::vector<double> zs{0.3, -1.2, 2.0, 0.7, 1.1, -0.4};
    const double base = pearson_r(xs, zs).r;
    std::vector<double> affine(zs.size());
    for (std::size_t i = 0; i < zs.size(); ++i) affine[i] = 3.5 * zs[i] + 10.0;
    CHECK(pearson_r(xs, affine).r == doctest::Approx(base).epsilon(1e-12));
    for (auto& z : affine) z = -z;
    CHECK(pearson_r(xs, affine).r == doctest::Approx(-base).epsilon(1e-12));

    CHECK_THROWS_AS(pearson_r(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                    InvalidArgument);
}

TEST_CASE("pearson p-value matches exhaustive enumeration at n = 9") {
    Rng rng(2024);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> xs(9), ys(9);
        for (auto& x : xs) x = test::uniform_pm1(rng);
        for (auto& y : ys) y = test::uniform_pm1(rng);
        const auto result = pearson_r(xs, ys);
        CHECK(result.exhaustive);
        const double reference = oracle::pearson_exhaustive_p(xs, ys);
        REQUIRE(std::abs(result.p - reference) <= 0.002);
    }
}

TEST_CASE("pearson sampled path is seeded and sane") {
    std::vector<double> xs(12), ys(12);
    Rng rng(7);
    for (auto& x : xs) x = test::uniform_pm1(rng);
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = 0.8 * xs[i] + 0.1 * test::uniform_pm1(rng);
    const auto a = pearson_r(xs, ys, 20000, 5);
    const auto b = pearson_r(xs, ys, 20000, 5);
    CHECK(!a.exhaustive);
    CHECK(a.p == b.p);
    CHECK(a.p > 0.0);
    CHECK(a.p <= 1.0);
    CHECK(a.p < 0.05);  // strongly correlated by construction
}

TEST_CASE("pearson input validation") {
    const std::vector<double> xs{1, 2, 3, 4};
    CHECK_THROWS_AS(pearson_r(xs, std::vector<double>{1, 2, 3}), InvalidArgument);
    CHECK_THROWS_AS(pearson_r(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                    InvalidArgument);
    CHECK_THROWS_AS(pearson_r(std::vector<double>{1, 1, 1, 1}, xs), InvalidArgument);
}

TEST_CASE("population stats match a two-pass oracle and merge deterministically") {
    const std::vector<double> constant(10, 3.25);
    const auto c = population_stats(constant);
    CHECK(c.mean == doctest::Approx(3.25));
    CHECK(c.std == doctest::Approx(0.0));

    Rng rng(31337);
    std::vector<double> xs(20001);
    for (auto& x : xs) x = test::uniform_pm1(rng) * 0.25;
    const auto stats = population_stats(xs);
    const auto [mean, std_dev] = oracle::two_pass_stats(xs);
    CHECK(std::abs(stats.mean - mean) < 1e-9);
    CHECK(std::abs(stats.std - std_dev) < 1e-9);
    CHECK(stats.n == xs.size());

    // Chunked merges agree with the sequential pass regardless of chunking.
    for (const std::size_t chunk : {std::size_t{7}, std::size_t{1000}, std::size_t{4096}}) {
        PopulationAccumulator total;
        for (std::size_t begin = 0; begin < xs.size(); begin += chunk) {
            PopulationAccumulator part;
            for (std::size_t i = begin; i < std::min(xs.size(), begin + chunk); ++i) {
                part.add(xs[i]);
            }
            total.merge(part);
        }
        const auto merged = total.finalize();
        CHECK(std::abs(merged.mean - stats.mean) < 1e-9);
        CHECK(std::abs(merged.std - stats.std) < 1e-9);
    }

    CHECK_THROWS_AS(population_stats(std::vector<double>{}), InvalidArgument);
}
