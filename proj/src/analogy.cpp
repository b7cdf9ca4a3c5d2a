#include "embias/analogy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "embias/parallel.hpp"

namespace embias {

namespace {

std::vector<double> unit_of(std::span<const float> v, const std::string& what) {
    double ss = 0.0;
    for (const float x : v) ss += static_cast<double>(x) * x;
    const double norm = std::sqrt(ss);
    if (norm == 0.0) throw InvalidArgument("zero vector for \"" + what + "\"");
    std::vector<double> unit(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) unit[j] = static_cast<double>(v[j]) / norm;
    return unit;
}

struct Best {
    double score = -2.0;
    std::uint32_t row = 0;
    bool valid = false;
};

}  // namespace

AnalogyAnswer solve_3cosadd(const EmbeddingTable& table, const AnalogyQuery& query,
                            unsigned threads, const std::vector<double>* norms) {
    const std::uint32_t a_row = table.require(query.a);
    const std::uint32_t b_row = table.require(query.b);
    const std::uint32_t c_row = table.require(query.c);

    const auto a_hat = unit_of(table.row(a_row), query.a);
    const auto b_hat = unit_of(table.row(b_row), query.b);
    const auto c_hat = unit_of(table.row(c_row), query.c);

    const std::uint32_t dim = table.dim();
    std::vector<double> q(dim);
    double q_ss = 0.0;
    for (std::uint32_t j = 0; j < dim; ++j) {
        q[j] = b_hat[j] - a_hat[j] + c_hat[j];
        q_ss += q[j] * q[j];
    }
    const double q_norm = std::sqrt(q_ss);
    if (q_norm == 0.0) throw InvalidArgument("3CosAdd query composes to the zero vector");

    const std::size_t n_chunks = (table.count() + 8191) / 8192;
    std::vector<Best> bests(n_chunks);
    for_each_chunk(table.count(), 8192, threads, [&](std::size_t c, std::size_t lo, std::size_t hi) {
        Best best;
        for (std::size_t i = lo; i < hi; ++i) {
            const auto row = static_cast<std::uint32_t>(i);
            if (row == a_row || row == b_row || row == c_row) continue;
            const auto w = table.row(row);
            double dot = 0.0;
            double w_norm;
            if (norms) {
                for (std::uint32_t j = 0; j < dim; ++j) dot += static_cast<double>(w[j]) * q[j];
                w_norm = (*norms)[i];
            } else {
                double ss = 0.0;
                for (std::uint32_t j = 0; j < dim; ++j) {
                    const double x = w[j];
                    dot += x * q[j];
                    ss += x * x;
                }
                w_norm = std::sqrt(ss);
            }
            if (w_norm == 0.0) continue;
            const double score = std::clamp(dot / (w_norm * q_norm), -1.0, 1.0);
            if (!best.valid || score > best.score) {
                best = {score, row, true};
            }
        }
        bests[c] = best;
    });

    Best overall;
    for (const Best& b : bests) {
        // Chunks cover ascending rows, so a strictly-greater rule keeps the
        // lowest row among equal scores.
        if (b.valid && (!overall.valid || b.score > overall.score)) overall = b;
    }
    if (!overall.valid) throw InvalidArgument("3CosAdd: no candidate vocabulary left");
    return {table.word(overall.row), overall.row, overall.score};
}

AnalogySuite parse_analogy_suite(std::istream& in) {
    AnalogySuite suite;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == ':') {
            std::string name = line.substr(1);
            const auto start = name.find_first_not_of(" \t");
            name = start == std::string::npos ? std::string() : name.substr(start);
            if (name.empty()) {
                throw ParseError("analogy suite line " + std::to_string(line_no) +
                                 ": category without a name");
            }
            for (const auto& cat : suite.categories) {
                if (cat.name == name) {
                    throw ParseError("analogy suite: duplicate category \"" + name + "\"");
                }
            }
            suite.categories.push_back({std::move(name), {}});
            continue;
        }
        std::istringstream fields(line);
        std::array<std::string, 4> q;
        std::string extra;
        if (!(fields >> q[0] >> q[1] >> q[2] >> q[3]) || (fields >> extra)) {
            throw ParseError("analogy suite line " + std::to_string(line_no) +
                             ": expected exactly 4 tokens");
        }
        if (suite.categories.empty()) {
            throw ParseError("analogy suite line " + std::to_string(line_no) +
                             ": question before any category header");
        }
        suite.categories.back().questions.push_back(std::move(q));
    }
    return suite;
}

AnalogySuite load_analogy_suite(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open analogy suite: " + path);
    return parse_analogy_suite(in);
}

TemplateSuiteReport run_template_suite(const EmbeddingTable& table, const AnalogySuite& suite,
                                       const BasePair& template_pair,
                                       const TemplateSuiteOptions& options) {
    table.require(template_pair.first);
    table.require(template_pair.second);

    const std::unordered_set<std::string> excluded(options.excluded_categories.begin(),
                                                   options.excluded_categories.end());

    // Unique (x, y) pairs with first-seen category attribution.
    struct PairEntry {
        std::string x, y;
        std::size_t category = 0;
    };
    std::vector<PairEntry> pairs;
    std::unordered_set<std::string> seen;
    TemplateSuiteReport report;
    for (const auto& cat : suite.categories) {
        if (excluded.contains(cat.name)) continue;
        const std::size_t cat_idx = report.categories.size();
        report.categories.push_back({cat.name, 0, 0, 0, 0});
        for (const auto& q : cat.questions) {
            for (const auto& [x, y] : {std::pair{q[0], q[1]}, std::pair{q[2], q[3]}}) {
                if (x == y) continue;  // degenerate pair carries no relation
                std::string key = x + '\x1f' + y;
                if (!seen.insert(std::move(key)).second) continue;
                pairs.push_back({x, y, cat_idx});
                ++report.categories[cat_idx].pairs;
            }
        }
    }
    report.unique_pairs = static_cast<std::uint32_t>(pairs.size());

    std::vector<double> computed_norms;
    if (!options.norms) computed_norms = row_norms(table, options.threads);
    const std::vector<double>& norms = options.norms ? *options.norms : computed_norms;
    PopulationAccumulator cosine_acc;
    struct Outcome {
        enum { Skipped, Wrong, Correct } result = Skipped;
        double cosine = 0.0;
    };
    // Parallelism lives inside each solve; pairs run in order so aggregation
    // is deterministic.
    for (const auto& entry : pairs) {
        auto& cat = report.categories[entry.category];
        const auto x_row = table.find(entry.x);
        const auto y_row = table.find(entry.y);
        if (!x_row || !y_row) {
            ++cat.skipped;
            ++report.skipped_oov;
            continue;
        }
        const double pair_cos = cosine(table.row(*x_row), table.row(*y_row));
        cosine_acc.add(pair_cos);
        const auto answer = solve_3cosadd(
            table, {template_pair.second, entry.x, template_pair.first}, options.threads, &norms);
        ++cat.attempted;
        ++report.attempted;
        if (answer.token == entry.y) {
            ++cat.correct;
            ++report.correct;
        }
    }
    report.accuracy = report.attempted == 0
                          ? 0.0
                          : static_cast<double>(report.correct) / report.attempted;
    if (cosine_acc.count() > 0) report.pair_cosine = cosine_acc.finalize();
    return report;
}

std::vector<BiasedPair> generate_biased_pairs(const EmbeddingTable& table, const BasePair& pair,
                                              std::span<const std::uint32_t> candidate_rows,
                                              double delta, std::uint32_t top_n,
                                              unsigned threads) {
    if (!(delta > 0.0 && delta <= 2.0)) {
        throw InvalidArgument("generate_biased_pairs: delta must be in (0, 2]");
    }
    const std::uint32_t dim = table.dim();

    // Normalized candidate sub-matrix; zero-norm rows are dropped.
    std::vector<std::uint32_t> rows;
    std::vector<double> unit;
    rows.reserve(candidate_rows.size());
    for (const std::uint32_t row : candidate_rows) {
        const auto v = table.row(row);
        double ss = 0.0;
        for (const float x : v) ss += static_cast<double>(x) * x;
        if (ss == 0.0) continue;
        const double norm = std::sqrt(ss);
        rows.push_back(row);
        for (const float x : v) unit.push_back(static_cast<double>(x) / norm);
    }
    if (rows.size() < 2) {
        throw InvalidArgument("generate_biased_pairs: empty candidate list after filtering");
    }

    const PairAxis axis(table, pair);
    const auto f_hat = unit_of(table.row(axis.first_row()), pair.first);
    const auto s_hat = unit_of(table.row(axis.second_row()), pair.second);
    std::vector<double> template_diff(dim);
    double t_ss = 0.0;
    for (std::uint32_t j = 0; j < dim; ++j) {
        template_diff[j] = f_hat[j] - s_hat[j];
        t_ss += template_diff[j] * template_diff[j];
    }
    const double t_norm = std::sqrt(t_ss);
    if (t_norm == 0.0) {
        throw InvalidArgument("generate_biased_pairs: template pair difference is zero");
    }

    const double min_cos = 1.0 - delta * delta / 2.0;
    const std::size_t n = rows.size();
    const auto unit_row = [&](std::size_t i) {
        return std::span<const double>{unit.data() + i * dim, dim};
    };

    const auto order = [](const BiasedPair& a, const BiasedPair& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.x_row != b.x_row) return a.x_row < b.x_row;
        return a.y_row < b.y_row;
    };
    const std::size_t n_chunks = (n + 63) / 64;
    std::vector<std::vector<BiasedPair>> per_chunk(n_chunks);
    for_each_chunk(n, 64, threads, [&](std::size_t c, std::size_t lo, std::size_t hi) {
        auto& kept = per_chunk[c];
        for (std::size_t i = lo; i < hi; ++i) {
            const auto x = unit_row(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const auto y = unit_row(j);
                double cos_xy = 0.0;
                for (std::uint32_t d = 0; d < dim; ++d) cos_xy += x[d] * y[d];
                cos_xy = std::clamp(cos_xy, -1.0, 1.0);
                if (cos_xy < min_cos) continue;
                double dot = 0.0, d_ss = 0.0;
                for (std::uint32_t d = 0; d < dim; ++d) {
                    const double diff = x[d] - y[d];
                    dot += diff * template_diff[d];
                    d_ss += diff * diff;
                }
                if (d_ss == 0.0) continue;  // identical vectors under distinct tokens
                const double score =
                    std::clamp(dot / (std::sqrt(d_ss) * t_norm), -1.0, 1.0);
                kept.push_back({rows[i], rows[j], score, cos_xy});
            }
            // Keep per-chunk memory bounded while preserving the global order.
            if (kept.size() > 4096 + top_n) {
                std::nth_element(kept.begin(), kept.begin() + top_n, kept.end(), order);
                kept.resize(top_n);
            }
        }
    });

    std::vector<BiasedPair> all;
    for (auto& chunk : per_chunk) {
        all.insert(all.end(), chunk.begin(), chunk.end());
    }
    std::sort(all.begin(), all.end(), order);
    if (all.size() > top_n) all.resize(top_n);
    return all;
}

SimilarityBaselines random_similarity_baselines(const EmbeddingTable& table,
                                                std::span<const std::uint32_t> candidate_rows,
                                                std::uint64_t n, std::uint64_t seed) {
    if (n < 2) throw InvalidArgument("random_similarity_baselines: n must be at least 2");
    if (candidate_rows.size() < 4) {
        throw InvalidArgument("random_similarity_baselines: need at least 4 candidate words");
    }
    Rng rng(seed);
    const auto draw = [&] {
        return candidate_rows[uniform_below(rng, candidate_rows.size())];
    };

    PopulationAccumulator pair_acc;
    while (pair_acc.count() < n) {
        const std::uint32_t a = draw(), b = draw();
        if (a == b) continue;
        pair_acc.add(cosine(table.row(a), table.row(b)));
    }

    const std::uint32_t dim = table.dim();
    std::vector<double> u(dim), v(dim);
    PopulationAccumulator diff_acc;
    while (diff_acc.count() < n) {
        const std::uint32_t a = draw(), b = draw(), c = draw(), d = draw();
        if (a == b || a == c || a == d || b == c || b == d || c == d) continue;
        const auto va = table.row(a), vb = table.row(b), vc = table.row(c), vd = table.row(d);
        double u_ss = 0.0, v_ss = 0.0, dot = 0.0;
        for (std::uint32_t j = 0; j < dim; ++j) {
            u[j] = static_cast<double>(va[j]) - vb[j];
            v[j] = static_cast<double>(vc[j]) - vd[j];
            u_ss += u[j] * u[j];
            v_ss += v[j] * v[j];
            dot += u[j] * v[j];
        }
        if (u_ss == 0.0 || v_ss == 0.0) continue;  // coincident vectors, resample
        diff_acc.add(std::clamp(dot / (std::sqrt(u_ss) * std::sqrt(v_ss)), -1.0, 1.0));
    }

    return {pair_acc.finalize(), diff_acc.finalize()};
}

}  // namespace embias
