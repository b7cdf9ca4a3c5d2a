#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "embias/analogy.hpp"
#include "embias/embedding.hpp"
#include "embias/experiments.hpp"
#include "embias/measures.hpp"
#include "embias/parallel.hpp"
#include "embias/report.hpp"
#include "embias/stats.hpp"

namespace py = pybind11;
using namespace embias;

namespace {

EmbeddingFormat format_from(const std::string& name) {
    if (name == "binary") return EmbeddingFormat::Binary;
    if (name == "text") return EmbeddingFormat::Text;
    throw InvalidArgument("format must be \"binary\" or \"text\"");
}

py::dict score_to_dict(const BiasScore& s) {
    py::dict d;
    d["value"] = s.value;
    d["measure"] = std::string(to_string(s.measure));
    d["direction"] = std::string(to_string(s.direction));
    d["pair"] = py::make_tuple(s.pair.first, s.pair.second);
    return d;
}

BasePair pair_from(const std::pair<std::string, std::string>& p) {
    return {p.first, p.second};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "word-embedding gender bias measures and robustness experiments";

    py::register_exception<MissingWordError>(m, "MissingWordError");

    py::class_<EmbeddingTable>(m, "EmbeddingTable")
        .def_static(
            "load",
            [](const std::string& path, const std::string& format) {
                return load_embedding(path, format_from(format));
            },
            py::arg("path"), py::arg("format") = "binary")
        .def_static("from_text",
                    [](const std::string& text) {
                        std::istringstream in(text);
                        return parse_word2vec_text(in);
                    })
        .def_property_readonly("count", &EmbeddingTable::count)
        .def_property_readonly("dim", &EmbeddingTable::dim)
        .def("__contains__",
             [](const EmbeddingTable& t, const std::string& w) { return t.contains(w); })
        .def("__len__", &EmbeddingTable::count)
        .def("word", [](const EmbeddingTable& t, std::uint32_t row) { return t.word(row); })
        .def("words", [](const EmbeddingTable& t) { return t.words(); })
        .def("vector",
             [](const EmbeddingTable& t, const std::string& w) {
                 const auto row = t.lookup(w);
                 return std::vector<float>(row.begin(), row.end());
             })
        .def("cosine", [](const EmbeddingTable& t, const std::string& a, const std::string& b) {
            return cosine(t, a, b);
        });

    m.def(
        "frequent_word_filter",
        [](const EmbeddingTable& t, std::uint32_t n) {
            std::vector<std::string> words;
            for (const auto row : frequent_word_filter(t, n)) words.push_back(t.word(row));
            return words;
        },
        py::arg("table"), py::arg("n") = 50000);

    py::class_<NeutralSet>(m, "NeutralSet")
        .def_static(
            "build",
            [](const EmbeddingTable& t, const std::vector<std::string>& tokens) {
                return NeutralSet::build(t, tokens);
            },
            py::keep_alive<0, 1>())
        .def("__len__", &NeutralSet::size);

    m.def(
        "direct_bias",
        [](const EmbeddingTable& t, const std::string& w,
           const std::pair<std::string, std::string>& pair) {
            return score_to_dict(direct_bias(t, w, pair_from(pair)));
        },
        py::arg("table"), py::arg("word"), py::arg("pair"));
    m.def(
        "word_association",
        [](const EmbeddingTable& t, const std::string& w, const std::vector<std::string>& X,
           const std::vector<std::string>& Y) {
            return score_to_dict(word_association(t, w, X, Y));
        },
        py::arg("table"), py::arg("word"), py::arg("female_set"), py::arg("male_set"));
    m.def(
        "ripa",
        [](const EmbeddingTable& t, const std::string& w,
           const std::pair<std::string, std::string>& pair) {
            return score_to_dict(ripa(t, w, pair_from(pair)));
        },
        py::arg("table"), py::arg("word"), py::arg("pair"));
    m.def(
        "nbm",
        [](const EmbeddingTable& t, const std::string& w,
           const std::pair<std::string, std::string>& pair, const NeutralSet& neutral,
           std::uint32_t k) { return score_to_dict(nbm(t, w, pair_from(pair), neutral, k)); },
        py::arg("table"), py::arg("word"), py::arg("pair"), py::arg("neutral"),
        py::arg("k") = 100);
    m.def(
        "top_k_neighbors",
        [](const EmbeddingTable& t, const std::string& w, const NeutralSet& neutral,
           std::uint32_t k) { return top_k_neighbors(t, w, neutral, k); },
        py::arg("table"), py::arg("word"), py::arg("neutral"), py::arg("k"));

    m.def(
        "solve_3cosadd",
        [](const EmbeddingTable& t, const std::string& a, const std::string& b,
           const std::string& c, unsigned threads) {
            const auto answer =
                solve_3cosadd(t, {a, b, c}, threads == 0 ? default_thread_count() : threads);
            return py::make_tuple(answer.token, answer.score);
        },
        py::arg("table"), py::arg("a"), py::arg("b"), py::arg("c"), py::arg("threads") = 0);
    m.def(
        "generate_biased_pairs",
        [](const EmbeddingTable& t, const std::pair<std::string, std::string>& pair,
           const std::vector<std::string>& candidates, double delta, std::uint32_t top_n) {
            std::vector<std::uint32_t> rows;
            for (const auto& token : candidates) {
                if (const auto row = t.find(token)) rows.push_back(*row);
            }
            py::list out;
            for (const auto& p : generate_biased_pairs(t, pair_from(pair), rows, delta, top_n)) {
                out.append(py::make_tuple(t.word(p.x_row), t.word(p.y_row), p.score));
            }
            return out;
        },
        py::arg("table"), py::arg("pair"), py::arg("candidates"), py::arg("delta") = 1.0,
        py::arg("top_n") = 20);

    m.def(
        "cohen_kappa",
        [](const std::vector<int>& a, const std::vector<int>& b) {
            const auto r = cohen_kappa(a, b);
            return py::make_tuple(r.value, r.degenerate);
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "fleiss_kappa",
        [](const std::vector<std::vector<int>>& grid) {
            AnnotationMatrix matrix;
            matrix.n_subjects = static_cast<std::uint32_t>(grid.size());
            matrix.n_annotators =
                grid.empty() ? 0 : static_cast<std::uint32_t>(grid.front().size());
            for (const auto& row : grid) {
                if (row.size() != matrix.n_annotators) {
                    throw InvalidArgument("fleiss_kappa: ragged grid");
                }
                matrix.labels.insert(matrix.labels.end(), row.begin(), row.end());
            }
            const auto r = fleiss_kappa(matrix);
            return py::make_tuple(r.value, r.degenerate);
        },
        py::arg("grid"));
    m.def("kappa_band", [](double k) { return std::string(kappa_band(k)); }, py::arg("k"));
    m.def(
        "pearson_r",
        [](const std::vector<double>& xs, const std::vector<double>& ys,
           std::uint64_t permutations, std::uint64_t seed) {
            const auto r = pearson_r(xs, ys, permutations, seed);
            return py::make_tuple(r.r, r.p);
        },
        py::arg("xs"), py::arg("ys"), py::arg("permutations") = 100000, py::arg("seed") = 0);
    m.def(
        "population_stats",
        [](const std::vector<double>& xs) {
            const auto s = population_stats(xs);
            return py::make_tuple(s.mean, s.std, s.n);
        },
        py::arg("scores"));

    m.def(
        "run_experiment",
        [](const std::string& config_path, const std::string& name) {
            const auto config = load_config(config_path);
            if (config.embedding_path.empty()) {
                throw Error("config has no embedding path");
            }
            const auto table = load_embedding(config.embedding_path, config.embedding_format);
            auto bundle = load_bundle(config, table);
            ExperimentContext ctx(table, std::move(bundle), config);
            return report_to_json(run_experiment(ctx, name)).dump(2);
        },
        py::arg("config_path"), py::arg("name"),
        "Run one named experiment and return the JSON report as a string");
    m.def("experiment_names", [] { return experiment_names(); });
}
