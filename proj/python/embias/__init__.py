"""Word-embedding gender bias measures and robustness experiments."""

from embias._core import (
    EmbeddingTable,
    MissingWordError,
    NeutralSet,
    cohen_kappa,
    direct_bias,
    experiment_names,
    fleiss_kappa,
    frequent_word_filter,
    generate_biased_pairs,
    kappa_band,
    nbm,
    pearson_r,
    population_stats,
    ripa,
    run_experiment,
    solve_3cosadd,
    top_k_neighbors,
    word_association,
)

__all__ = [
    "EmbeddingTable",
    "MissingWordError",
    "NeutralSet",
    "cohen_kappa",
    "direct_bias",
    "experiment_names",
    "fleiss_kappa",
    "frequent_word_filter",
    "generate_biased_pairs",
    "kappa_band",
    "nbm",
    "pearson_r",
    "population_stats",
    "ripa",
    "run_experiment",
    "solve_3cosadd",
    "top_k_neighbors",
    "word_association",
]
