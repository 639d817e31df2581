#pragma once

#include <cstdint>
#include <random>

#include "twostep/collection.hpp"

namespace twostep {

// Deterministic synthetic workload: Zipf-skewed term popularity, heavy-tail
// weights, plus relevance judgments seeded from high-dot-product documents.
struct SynthConfig {
    std::size_t num_docs = 1000;
    std::size_t vocab = 500;
    std::size_t doc_nnz_min = 10;
    std::size_t doc_nnz_max = 60;
    std::size_t num_queries = 20;
    std::size_t query_nnz_min = 2;
    std::size_t query_nnz_max = 8;
    double zipf_s = 1.0;       // term-popularity exponent
    double weight_alpha = 2.0; // Pareto tail index of weights
    std::uint64_t seed = 42;
};

struct SynthData {
    Collection docs;
    Collection queries;  // shares the document lexicon
    Qrels qrels;
};

SynthData make_synthetic(const SynthConfig& cfg);

// Uniform double in [0,1) from the generator's raw bits; bit-reproducible
// across standard libraries, unlike std distributions.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

}  // namespace twostep
