#pragma once

#include <cstddef>

#include "twostep/retrieval.hpp"
#include "twostep/scoring.hpp"

namespace twostep {

enum class RescoreMode {
    Forward,         // exact dot products over the forward index
    InvertedNextGeq  // docid-skipping walk of the full inverted index (quantized)
};

// The rescoring stage reads either the exact forward index or the full
// inverted index; both must share the approximate index's docid space.
struct RescoreSource {
    const ForwardIndex* forward = nullptr;
    const InvertedIndex* inverted = nullptr;
};

struct TwoStepConfig {
    std::size_t k = 100;           // results returned
    std::size_t candidates = 100;  // first-stage depth handed to rescoring
    SaturationParams saturation{100.0};
    std::size_t query_prune_k = 5;  // lexical query size for the first stage
    Algorithm first_stage_algorithm = Algorithm::MaxScore;
    RescoreMode rescore_mode = RescoreMode::Forward;
};

struct GtConfig {
    std::size_t k = 100;
    std::size_t candidates = 100;
    std::size_t query_prune_k = 5;
    double bm25_k1 = 0.9;
    double bm25_b = 0.4;
    Algorithm first_stage_algorithm = Algorithm::MaxScore;
    RescoreMode rescore_mode = RescoreMode::Forward;
};

// Approximate step on the pruned index with a saturated, lexically pruned
// query, then exact rescoring of the candidates with the original query.
// The rescoring stage always sees the unmodified full query; pruning is
// applied once, at entry. Counters aggregate both stages.
ScoredList two_step_search(const SparseVector& query, const InvertedIndex& approx,
                           const RescoreSource& rescore, const TwoStepConfig& cfg);

// Guided-Traversal-style baseline: BM25 candidate generation on the pruned
// index, identical rescoring stage.
ScoredList gt_search(const SparseVector& query, const InvertedIndex& approx,
                     const RescoreSource& rescore, const GtConfig& cfg);

}  // namespace twostep
