#pragma once

#include <cstddef>

#include "twostep/collection.hpp"
#include "twostep/sparse_vector.hpp"

namespace twostep {

enum class PruneStrategy {
    DocTopK,         // keep each document's k highest-weight entries
    QueryTopK,       // same, with the query cap
    TermQuantile,    // truncate each posting list to its top quantile
    ValueThreshold,  // drop entries below an absolute weight
};

struct PruneConfig {
    PruneStrategy strategy = PruneStrategy::DocTopK;
    std::size_t size_k = 1;      // top-k strategies
    double quantile = 1.0;       // TermQuantile, in [0,1]
    double threshold = 0.0;      // ValueThreshold
    std::size_t doc_cap = 128;   // hard upper limit for document pruning
    std::size_t query_cap = 32;  // hard upper limit for query pruning
};

struct PruneOutcome {
    Collection collection;
    std::size_t emptied_docs = 0;  // pruned to zero entries, kept to preserve docids
};

// Which collection side lexical_prune targets (selects the average and cap).
enum class PruneSide { Documents, Queries };

// Keeps the min(k, nnz) highest-weight entries, ties broken toward the
// lower term id, result re-sorted by term id.
SparseVector prune_vector_topk(const SparseVector& v, std::size_t k);

PruneOutcome prune_collection(const Collection& c, const PruneConfig& cfg);

// Top pooling to the collection's average size: k = min(round(avg), cap).
// Fractional averages round to nearest.
PruneOutcome lexical_prune(const Collection& c, const CollectionStats& stats, std::size_t cap,
                           PruneSide side = PruneSide::Documents);

}  // namespace twostep
