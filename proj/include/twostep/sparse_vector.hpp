#pragma once

#include <cstddef>
#include <vector>

#include "twostep/common.hpp"

namespace twostep {

struct TermWeight {
    TermId term;
    double weight;

    friend bool operator==(const TermWeight&, const TermWeight&) = default;
};

// A document or query as (term, weight) pairs, sorted by strictly
// increasing term id. All weights are positive; zero-weight entries are
// dropped at ingestion.
struct SparseVector {
    std::vector<TermWeight> entries;

    std::size_t nnz() const { return entries.size(); }
    bool empty() const { return entries.empty(); }

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

// Exact dot product over the shared terms, accumulated in ascending term
// order. Used both by the rescoring path and as the scoring oracle.
double dot(const SparseVector& a, const SparseVector& b);

// True iff term ids are strictly increasing and all weights positive.
bool is_valid(const SparseVector& v);

// Sorts by term id, merges duplicates (keep-last), drops zero weights.
SparseVector normalized(std::vector<TermWeight> entries);

}  // namespace twostep
