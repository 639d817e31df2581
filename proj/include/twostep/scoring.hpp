#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "twostep/inverted_index.hpp"
#include "twostep/sparse_vector.hpp"

namespace twostep {

// Term-frequency saturation for the approximate step. k1 = infinity turns
// scoring into the plain dot product; k1 = 0 saturates every match to the
// query weight.
struct SaturationParams {
    double k1 = 100.0;

    static SaturationParams infinite() {
        return {std::numeric_limits<double>::infinity()};
    }
    bool is_infinite() const { return std::isinf(k1); }
};

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
    double avg_doc_len = 1.0;
    std::vector<std::uint32_t> doc_lens;

    // Lengths and their average taken as postings per document.
    static Bm25Params from_index(const InvertedIndex& idx, double k1 = 0.9, double b = 0.4);
};

// (k1+1)*tf / (tf + k1); handles the k1 = 0 and k1 = infinity cases.
double saturate(double tf, double k1);

double score_dot(const SparseVector& q, const SparseVector& d);

double score_saturated(const SparseVector& q, const SparseVector& d, const SaturationParams& p);

// Robertson/Sparck-Jones idf, always positive.
double bm25_idf(std::uint64_t num_docs, std::uint64_t doc_freq);

double bm25_term(double tf, double doc_len, const Bm25Params& p, double idf);

// BM25 over the index's quantized impacts treated as term frequencies;
// query weights are ignored (term presence only).
double score_bm25(const SparseVector& q, DocId doc, const InvertedIndex& idx,
                  const Bm25Params& p);

}  // namespace twostep
