#include "twostep/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace twostep {

Bm25Params Bm25Params::from_index(const InvertedIndex& idx, double k1, double b) {
    Bm25Params p;
    p.k1 = k1;
    p.b = b;
    p.doc_lens = idx.doc_lens;
    double total = std::accumulate(idx.doc_lens.begin(), idx.doc_lens.end(), 0.0);
    p.avg_doc_len = idx.num_docs > 0 ? std::max(total / idx.num_docs, 1e-9) : 1.0;
    return p;
}

double saturate(double tf, double k1) {
    if (tf <= 0.0) {
        return 0.0;
    }
    if (std::isinf(k1)) {
        return tf;
    }
    if (k1 == 0.0) {
        return 1.0;
    }
    return (k1 + 1.0) * tf / (tf + k1);
}

double score_dot(const SparseVector& q, const SparseVector& d) {
    return dot(q, d);
}

double score_saturated(const SparseVector& q, const SparseVector& d,
                       const SaturationParams& p) {
    double score = 0.0;
    auto iq = q.entries.begin();
    auto id = d.entries.begin();
    while (iq != q.entries.end() && id != d.entries.end()) {
        if (iq->term < id->term) {
            ++iq;
        } else if (id->term < iq->term) {
            ++id;
        } else {
            score += iq->weight * saturate(id->weight, p.k1);
            ++iq;
            ++id;
        }
    }
    return score;
}

double bm25_idf(std::uint64_t num_docs, std::uint64_t doc_freq) {
    double n = static_cast<double>(num_docs);
    double df = static_cast<double>(doc_freq);
    return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

double bm25_term(double tf, double doc_len, const Bm25Params& p, double idf) {
    if (tf <= 0.0) {
        return 0.0;
    }
    double norm = p.k1 * (1.0 - p.b + p.b * doc_len / p.avg_doc_len);
    return idf * tf * (p.k1 + 1.0) / (tf + norm);
}

double score_bm25(const SparseVector& q, DocId doc, const InvertedIndex& idx,
                  const Bm25Params& p) {
    if (doc >= idx.num_docs) {
        throw InputError("docid out of range: " + std::to_string(doc));
    }
    double score = 0.0;
    double doc_len = static_cast<double>(p.doc_lens[doc]);
    for (const auto& e : q.entries) {
        const PostingList* list = idx.find_postings(e.term);
        if (list == nullptr) {
            continue;
        }
        auto it = std::lower_bound(list->docs.begin(), list->docs.end(), doc);
        if (it == list->docs.end() || *it != doc) {
            continue;
        }
        auto tf = static_cast<double>(list->impacts[it - list->docs.begin()]);
        score += bm25_term(tf, doc_len, p, bm25_idf(idx.num_docs, list->size()));
    }
    return score;
}

}  // namespace twostep
