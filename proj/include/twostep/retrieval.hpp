#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "twostep/inverted_index.hpp"
#include "twostep/scoring.hpp"
#include "twostep/sparse_vector.hpp"

namespace twostep {

enum class Algorithm { Exhaustive, MaxScore, Wand, BlockMaxWand };
enum class ScorerKind { Dot, Saturated, Bm25 };

struct SearchParams {
    std::size_t k = 100;
    Algorithm algorithm = Algorithm::MaxScore;
    ScorerKind scorer = ScorerKind::Dot;
    SaturationParams saturation{100.0};
    double bm25_k1 = 0.9;
    double bm25_b = 0.4;
    // Optional strictly increasing docid set; restricts scoring to members
    // (the nextgeq rescoring mode). Not owned.
    const std::vector<DocId>* filter = nullptr;
};

struct SearchCounters {
    std::uint64_t postings_touched = 0;   // postings whose impact was read for scoring
    std::uint64_t docs_fully_scored = 0;  // documents given a full canonical evaluation

    SearchCounters& operator+=(const SearchCounters& o) {
        postings_touched += o.postings_touched;
        docs_fully_scored += o.docs_fully_scored;
        return *this;
    }
};

struct Hit {
    DocId doc = 0;
    double score = 0.0;

    friend bool operator==(const Hit&, const Hit&) = default;
};

// Ranked results of one query: score descending, ties by ascending docid.
struct ScoredList {
    std::vector<Hit> hits;
    SearchCounters counters;
};

// Top-k accumulator implementing the engine-wide tie rule: a new document
// must strictly beat the k-th score to enter a full heap; among equal
// scores the lower docid ranks first. With documents arriving in ascending
// docid order this yields the exact top-k under (score desc, docid asc).
class TopKHeap {
  public:
    explicit TopKHeap(std::size_t k) : k_(k) {}

    bool insert(DocId doc, double score);
    bool full() const { return hits_.size() == k_; }
    double threshold() const;

    // Threshold deflated by a relative 1e-9 for upper-bound comparisons:
    // skip decisions stay safe against summation-order rounding, at the
    // cost of occasionally evaluating a document that cannot enter.
    double prune_threshold() const;

    std::vector<Hit> take_sorted();

  private:
    std::size_t k_;
    std::vector<Hit> hits_;
};

// One query evaluation engine over an immutable index. Owns per-query
// scratch (cursors, match stamps); use one Searcher per concurrent query
// stream. All four algorithms compute the final score of a candidate by
// summing per-term contributions in ascending-term order, so their hit
// lists agree bit for bit.
class Searcher {
  public:
    explicit Searcher(const InvertedIndex& idx);

    ScoredList search(const SparseVector& query, const SearchParams& params);

  private:
    struct TermCursor {
        PostingCursor cur;
        double q_weight = 0.0;  // B(t,q); unused by BM25
        double idf = 0.0;       // BM25 only
        double bound = 0.0;     // upper bound on this term's contribution
        std::uint64_t list_size = 0;
        std::uint32_t canon = 0;  // position in ascending-term order
    };

    void prepare(const SparseVector& query, const SearchParams& params);
    double contribution(const TermCursor& tc, Impact impact, DocId doc) const;
    double block_bound(const TermCursor& tc, Impact block_max) const;
    void record_match(const TermCursor& tc, Impact impact);
    double canonical_score(DocId doc) const;

    ScoredList run_exhaustive(std::size_t k);
    ScoredList run_maxscore(std::size_t k);
    ScoredList run_wand(std::size_t k, bool block_max);
    ScoredList run_filtered(const std::vector<DocId>& candidates, std::size_t k);

    const InvertedIndex* idx_;
    std::array<double, 256> dequant_{};
    Bm25Params bm25_base_;   // doc lengths + average, shared across queries
    double bm25_min_len_ = 1.0;

    // per-query state
    ScorerKind kind_ = ScorerKind::Dot;
    std::array<double, 256> table_{};  // per-impact contribution basis (Dot/Saturated)
    Bm25Params bm25_;
    std::vector<TermCursor> cursors_;  // canonical (ascending term) order
    std::vector<Impact> match_impact_;
    std::vector<std::uint64_t> match_stamp_;
    std::uint64_t stamp_ = 0;
    SearchCounters counters_;
};

// Convenience single-shot entry points.
ScoredList search_exhaustive(const SparseVector& q, const InvertedIndex& idx,
                             const SearchParams& p);
ScoredList search_maxscore(const SparseVector& q, const InvertedIndex& idx,
                           const SearchParams& p);
ScoredList search_wand(const SparseVector& q, const InvertedIndex& idx, const SearchParams& p);
ScoredList search_bmw(const SparseVector& q, const InvertedIndex& idx, const SearchParams& p);

// Exact rescoring: full-precision dot product of the full query against
// each candidate's forward vector; top-k of the candidates returned.
ScoredList search_filtered(const SparseVector& full_query, const ForwardIndex& fwd,
                           const std::vector<DocId>& candidates, std::size_t k);

}  // namespace twostep
