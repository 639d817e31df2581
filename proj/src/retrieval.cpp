#include "twostep/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace twostep {

namespace {

// heap comparator: "better than"; std::*_heap then keeps the worst hit at
// the front, which is the one a strictly better document displaces
inline bool better(const Hit& a, const Hit& b) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.doc < b.doc;
}

}  // namespace

bool TopKHeap::insert(DocId doc, double score) {
    if (hits_.size() < k_) {
        hits_.push_back({doc, score});
        std::push_heap(hits_.begin(), hits_.end(), better);
        return true;
    }
    if (score > hits_.front().score) {
        std::pop_heap(hits_.begin(), hits_.end(), better);
        hits_.back() = {doc, score};
        std::push_heap(hits_.begin(), hits_.end(), better);
        return true;
    }
    return false;
}

double TopKHeap::threshold() const {
    return full() && k_ > 0 ? hits_.front().score : -std::numeric_limits<double>::infinity();
}

double TopKHeap::prune_threshold() const {
    double t = threshold();
    return t > 0.0 ? t * (1.0 - 1e-9) : t;
}

std::vector<Hit> TopKHeap::take_sorted() {
    std::sort(hits_.begin(), hits_.end(), better);
    return std::move(hits_);
}

Searcher::Searcher(const InvertedIndex& idx)
    : idx_(&idx), bm25_base_(Bm25Params::from_index(idx)) {
    for (std::size_t i = 0; i < dequant_.size(); ++i) {
        dequant_[i] = static_cast<double>(i) * idx.quant_scale;
    }
    std::uint32_t min_len = 0;
    for (auto len : idx.doc_lens) {
        if (len > 0 && (min_len == 0 || len < min_len)) {
            min_len = len;
        }
    }
    bm25_min_len_ = min_len > 0 ? static_cast<double>(min_len) : 1.0;
}

void Searcher::prepare(const SparseVector& query, const SearchParams& params) {
    kind_ = params.scorer;
    counters_ = {};
    cursors_.clear();

    switch (kind_) {
        case ScorerKind::Dot:
            table_ = dequant_;
            break;
        case ScorerKind::Saturated:
            table_[0] = 0.0;
            for (std::size_t i = 1; i < table_.size(); ++i) {
                table_[i] = saturate(dequant_[i], params.saturation.k1);
            }
            break;
        case ScorerKind::Bm25:
            bm25_ = Bm25Params{params.bm25_k1, params.bm25_b, bm25_base_.avg_doc_len, {}};
            break;
    }

    for (const auto& e : query.entries) {
        const PostingList* list = idx_->find_postings(e.term);
        if (list == nullptr) {
            continue;  // unknown or fully pruned term matches nothing
        }
        TermCursor tc;
        tc.cur = PostingCursor(*list, idx_->block_size);
        tc.q_weight = e.weight;
        tc.list_size = list->size();
        tc.canon = static_cast<std::uint32_t>(cursors_.size());
        if (kind_ == ScorerKind::Bm25) {
            tc.idf = bm25_idf(idx_->num_docs, list->size());
        }
        tc.bound = block_bound(tc, list->max_impact);
        cursors_.push_back(tc);
    }

    match_impact_.assign(cursors_.size(), 0);
    match_stamp_.assign(cursors_.size(), 0);
    stamp_ = 0;
}

double Searcher::contribution(const TermCursor& tc, Impact impact, DocId doc) const {
    if (kind_ == ScorerKind::Bm25) {
        auto doc_len = static_cast<double>(bm25_base_.doc_lens[doc]);
        return bm25_term(static_cast<double>(impact), doc_len, bm25_, tc.idf);
    }
    return tc.q_weight * table_[impact];
}

double Searcher::block_bound(const TermCursor& tc, Impact block_max) const {
    if (kind_ == ScorerKind::Bm25) {
        // best case: maximal impact in a minimum-length document
        return bm25_term(static_cast<double>(block_max), bm25_min_len_, bm25_, tc.idf);
    }
    return tc.q_weight * table_[block_max];
}

void Searcher::record_match(const TermCursor& tc, Impact impact) {
    match_impact_[tc.canon] = impact;
    match_stamp_[tc.canon] = stamp_;
    ++counters_.postings_touched;
}

double Searcher::canonical_score(DocId doc) const {
    double score = 0.0;
    for (const auto& tc : cursors_) {
        if (match_stamp_[tc.canon] == stamp_) {
            score += contribution(tc, match_impact_[tc.canon], doc);
        }
    }
    return score;
}

ScoredList Searcher::search(const SparseVector& query, const SearchParams& params) {
    if (params.k == 0) {
        throw InputError("search requires k >= 1");
    }
    prepare(query, params);

    if (params.filter != nullptr) {
        return run_filtered(*params.filter, params.k);
    }
    if (cursors_.empty()) {
        return {};
    }
    switch (params.algorithm) {
        case Algorithm::Exhaustive:
            return run_exhaustive(params.k);
        case Algorithm::MaxScore:
            return run_maxscore(params.k);
        case Algorithm::Wand:
            return run_wand(params.k, false);
        case Algorithm::BlockMaxWand:
            return run_wand(params.k, true);
    }
    throw InputError("unknown search algorithm");
}

ScoredList Searcher::run_exhaustive(std::size_t k) {
    TopKHeap heap(k);
    while (true) {
        DocId doc = kInvalidDocId;
        for (const auto& tc : cursors_) {
            doc = std::min(doc, tc.cur.docid());
        }
        if (doc == kInvalidDocId) {
            break;
        }
        ++stamp_;
        for (auto& tc : cursors_) {
            if (tc.cur.docid() == doc) {
                record_match(tc, tc.cur.impact());
                tc.cur.next();
            }
        }
        ++counters_.docs_fully_scored;
        heap.insert(doc, canonical_score(doc));
    }
    return {heap.take_sorted(), counters_};
}

ScoredList Searcher::run_maxscore(std::size_t k) {
    TopKHeap heap(k);

    // ascending per-list upper bound; ties keep canonical order
    std::vector<TermCursor*> ordered;
    ordered.reserve(cursors_.size());
    for (auto& tc : cursors_) {
        ordered.push_back(&tc);
    }
    std::sort(ordered.begin(), ordered.end(), [](const TermCursor* a, const TermCursor* b) {
        if (a->bound != b->bound) {
            return a->bound < b->bound;
        }
        return a->canon < b->canon;
    });

    std::vector<double> prefix_bound(ordered.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        acc += ordered[i]->bound;
        prefix_bound[i] = acc;
    }

    std::size_t non_essential = 0;
    const std::size_t n = ordered.size();

    DocId cur_doc = kInvalidDocId;
    for (std::size_t i = non_essential; i < n; ++i) {
        cur_doc = std::min(cur_doc, ordered[i]->cur.docid());
    }

    while (non_essential < n && cur_doc != kInvalidDocId) {
        ++stamp_;
        double partial = 0.0;
        DocId next_doc = kInvalidDocId;
        for (std::size_t i = non_essential; i < n; ++i) {
            auto& tc = *ordered[i];
            if (tc.cur.docid() == cur_doc) {
                Impact impact = tc.cur.impact();
                record_match(tc, impact);
                partial += contribution(tc, impact, cur_doc);
                tc.cur.next();
            }
            next_doc = std::min(next_doc, tc.cur.docid());
        }

        bool complete = true;
        for (std::size_t i = non_essential; i-- > 0;) {
            if (!(partial + prefix_bound[i] > heap.prune_threshold())) {
                complete = false;
                break;
            }
            auto& tc = *ordered[i];
            tc.cur.next_geq(cur_doc);
            if (tc.cur.docid() == cur_doc) {
                Impact impact = tc.cur.impact();
                record_match(tc, impact);
                partial += contribution(tc, impact, cur_doc);
            }
        }

        if (complete) {
            ++counters_.docs_fully_scored;
            if (heap.insert(cur_doc, canonical_score(cur_doc))) {
                while (non_essential < n &&
                       !(prefix_bound[non_essential] > heap.prune_threshold())) {
                    ++non_essential;
                }
            }
        }
        cur_doc = next_doc;
    }
    return {heap.take_sorted(), counters_};
}

ScoredList Searcher::run_wand(std::size_t k, bool block_max) {
    TopKHeap heap(k);

    std::vector<TermCursor*> ordered;
    ordered.reserve(cursors_.size());
    for (auto& tc : cursors_) {
        ordered.push_back(&tc);
    }
    auto by_docid = [](const TermCursor* a, const TermCursor* b) {
        DocId da = a->cur.docid();
        DocId db = b->cur.docid();
        if (da != db) {
            return da < db;
        }
        return a->canon < b->canon;
    };
    auto resort = [&] {
        std::sort(ordered.begin(), ordered.end(), by_docid);
        while (!ordered.empty() && ordered.back()->cur.docid() == kInvalidDocId) {
            ordered.pop_back();
        }
    };
    resort();

    // Advances the shortest list among ordered[0, limit) that is still
    // strictly before target, and restores docid order. Lists already at
    // target are excluded or no progress would be made.
    auto advance_shortest = [&](std::size_t limit, DocId target) {
        std::size_t shortest = limit;
        for (std::size_t i = 0; i < limit; ++i) {
            if (ordered[i]->cur.docid() < target &&
                (shortest == limit || ordered[i]->list_size < ordered[shortest]->list_size)) {
                shortest = i;
            }
        }
        if (shortest == limit) {
            ordered[0]->cur.next();  // unreachable under the call sites' invariants
        } else {
            ordered[shortest]->cur.next_geq(target);
        }
        resort();
    };

    while (!ordered.empty()) {
        // pivot: first prefix of docid-ordered lists whose bounds can beat
        // the threshold
        double acc = 0.0;
        std::size_t pivot = ordered.size();
        for (std::size_t i = 0; i < ordered.size(); ++i) {
            acc += ordered[i]->bound;
            if (acc > heap.prune_threshold()) {
                pivot = i;
                break;
            }
        }
        if (pivot == ordered.size()) {
            break;  // nothing left can enter the heap
        }
        DocId pivot_doc = ordered[pivot]->cur.docid();
        // extend over ties so every list that can contribute to pivot_doc
        // sits at or before the pivot (the shallow block bound needs this)
        while (pivot + 1 < ordered.size() && ordered[pivot + 1]->cur.docid() == pivot_doc) {
            ++pivot;
        }

        if (block_max) {
            // shallow check against the block maxima covering pivot_doc
            double block_acc = 0.0;
            DocId boundary = kInvalidDocId;  // first docid past the current block config
            for (std::size_t i = 0; i <= pivot; ++i) {
                const auto& cur = ordered[i]->cur;
                std::size_t bi = cur.block_geq(pivot_doc);
                if (bi == cur.num_blocks()) {
                    continue;  // list holds nothing at or past pivot_doc
                }
                block_acc += block_bound(*ordered[i], cur.block(bi).max_impact);
                boundary = std::min(boundary, cur.block(bi).last_doc + 1);
            }
            if (!(block_acc > heap.prune_threshold())) {
                // no doc inside the current block configuration can enter;
                // skip to the next configuration
                DocId candidate = boundary;
                if (pivot + 1 < ordered.size()) {
                    candidate = std::min(candidate, ordered[pivot + 1]->cur.docid());
                }
                if (candidate <= pivot_doc) {
                    candidate = pivot_doc + 1;
                }
                advance_shortest(pivot + 1, candidate);
                continue;
            }
        }

        if (ordered[0]->cur.docid() == pivot_doc) {
            // lists aligned: evaluate the pivot document
            ++stamp_;
            for (std::size_t i = 0; i < ordered.size() && ordered[i]->cur.docid() == pivot_doc;
                 ++i) {
                auto& tc = *ordered[i];
                record_match(tc, tc.cur.impact());
                tc.cur.next();
            }
            ++counters_.docs_fully_scored;
            heap.insert(pivot_doc, canonical_score(pivot_doc));
            resort();
        } else {
            advance_shortest(pivot, pivot_doc);
        }
    }
    return {heap.take_sorted(), counters_};
}

ScoredList Searcher::run_filtered(const std::vector<DocId>& candidates, std::size_t k) {
    TopKHeap heap(k);
    DocId prev = 0;
    bool first = true;
    for (DocId doc : candidates) {
        if (doc >= idx_->num_docs) {
            throw InputError("candidate docid out of range: " + std::to_string(doc));
        }
        if (!first && doc <= prev) {
            throw InputError("candidate docid set must be strictly increasing");
        }
        first = false;
        prev = doc;

        ++stamp_;
        for (auto& tc : cursors_) {
            tc.cur.next_geq(doc);
            if (tc.cur.docid() == doc) {
                record_match(tc, tc.cur.impact());
            }
        }
        ++counters_.docs_fully_scored;
        heap.insert(doc, canonical_score(doc));
    }
    return {heap.take_sorted(), counters_};
}

ScoredList search_exhaustive(const SparseVector& q, const InvertedIndex& idx,
                             const SearchParams& p) {
    SearchParams params = p;
    params.algorithm = Algorithm::Exhaustive;
    Searcher s(idx);
    return s.search(q, params);
}

ScoredList search_maxscore(const SparseVector& q, const InvertedIndex& idx,
                           const SearchParams& p) {
    SearchParams params = p;
    params.algorithm = Algorithm::MaxScore;
    Searcher s(idx);
    return s.search(q, params);
}

ScoredList search_wand(const SparseVector& q, const InvertedIndex& idx, const SearchParams& p) {
    SearchParams params = p;
    params.algorithm = Algorithm::Wand;
    Searcher s(idx);
    return s.search(q, params);
}

ScoredList search_bmw(const SparseVector& q, const InvertedIndex& idx, const SearchParams& p) {
    SearchParams params = p;
    params.algorithm = Algorithm::BlockMaxWand;
    Searcher s(idx);
    return s.search(q, params);
}

ScoredList search_filtered(const SparseVector& full_query, const ForwardIndex& fwd,
                           const std::vector<DocId>& candidates, std::size_t k) {
    if (k == 0) {
        throw InputError("search requires k >= 1");
    }
    TopKHeap heap(k);
    SearchCounters counters;
    DocId prev = 0;
    bool first = true;
    for (DocId doc : candidates) {
        const SparseVector& vec = fwd.vector(doc);  // throws on out-of-range
        if (!first && doc <= prev) {
            throw InputError("candidate docid set must be strictly increasing");
        }
        first = false;
        prev = doc;
        counters.postings_touched += vec.nnz();
        ++counters.docs_fully_scored;
        heap.insert(doc, dot(full_query, vec));
    }
    return {heap.take_sorted(), counters};
}

}  // namespace twostep
