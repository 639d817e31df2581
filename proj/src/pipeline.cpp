#include "twostep/pipeline.hpp"

#include <algorithm>

#include "twostep/pruning.hpp"

namespace twostep {

namespace {

std::vector<DocId> candidate_docids(const ScoredList& first_stage) {
    std::vector<DocId> docs;
    docs.reserve(first_stage.hits.size());
    for (const auto& hit : first_stage.hits) {
        docs.push_back(hit.doc);
    }
    std::sort(docs.begin(), docs.end());
    return docs;
}

ScoredList rescore(const SparseVector& full_query, const ScoredList& first_stage,
                   const RescoreSource& source, RescoreMode mode, std::size_t k) {
    if (first_stage.hits.empty()) {
        return {{}, first_stage.counters};
    }
    auto docs = candidate_docids(first_stage);

    ScoredList final_list;
    if (mode == RescoreMode::Forward) {
        if (source.forward == nullptr) {
            throw InputError("forward rescoring requested without a forward index");
        }
        final_list = search_filtered(full_query, *source.forward, docs, k);
    } else {
        if (source.inverted == nullptr) {
            throw InputError("inverted rescoring requested without an inverted index");
        }
        SearchParams params;
        params.k = k;
        params.scorer = ScorerKind::Dot;
        params.filter = &docs;
        Searcher searcher(*source.inverted);
        final_list = searcher.search(full_query, params);
    }
    final_list.counters += first_stage.counters;
    return final_list;
}

}  // namespace

ScoredList two_step_search(const SparseVector& query, const InvertedIndex& approx,
                           const RescoreSource& rescore_source, const TwoStepConfig& cfg) {
    SparseVector pruned = prune_vector_topk(query, std::max<std::size_t>(1, cfg.query_prune_k));

    SearchParams first;
    first.k = cfg.candidates;
    first.algorithm = cfg.first_stage_algorithm;
    first.scorer = ScorerKind::Saturated;
    first.saturation = cfg.saturation;
    Searcher searcher(approx);
    ScoredList approx_hits = searcher.search(pruned, first);

    return rescore(query, approx_hits, rescore_source, cfg.rescore_mode, cfg.k);
}

ScoredList gt_search(const SparseVector& query, const InvertedIndex& approx,
                     const RescoreSource& rescore_source, const GtConfig& cfg) {
    SparseVector pruned = prune_vector_topk(query, std::max<std::size_t>(1, cfg.query_prune_k));

    SearchParams first;
    first.k = cfg.candidates;
    first.algorithm = cfg.first_stage_algorithm;
    first.scorer = ScorerKind::Bm25;
    first.bm25_k1 = cfg.bm25_k1;
    first.bm25_b = cfg.bm25_b;
    Searcher searcher(approx);
    ScoredList approx_hits = searcher.search(pruned, first);

    return rescore(query, approx_hits, rescore_source, cfg.rescore_mode, cfg.k);
}

}  // namespace twostep
