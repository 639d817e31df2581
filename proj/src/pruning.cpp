#include "twostep/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace twostep {

SparseVector prune_vector_topk(const SparseVector& v, std::size_t k) {
    if (k == 0) {
        throw InputError("prune_vector_topk requires k >= 1");
    }
    if (v.nnz() <= k) {
        return v;
    }
    std::vector<TermWeight> entries = v.entries;
    // highest weight first, ties keep the lower term id
    std::nth_element(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     entries.end(), [](const TermWeight& a, const TermWeight& b) {
                         if (a.weight != b.weight) {
                             return a.weight > b.weight;
                         }
                         return a.term < b.term;
                     });
    entries.resize(k);
    std::sort(entries.begin(), entries.end(),
              [](const TermWeight& a, const TermWeight& b) { return a.term < b.term; });
    return SparseVector{std::move(entries)};
}

namespace {

PruneOutcome prune_per_doc_topk(const Collection& c, std::size_t k) {
    PruneOutcome out;
    out.collection.lexicon = c.lexicon;
    out.collection.docs.reserve(c.docs.size());
    for (const auto& doc : c.docs) {
        Document pruned{doc.id, prune_vector_topk(doc.vector, k)};
        if (pruned.vector.empty()) {
            ++out.emptied_docs;
        }
        out.collection.docs.push_back(std::move(pruned));
    }
    return out;
}

// Truncates each term's posting list to its top ceil(quantile*len) impacts
// (by weight, ties toward the lower docid), then reassembles documents.
PruneOutcome prune_term_quantile(const Collection& c, double quantile) {
    struct Posting {
        std::size_t doc;
        double weight;
    };
    std::map<TermId, std::vector<Posting>> postings;
    for (std::size_t d = 0; d < c.docs.size(); ++d) {
        for (const auto& e : c.docs[d].vector.entries) {
            postings[e.term].push_back({d, e.weight});
        }
    }

    std::vector<std::vector<TermWeight>> kept(c.docs.size());
    for (auto& [term, list] : postings) {
        auto keep = static_cast<std::size_t>(
            std::ceil(quantile * static_cast<double>(list.size())));
        if (keep < list.size()) {
            std::nth_element(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(keep - 1),
                             list.end(), [](const Posting& a, const Posting& b) {
                                 if (a.weight != b.weight) {
                                     return a.weight > b.weight;
                                 }
                                 return a.doc < b.doc;
                             });
            list.resize(keep);
        }
        for (const auto& p : list) {
            kept[p.doc].push_back({term, p.weight});
        }
    }

    PruneOutcome out;
    out.collection.lexicon = c.lexicon;
    out.collection.docs.reserve(c.docs.size());
    for (std::size_t d = 0; d < c.docs.size(); ++d) {
        Document doc{c.docs[d].id, normalized(std::move(kept[d]))};
        if (doc.vector.empty() && !c.docs[d].vector.empty()) {
            ++out.emptied_docs;
        }
        out.collection.docs.push_back(std::move(doc));
    }
    return out;
}

PruneOutcome prune_value_threshold(const Collection& c, double threshold) {
    PruneOutcome out;
    out.collection.lexicon = c.lexicon;
    out.collection.docs.reserve(c.docs.size());
    for (const auto& doc : c.docs) {
        Document pruned{doc.id, {}};
        pruned.vector.entries.reserve(doc.vector.nnz());
        for (const auto& e : doc.vector.entries) {
            if (e.weight >= threshold) {
                pruned.vector.entries.push_back(e);
            }
        }
        if (pruned.vector.empty() && !doc.vector.empty()) {
            ++out.emptied_docs;
        }
        out.collection.docs.push_back(std::move(pruned));
    }
    return out;
}

}  // namespace

PruneOutcome prune_collection(const Collection& c, const PruneConfig& cfg) {
    switch (cfg.strategy) {
        case PruneStrategy::DocTopK:
            return prune_per_doc_topk(c, std::min(cfg.size_k, cfg.doc_cap));
        case PruneStrategy::QueryTopK:
            return prune_per_doc_topk(c, std::min(cfg.size_k, cfg.query_cap));
        case PruneStrategy::TermQuantile:
            if (cfg.quantile < 0.0 || cfg.quantile > 1.0) {
                throw InputError("quantile must be in [0,1]");
            }
            return prune_term_quantile(c, cfg.quantile);
        case PruneStrategy::ValueThreshold:
            if (cfg.threshold < 0.0) {
                throw InputError("threshold must be non-negative");
            }
            return prune_value_threshold(c, cfg.threshold);
    }
    throw InputError("unknown pruning strategy");
}

PruneOutcome lexical_prune(const Collection& c, const CollectionStats& stats, std::size_t cap,
                           PruneSide side) {
    double avg = side == PruneSide::Documents ? stats.avg_doc_terms : stats.avg_query_terms;
    auto k = static_cast<std::size_t>(std::llround(avg));
    k = std::max<std::size_t>(1, std::min(k, cap));
    return prune_per_doc_topk(c, k);
}

}  // namespace twostep
