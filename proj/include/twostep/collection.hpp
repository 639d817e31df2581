#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "twostep/common.hpp"
#include "twostep/sparse_vector.hpp"

namespace twostep {

// Bidirectional map between term strings and dense term ids. Ids are
// assigned in first-seen order during ingestion.
class Lexicon {
  public:
    TermId id_of(const std::string& term) const;  // throws InputError if absent
    std::optional<TermId> find(const std::string& term) const;
    TermId insert(const std::string& term);  // existing terms keep their id
    const std::string& term_of(TermId id) const;
    std::size_t size() const { return terms_.size(); }

    const std::vector<std::string>& terms() const { return terms_; }

    friend bool operator==(const Lexicon& a, const Lexicon& b) { return a.terms_ == b.terms_; }

  private:
    std::vector<std::string> terms_;
    std::unordered_map<std::string, TermId> ids_;
};

struct Document {
    std::string id;
    SparseVector vector;

    friend bool operator==(const Document&, const Document&) = default;
};

struct Collection {
    std::vector<Document> docs;
    Lexicon lexicon;
    // Terms that were not in a supplied lexicon (query loading against an
    // indexed corpus); they received fresh ids past the corpus vocabulary.
    std::size_t unknown_terms = 0;

    std::size_t size() const { return docs.size(); }
};

struct CollectionStats {
    double avg_doc_terms = 0.0;
    double avg_query_terms = 0.0;
    std::size_t num_docs = 0;
    std::size_t vocab_size = 0;
    std::size_t max_doc_terms = 0;
};

// Graded relevance judgments keyed by (query id, doc id).
struct Qrels {
    std::map<std::pair<std::string, std::string>, int> judgments;

    int grade(const std::string& qid, const std::string& did) const {
        auto it = judgments.find({qid, did});
        return it == judgments.end() ? 0 : it->second;
    }
};

// Reads a JSON-lines vector file: {"id": <string>, "vector": {<term>: <w>, ...}}.
// Zero weights are dropped, negative weights and duplicate doc ids are errors.
// When `lexicon` is given (loading queries against an indexed corpus) unknown
// terms are assigned fresh ids and counted in Collection::unknown_terms.
Collection load_vectors(const std::string& path, const Lexicon* lexicon = nullptr);

// Writes the collection back as JSON-lines; load_vectors(save_vectors(c))
// reproduces the same ids and entries.
void save_vectors(const Collection& c, const std::string& path);

// Mean/max nonzeros per vector. Fills the doc-side fields; for a query
// collection the same numbers read as the query-side statistics.
CollectionStats compute_stats(const Collection& c);

// Document and query collections combined into one stats record (Alg-style
// l_d and l_q in one place).
CollectionStats compute_stats(const Collection& docs, const Collection& queries);

// TREC qrels: `qid 0 docid grade`, whitespace-separated. Duplicate
// (qid,docid) pairs keep the last occurrence; negative grades are errors.
Qrels load_qrels(const std::string& path);

}  // namespace twostep
