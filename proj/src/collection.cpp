#include "twostep/collection.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace twostep {

TermId Lexicon::id_of(const std::string& term) const {
    auto it = ids_.find(term);
    if (it == ids_.end()) {
        throw InputError("unknown term: " + term);
    }
    return it->second;
}

std::optional<TermId> Lexicon::find(const std::string& term) const {
    auto it = ids_.find(term);
    if (it == ids_.end()) {
        return std::nullopt;
    }
    return it->second;
}

TermId Lexicon::insert(const std::string& term) {
    auto [it, fresh] = ids_.try_emplace(term, static_cast<TermId>(terms_.size()));
    if (fresh) {
        terms_.push_back(term);
    }
    return it->second;
}

const std::string& Lexicon::term_of(TermId id) const {
    if (id >= terms_.size()) {
        throw InputError("term id out of range: " + std::to_string(id));
    }
    return terms_[id];
}

Collection load_vectors(const std::string& path, const Lexicon* lexicon) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open vector file: " + path);
    }

    Collection c;
    if (lexicon != nullptr) {
        c.lexicon = *lexicon;
    }
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object() || !rec.contains("id") ||
            !rec.contains("vector") || !rec["id"].is_string() || !rec["vector"].is_object()) {
            throw ParseError(path, lineno, "malformed vector record");
        }
        Document doc;
        doc.id = rec["id"].get<std::string>();
        if (!seen_ids.insert(doc.id).second) {
            throw InputError(path + ": duplicate doc id: " + doc.id);
        }
        std::vector<TermWeight> entries;
        entries.reserve(rec["vector"].size());
        for (const auto& [term, value] : rec["vector"].items()) {
            if (!value.is_number()) {
                throw ParseError(path, lineno, "non-numeric weight for term '" + term + "'");
            }
            double w = value.get<double>();
            if (w < 0.0) {
                throw InputError(path + ":" + std::to_string(lineno) +
                                 ": negative weight for term '" + term + "'");
            }
            if (w == 0.0) {
                continue;
            }
            TermId tid;
            if (lexicon != nullptr) {
                if (auto known = c.lexicon.find(term)) {
                    tid = *known;
                } else {
                    tid = c.lexicon.insert(term);
                    ++c.unknown_terms;
                }
            } else {
                tid = c.lexicon.insert(term);
            }
            entries.push_back({tid, w});
        }
        doc.vector = normalized(std::move(entries));
        c.docs.push_back(std::move(doc));
    }
    return c;
}

void save_vectors(const Collection& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write vector file: " + path);
    }
    for (const auto& doc : c.docs) {
        nlohmann::json vec = nlohmann::json::object();
        for (const auto& e : doc.vector.entries) {
            vec[c.lexicon.term_of(e.term)] = e.weight;
        }
        nlohmann::json rec;
        rec["id"] = doc.id;
        rec["vector"] = std::move(vec);
        out << rec.dump() << '\n';
    }
}

CollectionStats compute_stats(const Collection& c) {
    if (c.docs.empty()) {
        throw InputError("cannot compute statistics of an empty collection");
    }
    CollectionStats stats;
    stats.num_docs = c.docs.size();
    stats.vocab_size = c.lexicon.size();
    std::size_t total = 0;
    for (const auto& doc : c.docs) {
        total += doc.vector.nnz();
        stats.max_doc_terms = std::max(stats.max_doc_terms, doc.vector.nnz());
    }
    stats.avg_doc_terms = static_cast<double>(total) / static_cast<double>(stats.num_docs);
    return stats;
}

CollectionStats compute_stats(const Collection& docs, const Collection& queries) {
    CollectionStats stats = compute_stats(docs);
    stats.avg_query_terms = compute_stats(queries).avg_doc_terms;
    return stats;
}

Qrels load_qrels(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open qrels file: " + path);
    }
    Qrels qrels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        std::string qid, iteration, did;
        long grade;
        if (!(fields >> qid >> iteration >> did >> grade)) {
            throw ParseError(path, lineno, "malformed qrels line");
        }
        if (grade < 0) {
            throw ParseError(path, lineno, "negative relevance grade");
        }
        qrels.judgments[{qid, did}] = static_cast<int>(grade);  // last wins
    }
    return qrels;
}

}  // namespace twostep
