#include "twostep/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "twostep/sparse_vector.hpp"

namespace twostep {

namespace {

// inverse-CDF sampling over 1/(rank+1)^s term popularity
class ZipfSampler {
  public:
    ZipfSampler(std::size_t n, double s) {
        cumulative_.reserve(n);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += 1.0 / std::pow(static_cast<double>(i + 1), s);
            cumulative_.push_back(total);
        }
        for (auto& c : cumulative_) {
            c /= total;
        }
    }

    std::size_t sample(std::mt19937_64& rng) const {
        double u = uniform01(rng);
        auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) {
            return cumulative_.size() - 1;
        }
        return static_cast<std::size_t>(it - cumulative_.begin());
    }

  private:
    std::vector<double> cumulative_;
};

double pareto_weight(std::mt19937_64& rng, double alpha) {
    double u = uniform01(rng);
    return std::pow(1.0 - u, -1.0 / alpha);  // >= 1, heavy tail
}

SparseVector random_vector(std::mt19937_64& rng, const ZipfSampler& terms, std::size_t nnz_min,
                           std::size_t nnz_max, std::size_t vocab, double alpha) {
    std::size_t nnz = nnz_min + uniform_index(rng, nnz_max - nnz_min + 1);
    nnz = std::min(nnz, vocab);
    std::set<TermId> chosen;
    while (chosen.size() < nnz) {
        chosen.insert(static_cast<TermId>(terms.sample(rng)));
    }
    SparseVector v;
    v.entries.reserve(nnz);
    for (TermId t : chosen) {
        v.entries.push_back({t, pareto_weight(rng, alpha)});
    }
    return v;
}

std::string padded(const char* prefix, std::size_t i, int width) {
    std::string num = std::to_string(i);
    std::string out = prefix;
    for (int pad = width - static_cast<int>(num.size()); pad > 0; --pad) {
        out += '0';
    }
    return out + num;
}

}  // namespace

SynthData make_synthetic(const SynthConfig& cfg) {
    if (cfg.num_docs == 0 || cfg.vocab == 0) {
        throw InputError("synthetic corpus needs at least one document and term");
    }
    std::mt19937_64 rng(cfg.seed);
    ZipfSampler terms(cfg.vocab, cfg.zipf_s);

    SynthData data;
    for (std::size_t t = 0; t < cfg.vocab; ++t) {
        data.docs.lexicon.insert(padded("t", t, 5));
    }
    data.docs.docs.reserve(cfg.num_docs);
    for (std::size_t d = 0; d < cfg.num_docs; ++d) {
        data.docs.docs.push_back(
            {padded("d", d, 6), random_vector(rng, terms, cfg.doc_nnz_min, cfg.doc_nnz_max,
                                              cfg.vocab, cfg.weight_alpha)});
    }

    data.queries.lexicon = data.docs.lexicon;
    data.queries.docs.reserve(cfg.num_queries);
    for (std::size_t q = 0; q < cfg.num_queries; ++q) {
        data.queries.docs.push_back(
            {padded("q", q, 4), random_vector(rng, terms, cfg.query_nnz_min, cfg.query_nnz_max,
                                              cfg.vocab, cfg.weight_alpha)});
    }

    // judgments: grade the strongest exact matches per query, mix in a few
    // judged non-relevant documents
    for (const auto& query : data.queries.docs) {
        std::vector<std::pair<double, std::size_t>> scored;
        for (std::size_t d = 0; d < data.docs.docs.size(); ++d) {
            double s = dot(query.vector, data.docs.docs[d].vector);
            if (s > 0.0) {
                scored.push_back({s, d});
            }
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) {
                return a.first > b.first;
            }
            return a.second < b.second;
        });
        std::size_t graded = std::min<std::size_t>(scored.size(), 10);
        for (std::size_t i = 0; i < graded; ++i) {
            int grade = i < 2 ? 3 : (i < 5 ? 2 : 1);
            data.qrels.judgments[{query.id, data.docs.docs[scored[i].second].id}] = grade;
        }
        for (std::size_t i = 0; i < 5 && graded + i < scored.size(); ++i) {
            data.qrels.judgments[{query.id, data.docs.docs[scored[graded + i].second].id}] = 0;
        }
    }
    return data;
}

}  // namespace twostep
