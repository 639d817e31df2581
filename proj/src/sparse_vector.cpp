#include "twostep/sparse_vector.hpp"

#include <algorithm>

namespace twostep {

double dot(const SparseVector& a, const SparseVector& b) {
    double score = 0.0;
    auto ia = a.entries.begin();
    auto ib = b.entries.begin();
    while (ia != a.entries.end() && ib != b.entries.end()) {
        if (ia->term < ib->term) {
            ++ia;
        } else if (ib->term < ia->term) {
            ++ib;
        } else {
            score += ia->weight * ib->weight;
            ++ia;
            ++ib;
        }
    }
    return score;
}

bool is_valid(const SparseVector& v) {
    for (std::size_t i = 0; i < v.entries.size(); ++i) {
        if (v.entries[i].weight <= 0.0) {
            return false;
        }
        if (i > 0 && v.entries[i - 1].term >= v.entries[i].term) {
            return false;
        }
    }
    return true;
}

SparseVector normalized(std::vector<TermWeight> entries) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const TermWeight& a, const TermWeight& b) { return a.term < b.term; });
    SparseVector out;
    out.entries.reserve(entries.size());
    for (const auto& e : entries) {
        if (!out.entries.empty() && out.entries.back().term == e.term) {
            out.entries.back().weight = e.weight;  // keep-last
        } else {
            out.entries.push_back(e);
        }
    }
    std::erase_if(out.entries, [](const TermWeight& e) { return e.weight == 0.0; });
    return out;
}

}  // namespace twostep
