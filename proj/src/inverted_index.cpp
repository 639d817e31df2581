#include "twostep/inverted_index.hpp"

#include <algorithm>
#include <cmath>

namespace twostep {

DocId InvertedIndex::docid_of(const std::string& name) const {
    for (std::size_t d = 0; d < doc_names.size(); ++d) {
        if (doc_names[d] == name) {
            return static_cast<DocId>(d);
        }
    }
    throw InputError("unknown document id: " + name);
}

namespace {

Impact quantize(double weight, double max_weight, std::uint32_t levels) {
    // round half up; equal to round(w / quant_scale) in exact arithmetic but
    // stable at representable midpoints
    auto impact = static_cast<long>(std::floor(weight / max_weight * levels + 0.5));
    impact = std::clamp<long>(impact, 1, levels);
    return static_cast<Impact>(impact);
}

}  // namespace

InvertedIndex build_inverted(const Collection& c, std::uint32_t block_size,
                             std::uint32_t quant_bits) {
    if (c.docs.empty()) {
        throw InputError("cannot index an empty collection");
    }
    if (quant_bits < 1 || quant_bits > 8) {
        throw InputError("quant_bits must be in [1,8]");
    }
    if (block_size == 0) {
        throw InputError("block_size must be >= 1");
    }

    double max_weight = 0.0;
    for (const auto& doc : c.docs) {
        for (const auto& e : doc.vector.entries) {
            max_weight = std::max(max_weight, e.weight);
        }
    }
    if (max_weight == 0.0) {
        throw InputError("cannot index a collection with only empty vectors");
    }

    const auto levels = static_cast<std::uint32_t>((1u << quant_bits) - 1);

    InvertedIndex idx;
    idx.num_docs = static_cast<std::uint32_t>(c.docs.size());
    idx.quant_scale = max_weight / static_cast<double>(levels);
    idx.quant_bits = quant_bits;
    idx.block_size = block_size;
    idx.lexicon = c.lexicon;
    idx.postings.resize(c.lexicon.size());
    idx.doc_names.reserve(c.docs.size());
    idx.doc_lens.reserve(c.docs.size());

    for (std::size_t d = 0; d < c.docs.size(); ++d) {
        const auto& doc = c.docs[d];
        idx.doc_names.push_back(doc.id);
        idx.doc_lens.push_back(static_cast<std::uint32_t>(doc.vector.nnz()));
        for (const auto& e : doc.vector.entries) {
            auto& list = idx.postings[e.term];
            list.docs.push_back(static_cast<DocId>(d));
            list.impacts.push_back(quantize(e.weight, max_weight, levels));
        }
    }

    for (auto& list : idx.postings) {
        if (list.empty()) {
            continue;
        }
        list.max_impact = *std::max_element(list.impacts.begin(), list.impacts.end());
        for (std::size_t begin = 0; begin < list.size(); begin += block_size) {
            std::size_t end = std::min(list.size(), begin + block_size);
            Impact block_max = 0;
            for (std::size_t i = begin; i < end; ++i) {
                block_max = std::max(block_max, list.impacts[i]);
            }
            list.blocks.push_back({list.docs[end - 1], block_max});
        }
    }
    return idx;
}

ForwardIndex build_forward(const Collection& c) {
    ForwardIndex fwd;
    fwd.vectors.reserve(c.docs.size());
    for (const auto& doc : c.docs) {
        fwd.vectors.push_back(doc.vector);
    }
    return fwd;
}

}  // namespace twostep
