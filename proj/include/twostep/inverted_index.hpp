#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "twostep/collection.hpp"
#include "twostep/common.hpp"
#include "twostep/sparse_vector.hpp"

namespace twostep {

struct PostingBlock {
    DocId last_doc;      // docid of the last posting in the block
    Impact max_impact;   // max impact within the block

    friend bool operator==(const PostingBlock&, const PostingBlock&) = default;
};

struct PostingList {
    std::vector<DocId> docs;        // strictly increasing
    std::vector<Impact> impacts;    // parallel to docs
    Impact max_impact = 0;
    std::vector<PostingBlock> blocks;

    std::size_t size() const { return docs.size(); }
    bool empty() const { return docs.empty(); }

    friend bool operator==(const PostingList&, const PostingList&) = default;
};

// Impact-quantized inverted index with max-score and block-max metadata.
// Impacts dequantize as impact * quant_scale.
struct InvertedIndex {
    std::vector<PostingList> postings;  // term id -> posting list
    std::uint32_t num_docs = 0;
    double quant_scale = 0.0;
    std::uint32_t quant_bits = 8;
    std::uint32_t block_size = 64;
    std::vector<std::string> doc_names;      // internal docid -> external id
    std::vector<std::uint32_t> doc_lens;     // postings per document (BM25 length)
    Lexicon lexicon;

    const PostingList* find_postings(TermId term) const {
        if (term >= postings.size() || postings[term].empty()) {
            return nullptr;
        }
        return &postings[term];
    }

    DocId docid_of(const std::string& name) const;  // throws InputError if absent

    friend bool operator==(const InvertedIndex&, const InvertedIndex&) = default;
};

// Exact unquantized vectors for the rescoring step; shares the docid space
// of its paired inverted index.
struct ForwardIndex {
    std::vector<SparseVector> vectors;

    const SparseVector& vector(DocId d) const {
        if (d >= vectors.size()) {
            throw InputError("docid out of range: " + std::to_string(d));
        }
        return vectors[d];
    }
    std::size_t num_docs() const { return vectors.size(); }

    friend bool operator==(const ForwardIndex&, const ForwardIndex&) = default;
};

// Global-max linear quantization to 2^quant_bits - 1 levels, round half up;
// positive weights never quantize below impact 1.
InvertedIndex build_inverted(const Collection& c, std::uint32_t block_size = 64,
                             std::uint32_t quant_bits = 8);

ForwardIndex build_forward(const Collection& c);

// Read cursor over one posting list; docid() == kInvalidDocId when done.
class PostingCursor {
  public:
    PostingCursor() = default;
    PostingCursor(const PostingList& list, std::uint32_t block_size)
        : list_(&list), block_size_(block_size) {}

    DocId docid() const { return pos_ < list_->size() ? list_->docs[pos_] : kInvalidDocId; }
    Impact impact() const { return list_->impacts[pos_]; }
    std::size_t size() const { return list_->size(); }
    Impact list_max_impact() const { return list_->max_impact; }

    void next() { ++pos_; }

    // Advances to the first posting with docid >= target.
    void next_geq(DocId target) {
        if (pos_ >= list_->size() || list_->docs[pos_] >= target) {
            return;
        }
        // gallop, then binary search within the bracket
        std::size_t step = 1;
        std::size_t lo = pos_;
        std::size_t hi = pos_ + 1;
        while (hi < list_->size() && list_->docs[hi] < target) {
            lo = hi;
            step *= 2;
            hi = std::min(list_->size(), hi + step);
        }
        while (lo < hi) {
            std::size_t mid = lo + (hi - lo) / 2;
            if (list_->docs[mid] < target) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        pos_ = lo;
    }

    // Block metadata for the block containing the current posting.
    std::size_t block_index() const { return pos_ / block_size_; }
    Impact block_max() const { return list_->blocks[block_index()].max_impact; }
    DocId block_last_doc() const { return list_->blocks[block_index()].last_doc; }

    // Shallow block lookup: index of the first block whose last docid is
    // >= target, searching forward from the current block; num_blocks()
    // when the list holds nothing at or past target. Does not move the
    // cursor or decode postings.
    std::size_t block_geq(DocId target) const {
        const auto& blocks = list_->blocks;
        std::size_t lo = pos_ < list_->size() ? block_index() : blocks.size();
        std::size_t hi = blocks.size();
        while (lo < hi) {
            std::size_t mid = lo + (hi - lo) / 2;
            if (blocks[mid].last_doc < target) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        return lo;
    }
    std::size_t num_blocks() const { return list_->blocks.size(); }
    const PostingBlock& block(std::size_t i) const { return list_->blocks[i]; }

  private:
    const PostingList* list_ = nullptr;
    std::uint32_t block_size_ = 64;
    std::size_t pos_ = 0;
};

}  // namespace twostep
