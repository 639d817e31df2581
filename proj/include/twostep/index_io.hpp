#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "twostep/inverted_index.hpp"

namespace twostep {

// On-disk layout of an index directory:
//   meta.json     version, num_docs, quant_scale, quant_bits, block_size, vocab_size
//   lexicon.bin   varint count, then per term: varint length + bytes
//   postings.bin  per term: varint length, delta-varint docids, raw impact bytes
//   blockmax.bin  per term: varint block count, per block delta-varint last_doc + impact byte
//   forward.bin   per doc: varint nnz, delta-varint term ids, raw 8-byte weights
//   docids.txt    external doc id strings, one per line, docid order
// Every .bin file ends with a little-endian FNV-1a 64 checksum of its payload.

struct Index {
    InvertedIndex inverted;
    ForwardIndex forward;
};

void save_index(const InvertedIndex& inv, const ForwardIndex& fwd,
                const std::filesystem::path& dir);

Index load_index(const std::filesystem::path& dir);

struct SizeReport {
    std::uint64_t postings_bytes = 0;
    std::uint64_t blockmax_bytes = 0;
    std::uint64_t lexicon_bytes = 0;
    std::uint64_t forward_bytes = 0;
    std::uint64_t meta_bytes = 0;
    std::uint64_t docids_bytes = 0;

    std::uint64_t total_bytes() const {
        return postings_bytes + blockmax_bytes + lexicon_bytes + forward_bytes + meta_bytes +
               docids_bytes;
    }
};

SizeReport index_size_report(const std::filesystem::path& dir);

// Unsigned LEB128. Exposed for tests.
void append_varint(std::vector<std::uint8_t>& buf, std::uint64_t value);
std::uint64_t read_varint(const std::vector<std::uint8_t>& buf, std::size_t& pos);

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t len);

}  // namespace twostep
