#include "twostep/index_io.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace twostep {

namespace {

constexpr int kFormatVersion = 1;

void write_file_with_checksum(const std::filesystem::path& path,
                              const std::vector<std::uint8_t>& payload) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    std::uint64_t sum = fnv1a64(payload.data(), payload.size());
    std::uint8_t trailer[8];
    for (int i = 0; i < 8; ++i) {
        trailer[i] = static_cast<std::uint8_t>(sum >> (8 * i));
    }
    out.write(reinterpret_cast<const char*>(trailer), 8);
    if (!out) {
        throw IoError("short write to " + path.string());
    }
}

std::vector<std::uint8_t> read_file_with_checksum(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() < 8) {
        throw IndexTruncatedError("truncated index file: " + path.string());
    }
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) {
        stored |= static_cast<std::uint64_t>(bytes[bytes.size() - 8 + i]) << (8 * i);
    }
    bytes.resize(bytes.size() - 8);
    if (fnv1a64(bytes.data(), bytes.size()) != stored) {
        throw IndexChecksumError("checksum mismatch in " + path.string());
    }
    return bytes;
}

class Reader {
  public:
    Reader(std::vector<std::uint8_t> bytes, std::string name)
        : bytes_(std::move(bytes)), name_(std::move(name)) {}

    std::uint64_t varint() {
        if (pos_ >= bytes_.size()) {
            throw IndexTruncatedError("truncated payload in " + name_);
        }
        return read_varint(bytes_, pos_);
    }

    std::uint8_t byte() {
        if (pos_ >= bytes_.size()) {
            throw IndexTruncatedError("truncated payload in " + name_);
        }
        return bytes_[pos_++];
    }

    double real() {
        if (pos_ + 8 > bytes_.size()) {
            throw IndexTruncatedError("truncated payload in " + name_);
        }
        double value;
        std::memcpy(&value, bytes_.data() + pos_, 8);
        pos_ += 8;
        return value;
    }

    std::string str(std::size_t len) {
        if (pos_ + len > bytes_.size()) {
            throw IndexTruncatedError("truncated payload in " + name_);
        }
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
        pos_ += len;
        return s;
    }

    bool done() const { return pos_ == bytes_.size(); }
    const std::string& name() const { return name_; }

  private:
    std::vector<std::uint8_t> bytes_;
    std::string name_;
    std::size_t pos_ = 0;
};

void append_real(std::vector<std::uint8_t>& buf, double value) {
    std::uint8_t raw[8];
    std::memcpy(raw, &value, 8);
    buf.insert(buf.end(), raw, raw + 8);
}

std::uint64_t file_bytes(const std::filesystem::path& p) {
    std::error_code ec;
    auto n = std::filesystem::file_size(p, ec);
    if (ec) {
        throw IoError("cannot stat " + p.string());
    }
    return n;
}

}  // namespace

void append_varint(std::vector<std::uint8_t>& buf, std::uint64_t value) {
    while (value >= 0x80) {
        buf.push_back(static_cast<std::uint8_t>(value) | 0x80);
        value >>= 7;
    }
    buf.push_back(static_cast<std::uint8_t>(value));
}

std::uint64_t read_varint(const std::vector<std::uint8_t>& buf, std::size_t& pos) {
    std::uint64_t value = 0;
    int shift = 0;
    while (true) {
        if (pos >= buf.size() || shift > 63) {
            throw IndexTruncatedError("malformed varint");
        }
        std::uint8_t b = buf[pos++];
        value |= static_cast<std::uint64_t>(b & 0x7f) << shift;
        if ((b & 0x80) == 0) {
            return value;
        }
        shift += 7;
    }
}

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t len) {
    std::uint64_t hash = 14695981039346656037ull;
    for (std::size_t i = 0; i < len; ++i) {
        hash ^= data[i];
        hash *= 1099511628211ull;
    }
    return hash;
}

void save_index(const InvertedIndex& inv, const ForwardIndex& fwd,
                const std::filesystem::path& dir) {
    if (fwd.num_docs() != inv.num_docs) {
        throw InputError("forward/inverted docid spaces differ");
    }
    std::filesystem::create_directories(dir);

    nlohmann::json meta;
    meta["format_version"] = kFormatVersion;
    meta["num_docs"] = inv.num_docs;
    meta["quant_scale"] = inv.quant_scale;
    meta["quant_bits"] = inv.quant_bits;
    meta["block_size"] = inv.block_size;
    meta["vocab_size"] = inv.postings.size();
    {
        std::ofstream out(dir / "meta.json");
        if (!out) {
            throw IoError("cannot write " + (dir / "meta.json").string());
        }
        out << meta.dump(2) << '\n';
    }

    {
        std::vector<std::uint8_t> buf;
        append_varint(buf, inv.lexicon.size());
        for (const auto& term : inv.lexicon.terms()) {
            append_varint(buf, term.size());
            buf.insert(buf.end(), term.begin(), term.end());
        }
        write_file_with_checksum(dir / "lexicon.bin", buf);
    }

    {
        std::vector<std::uint8_t> postings;
        std::vector<std::uint8_t> blockmax;
        for (const auto& list : inv.postings) {
            append_varint(postings, list.size());
            DocId prev = 0;
            for (std::size_t i = 0; i < list.size(); ++i) {
                append_varint(postings, i == 0 ? list.docs[0] : list.docs[i] - prev);
                prev = list.docs[i];
            }
            postings.insert(postings.end(), list.impacts.begin(), list.impacts.end());

            append_varint(blockmax, list.blocks.size());
            DocId prev_last = 0;
            for (std::size_t i = 0; i < list.blocks.size(); ++i) {
                const auto& b = list.blocks[i];
                append_varint(blockmax, i == 0 ? b.last_doc : b.last_doc - prev_last);
                prev_last = b.last_doc;
                blockmax.push_back(b.max_impact);
            }
        }
        write_file_with_checksum(dir / "postings.bin", postings);
        write_file_with_checksum(dir / "blockmax.bin", blockmax);
    }

    {
        std::vector<std::uint8_t> buf;
        append_varint(buf, fwd.num_docs());
        for (const auto& vec : fwd.vectors) {
            append_varint(buf, vec.nnz());
            TermId prev = 0;
            for (std::size_t i = 0; i < vec.nnz(); ++i) {
                append_varint(buf, i == 0 ? vec.entries[0].term : vec.entries[i].term - prev);
                prev = vec.entries[i].term;
            }
            for (const auto& e : vec.entries) {
                append_real(buf, e.weight);
            }
        }
        write_file_with_checksum(dir / "forward.bin", buf);
    }

    {
        std::ofstream out(dir / "docids.txt");
        if (!out) {
            throw IoError("cannot write " + (dir / "docids.txt").string());
        }
        for (const auto& name : inv.doc_names) {
            out << name << '\n';
        }
    }
}

Index load_index(const std::filesystem::path& dir) {
    nlohmann::json meta;
    {
        std::ifstream in(dir / "meta.json");
        if (!in) {
            throw IoError("cannot open " + (dir / "meta.json").string());
        }
        meta = nlohmann::json::parse(in, nullptr, false);
        if (meta.is_discarded() || !meta.contains("format_version")) {
            throw IndexFormatError("malformed meta.json in " + dir.string());
        }
    }
    if (meta["format_version"].get<int>() != kFormatVersion) {
        throw IndexVersionError("unsupported index format version " +
                                meta["format_version"].dump() + " in " + dir.string());
    }

    Index index;
    auto& inv = index.inverted;
    inv.num_docs = meta["num_docs"].get<std::uint32_t>();
    inv.quant_scale = meta["quant_scale"].get<double>();
    inv.quant_bits = meta["quant_bits"].get<std::uint32_t>();
    inv.block_size = meta["block_size"].get<std::uint32_t>();
    auto vocab_size = meta["vocab_size"].get<std::size_t>();

    {
        Reader r(read_file_with_checksum(dir / "lexicon.bin"), "lexicon.bin");
        auto count = r.varint();
        for (std::uint64_t i = 0; i < count; ++i) {
            auto len = r.varint();
            inv.lexicon.insert(r.str(len));
        }
    }

    {
        Reader postings(read_file_with_checksum(dir / "postings.bin"), "postings.bin");
        Reader blockmax(read_file_with_checksum(dir / "blockmax.bin"), "blockmax.bin");
        inv.postings.resize(vocab_size);
        for (auto& list : inv.postings) {
            auto len = postings.varint();
            list.docs.reserve(len);
            list.impacts.reserve(len);
            DocId doc = 0;
            for (std::uint64_t i = 0; i < len; ++i) {
                auto delta = postings.varint();
                doc = i == 0 ? static_cast<DocId>(delta) : doc + static_cast<DocId>(delta);
                if (doc >= inv.num_docs) {
                    throw IndexFormatError("docid out of range in postings.bin");
                }
                list.docs.push_back(doc);
            }
            for (std::uint64_t i = 0; i < len; ++i) {
                Impact impact = postings.byte();
                list.impacts.push_back(impact);
                list.max_impact = std::max(list.max_impact, impact);
            }
            auto nblocks = blockmax.varint();
            DocId last = 0;
            for (std::uint64_t i = 0; i < nblocks; ++i) {
                auto delta = blockmax.varint();
                last = i == 0 ? static_cast<DocId>(delta) : last + static_cast<DocId>(delta);
                list.blocks.push_back({last, blockmax.byte()});
            }
        }
        if (!postings.done() || !blockmax.done()) {
            throw IndexFormatError("trailing bytes in postings payload");
        }
    }

    {
        Reader r(read_file_with_checksum(dir / "forward.bin"), "forward.bin");
        auto ndocs = r.varint();
        if (ndocs != inv.num_docs) {
            throw IndexFormatError("forward.bin docid space disagrees with meta.json");
        }
        index.forward.vectors.resize(ndocs);
        for (auto& vec : index.forward.vectors) {
            auto nnz = r.varint();
            vec.entries.resize(nnz);
            TermId term = 0;
            for (std::uint64_t i = 0; i < nnz; ++i) {
                auto delta = r.varint();
                term = i == 0 ? static_cast<TermId>(delta) : term + static_cast<TermId>(delta);
                vec.entries[i].term = term;
            }
            for (std::uint64_t i = 0; i < nnz; ++i) {
                vec.entries[i].weight = r.real();
            }
        }
        if (!r.done()) {
            throw IndexFormatError("trailing bytes in forward.bin");
        }
    }

    {
        std::ifstream in(dir / "docids.txt");
        if (!in) {
            throw IoError("cannot open " + (dir / "docids.txt").string());
        }
        std::string line;
        while (std::getline(in, line)) {
            inv.doc_names.push_back(line);
        }
        if (inv.doc_names.size() != inv.num_docs) {
            throw IndexFormatError("docids.txt entry count disagrees with meta.json");
        }
    }

    inv.doc_lens.assign(inv.num_docs, 0);
    for (const auto& list : inv.postings) {
        for (DocId d : list.docs) {
            ++inv.doc_lens[d];
        }
    }
    return index;
}

SizeReport index_size_report(const std::filesystem::path& dir) {
    SizeReport report;
    report.postings_bytes = file_bytes(dir / "postings.bin");
    report.blockmax_bytes = file_bytes(dir / "blockmax.bin");
    report.lexicon_bytes = file_bytes(dir / "lexicon.bin");
    report.forward_bytes = file_bytes(dir / "forward.bin");
    report.meta_bytes = file_bytes(dir / "meta.json");
    report.docids_bytes = file_bytes(dir / "docids.txt");
    return report;
}

}  // namespace twostep
