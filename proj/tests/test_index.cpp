#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "support/temp_dir.hpp"
#include "twostep/index_io.hpp"
#include "twostep/inverted_index.hpp"
#include "twostep/pruning.hpp"
#include "twostep/synthetic.hpp"

using namespace twostep;

namespace {

Collection single_doc(std::vector<TermWeight> entries) {
    Collection c;
    for (TermId t = 0; t <= entries.back().term; ++t) {
        c.lexicon.insert("t" + std::to_string(t));
    }
    c.docs.push_back({"d0", SparseVector{std::move(entries)}});
    return c;
}

}  // namespace

TEST_CASE("quantization rounds half up on the midpoint") {
    // max weight 5.08, w = 2.54 sits exactly on the 127.5 midpoint
    auto c = single_doc({{0, 2.54}, {1, 5.08}});
    auto idx = build_inverted(c);
    CHECK(idx.postings[0].impacts[0] == 128);
    CHECK(idx.postings[1].impacts[0] == 255);  // scale endpoint
    CHECK(idx.quant_scale == doctest::Approx(5.08 / 255.0));
}

TEST_CASE("tiny positive weights clamp to impact 1") {
    auto c = single_doc({{0, 1e-9}, {1, 100.0}});
    auto idx = build_inverted(c);
    CHECK(idx.postings[0].impacts[0] == 1);
}

TEST_CASE("quantization error stays within half a scale step") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        SynthConfig cfg;
        cfg.num_docs = 50 + uniform_index(rng, 100);
        cfg.vocab = 100;
        cfg.seed = rng();
        auto data = make_synthetic(cfg);
        auto idx = build_inverted(data.docs);
        double bound = idx.quant_scale * (0.5 + 1e-9);  // rounding guard
        for (std::size_t d = 0; d < data.docs.docs.size(); ++d) {
            for (const auto& e : data.docs.docs[d].vector.entries) {
                const auto& list = idx.postings[e.term];
                auto it = std::lower_bound(list.docs.begin(), list.docs.end(), d);
                REQUIRE(it != list.docs.end());
                auto impact = list.impacts[it - list.docs.begin()];
                if (impact == 1) {
                    continue;  // minimum-impact clamp
                }
                CHECK(std::abs(impact * idx.quant_scale - e.weight) <= bound);
            }
        }
    }
}

TEST_CASE("max and block metadata dominate impacts") {
    SynthConfig cfg;
    cfg.num_docs = 400;
    cfg.vocab = 80;
    cfg.seed = 19;
    auto data = make_synthetic(cfg);
    auto idx = build_inverted(data.docs, 16);
    for (const auto& list : idx.postings) {
        if (list.empty()) {
            continue;
        }
        CHECK(list.blocks.size() == (list.size() + 15) / 16);
        for (std::size_t i = 0; i < list.size(); ++i) {
            auto block_max = list.blocks[i / 16].max_impact;
            CHECK(list.impacts[i] <= block_max);
            CHECK(block_max <= list.max_impact);
        }
        for (std::size_t b = 0; b < list.blocks.size(); ++b) {
            std::size_t last = std::min(list.size(), (b + 1) * 16) - 1;
            CHECK(list.blocks[b].last_doc == list.docs[last]);
        }
    }
}

TEST_CASE("block_size larger than any list gives one block per list") {
    SynthConfig cfg;
    cfg.num_docs = 30;
    cfg.vocab = 40;
    cfg.seed = 23;
    auto data = make_synthetic(cfg);
    auto idx = build_inverted(data.docs, 100000);
    for (const auto& list : idx.postings) {
        if (!list.empty()) {
            CHECK(list.blocks.size() == 1);
        }
    }
}

TEST_CASE("forward index preserves exact weights") {
    auto c = single_doc({{0, 2.5}});
    auto fwd = build_forward(c);
    CHECK(fwd.vector(0) == c.docs[0].vector);
    CHECK_THROWS_AS(fwd.vector(5), InputError);

    Collection with_empty;
    with_empty.lexicon.insert("a");
    with_empty.docs.push_back({"d0", SparseVector{{{0, 1.0}}}});
    with_empty.docs.push_back({"d1", SparseVector{}});
    auto fwd2 = build_forward(with_empty);
    CHECK(fwd2.vector(1).empty());
}

TEST_CASE("indexing rejects empty input") {
    CHECK_THROWS_AS(build_inverted(Collection{}), InputError);
    Collection all_empty;
    all_empty.docs.push_back({"d0", SparseVector{}});
    CHECK_THROWS_AS(build_inverted(all_empty), InputError);
}

TEST_CASE("pruned index postings are subsets of the full index") {
    SynthConfig cfg;
    cfg.num_docs = 200;
    cfg.vocab = 120;
    cfg.seed = 29;
    auto data = make_synthetic(cfg);
    PruneConfig pcfg;
    pcfg.strategy = PruneStrategy::DocTopK;
    pcfg.size_k = 8;
    auto pruned = prune_collection(data.docs, pcfg);

    auto full = build_inverted(data.docs);
    auto approx = build_inverted(pruned.collection);
    REQUIRE(approx.postings.size() <= full.postings.size());
    for (TermId t = 0; t < approx.postings.size(); ++t) {
        const auto& small = approx.postings[t];
        const auto& big = full.postings[t];
        for (DocId d : small.docs) {
            CHECK(std::binary_search(big.docs.begin(), big.docs.end(), d));
        }
    }
}

TEST_CASE("save and load round trip is deep-equal") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        SynthConfig cfg;
        cfg.num_docs = 20 + uniform_index(rng, 150);
        cfg.vocab = 30 + uniform_index(rng, 100);
        cfg.seed = rng();
        auto data = make_synthetic(cfg);
        auto inv = build_inverted(data.docs, 1 + uniform_index(rng, 100));
        auto fwd = build_forward(data.docs);

        TempDir tmp("index");
        save_index(inv, fwd, tmp.path());
        auto loaded = load_index(tmp.path());
        CHECK(loaded.inverted == inv);
        CHECK(loaded.forward == fwd);
    }
}

TEST_CASE("save is byte-deterministic") {
    SynthConfig cfg;
    cfg.num_docs = 80;
    cfg.vocab = 60;
    cfg.seed = 37;
    auto data = make_synthetic(cfg);
    auto inv = build_inverted(data.docs);
    auto fwd = build_forward(data.docs);

    TempDir a("idxa"), b("idxb");
    save_index(inv, fwd, a.path());
    save_index(inv, fwd, b.path());
    for (const char* name : {"meta.json", "lexicon.bin", "postings.bin", "blockmax.bin",
                             "forward.bin", "docids.txt"}) {
        std::ifstream fa(a.file(name), std::ios::binary);
        std::ifstream fb(b.file(name), std::ios::binary);
        std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
        CHECK(sa == sb);
    }
}

TEST_CASE("corruption and version mismatches raise distinct errors") {
    SynthConfig cfg;
    cfg.num_docs = 40;
    cfg.vocab = 40;
    cfg.seed = 41;
    auto data = make_synthetic(cfg);
    auto inv = build_inverted(data.docs);
    auto fwd = build_forward(data.docs);

    {
        TempDir tmp("corrupt");
        save_index(inv, fwd, tmp.path());
        auto path = tmp.file("postings.bin");
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(10);
        char byte;
        f.seekg(10);
        f.read(&byte, 1);
        byte = static_cast<char>(byte ^ 0x5a);
        f.seekp(10);
        f.write(&byte, 1);
        f.close();
        CHECK_THROWS_AS(load_index(tmp.path()), IndexChecksumError);
    }
    {
        TempDir tmp("truncated");
        save_index(inv, fwd, tmp.path());
        auto path = tmp.file("forward.bin");
        std::filesystem::resize_file(path, 4);
        CHECK_THROWS_AS(load_index(tmp.path()), IndexTruncatedError);
    }
    {
        TempDir tmp("version");
        save_index(inv, fwd, tmp.path());
        std::ofstream meta(tmp.file("meta.json"));
        meta << R"({"format_version": 99, "num_docs": 1, "quant_scale": 1.0, )"
             << R"("quant_bits": 8, "block_size": 64, "vocab_size": 1})";
        meta.close();
        CHECK_THROWS_AS(load_index(tmp.path()), IndexVersionError);
    }
}

TEST_CASE("size report sections sum to the directory total") {
    SynthConfig cfg;
    cfg.num_docs = 120;
    cfg.vocab = 90;
    cfg.seed = 43;
    auto data = make_synthetic(cfg);
    auto inv = build_inverted(data.docs);
    auto fwd = build_forward(data.docs);

    TempDir tmp("sizes");
    save_index(inv, fwd, tmp.path());
    auto report = index_size_report(tmp.path());
    std::uint64_t total = 0;
    for (const auto& entry : std::filesystem::directory_iterator(tmp.path())) {
        total += std::filesystem::file_size(entry.path());
    }
    CHECK(report.total_bytes() == total);

    // pruning shrinks every binary section
    PruneConfig pcfg;
    pcfg.strategy = PruneStrategy::DocTopK;
    pcfg.size_k = 4;
    auto pruned = prune_collection(data.docs, pcfg);
    auto pinv = build_inverted(pruned.collection);
    auto pfwd = build_forward(pruned.collection);
    TempDir ptmp("pruned");
    save_index(pinv, pfwd, ptmp.path());
    auto preport = index_size_report(ptmp.path());
    CHECK(preport.postings_bytes <= report.postings_bytes);
    CHECK(preport.forward_bytes <= report.forward_bytes);
    CHECK(preport.total_bytes() <= report.total_bytes());
}

TEST_CASE("varint round trip") {
    std::vector<std::uint64_t> values{0, 1, 127, 128, 300, 16383, 16384,
                                      1ull << 40, ~0ull};
    std::vector<std::uint8_t> buf;
    for (auto v : values) {
        append_varint(buf, v);
    }
    std::size_t pos = 0;
    for (auto v : values) {
        CHECK(read_varint(buf, pos) == v);
    }
    CHECK(pos == buf.size());
}
