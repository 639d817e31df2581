#include <doctest.h>

#include <fstream>
#include <map>
#include <random>

#include "support/temp_dir.hpp"
#include "twostep/collection.hpp"
#include "twostep/synthetic.hpp"

using namespace twostep;

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("load_vectors parses json lines") {
    TempDir tmp("vectors");
    write_file(tmp.file("docs.jsonl"), R"({"id":"d1","vector":{"cat":2.5,"dog":1.0}})"
                                       "\n");
    auto c = load_vectors(tmp.file("docs.jsonl").string());
    REQUIRE(c.size() == 1);
    CHECK(c.docs[0].id == "d1");
    REQUIRE(c.docs[0].vector.nnz() == 2);
    CHECK(c.docs[0].vector.entries[0].weight == 2.5);
    CHECK(c.docs[0].vector.entries[1].weight == 1.0);
    CHECK(c.lexicon.size() == 2);
}

TEST_CASE("load_vectors drops zero weights") {
    TempDir tmp("vectors");
    write_file(tmp.file("docs.jsonl"), R"({"id":"d1","vector":{"cat":0.0,"dog":1.5}})"
                                       "\n");
    auto c = load_vectors(tmp.file("docs.jsonl").string());
    REQUIRE(c.docs[0].vector.nnz() == 1);
    CHECK(c.lexicon.term_of(c.docs[0].vector.entries[0].term) == "dog");
}

TEST_CASE("load_vectors rejects duplicates, negatives and junk") {
    TempDir tmp("vectors");
    write_file(tmp.file("dup.jsonl"), R"({"id":"d1","vector":{"a":1.0}})"
                                      "\n"
                                      R"({"id":"d1","vector":{"b":1.0}})"
                                      "\n");
    CHECK_THROWS_AS(load_vectors(tmp.file("dup.jsonl").string()), InputError);

    write_file(tmp.file("neg.jsonl"), R"({"id":"d1","vector":{"a":-1.0}})"
                                      "\n");
    CHECK_THROWS_AS(load_vectors(tmp.file("neg.jsonl").string()), InputError);

    write_file(tmp.file("bad.jsonl"), "{not json\n");
    CHECK_THROWS_WITH_AS(load_vectors(tmp.file("bad.jsonl").string()),
                         doctest::Contains(":1:"), ParseError);

    CHECK_THROWS_AS(load_vectors(tmp.file("absent.jsonl").string()), IoError);
}

TEST_CASE("query loading against a corpus lexicon flags unknown terms") {
    TempDir tmp("vectors");
    write_file(tmp.file("docs.jsonl"), R"({"id":"d1","vector":{"cat":1.0,"dog":2.0}})"
                                       "\n");
    write_file(tmp.file("queries.jsonl"), R"({"id":"q1","vector":{"dog":1.0,"yak":3.0}})"
                                          "\n");
    auto docs = load_vectors(tmp.file("docs.jsonl").string());
    auto queries = load_vectors(tmp.file("queries.jsonl").string(), &docs.lexicon);
    CHECK(queries.unknown_terms == 1);
    REQUIRE(queries.docs[0].vector.nnz() == 2);
    // the unknown term sits past the corpus vocabulary
    CHECK(queries.docs[0].vector.entries[1].term >= docs.lexicon.size());
    CHECK(queries.docs[0].vector.entries[0].term == docs.lexicon.id_of("dog"));
}

TEST_CASE("vector file round trip preserves ids and entries") {
    TempDir tmp("roundtrip");
    SynthConfig cfg;
    cfg.num_docs = 40;
    cfg.vocab = 60;
    cfg.seed = 7;
    auto data = make_synthetic(cfg);
    save_vectors(data.docs, tmp.file("out.jsonl").string());
    auto reloaded = load_vectors(tmp.file("out.jsonl").string());
    REQUIRE(reloaded.size() == data.docs.size());
    // term ids may be renumbered; the (term string -> weight) maps must match
    auto as_map = [](const Document& doc, const Lexicon& lex) {
        std::map<std::string, double> m;
        for (const auto& e : doc.vector.entries) {
            m[lex.term_of(e.term)] = e.weight;
        }
        return m;
    };
    for (std::size_t i = 0; i < reloaded.size(); ++i) {
        CHECK(reloaded.docs[i].id == data.docs.docs[i].id);
        CHECK(as_map(reloaded.docs[i], reloaded.lexicon) ==
              as_map(data.docs.docs[i], data.docs.lexicon));  // exact double round trip
    }
}

TEST_CASE("compute_stats means and maxima") {
    Collection c;
    c.lexicon.insert("a");
    c.docs.push_back({"d1", SparseVector{{{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}}}});
    c.docs.push_back({"d2", SparseVector{{{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}, {4, 1.0},
                                          {5, 1.0}}}});
    auto stats = compute_stats(c);
    CHECK(stats.avg_doc_terms == 5.0);
    CHECK(stats.max_doc_terms == 6);
    CHECK(stats.num_docs == 2);

    Collection uniform;
    for (int d = 0; d < 3; ++d) {
        uniform.docs.push_back(
            {"u" + std::to_string(d), SparseVector{{{0, 1.0}, {1, 1.0}, {2, 1.0}}}});
    }
    auto ustats = compute_stats(uniform);
    CHECK(ustats.avg_doc_terms == 3.0);
    CHECK(ustats.max_doc_terms == 3);

    CHECK_THROWS_AS(compute_stats(Collection{}), InputError);
}

TEST_CASE("compute_stats matches msmarco-style single doc average") {
    Collection c;
    SparseVector v;
    for (TermId t = 0; t < 50; ++t) {
        v.entries.push_back({t, 1.0});
    }
    c.docs.push_back({"d1", v});
    CHECK(compute_stats(c).avg_doc_terms == 50.0);
}

TEST_CASE("stats mean equals entry-count mean on random collections") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        SynthConfig cfg;
        cfg.num_docs = 1 + uniform_index(rng, 200);
        cfg.vocab = 50 + uniform_index(rng, 200);
        cfg.seed = rng();
        auto data = make_synthetic(cfg);
        std::size_t total = 0;
        for (const auto& d : data.docs.docs) {
            total += d.vector.nnz();
        }
        auto stats = compute_stats(data.docs);
        CHECK(stats.avg_doc_terms ==
              doctest::Approx(static_cast<double>(total) / cfg.num_docs).epsilon(1e-9));
    }
}

TEST_CASE("load_qrels follows trec conventions") {
    TempDir tmp("qrels");
    write_file(tmp.file("qrels.txt"), "q1 0 d3 2\nq1 0 d4 0\nq2 0 d1 1\n");
    auto qrels = load_qrels(tmp.file("qrels.txt").string());
    CHECK(qrels.grade("q1", "d3") == 2);
    CHECK(qrels.grade("q1", "d4") == 0);
    CHECK(qrels.grade("q2", "d1") == 1);
    CHECK(qrels.grade("q9", "d1") == 0);

    write_file(tmp.file("dup.txt"), "q1 0 d3 1\nq1 0 d3 2\n");
    CHECK(load_qrels(tmp.file("dup.txt").string()).grade("q1", "d3") == 2);

    write_file(tmp.file("neg.txt"), "q1 0 d3 -1\n");
    CHECK_THROWS_AS(load_qrels(tmp.file("neg.txt").string()), ParseError);

    write_file(tmp.file("bad.txt"), "q1 0\n");
    CHECK_THROWS_AS(load_qrels(tmp.file("bad.txt").string()), ParseError);
}
