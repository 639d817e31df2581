#include <doctest.h>

#include <cmath>
#include <random>

#include "twostep/scoring.hpp"
#include "twostep/synthetic.hpp"

using namespace twostep;

TEST_CASE("score_dot examples") {
    CHECK(score_dot(SparseVector{{{0, 2.0}}}, SparseVector{{{0, 3.0}, {1, 7.0}}}) == 6.0);
    CHECK(score_dot(SparseVector{{{0, 2.0}}}, SparseVector{{{5, 3.0}}}) == 0.0);
    CHECK(score_dot(SparseVector{{{0, 1.5}, {1, 2.0}}}, SparseVector{{{0, 4.0}, {1, 0.5}}}) ==
          doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("score_saturated limits and the k1=10 value") {
    SparseVector q{{{0, 2.0}}};
    SparseVector d{{{0, 3.0}}};
    CHECK(score_saturated(q, d, SaturationParams::infinite()) == 6.0);
    CHECK(score_saturated(q, d, SaturationParams{0.0}) == 2.0);

    SparseVector q2{{{0, 1.5}}};
    SparseVector d2{{{0, 4.0}}};
    // 1.5 * (11*4)/(4+10)
    CHECK(score_saturated(q2, d2, SaturationParams{10.0}) ==
          doctest::Approx(4.714285714285714).epsilon(1e-12));
}

TEST_CASE("saturated identities against dot and constant scoring") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 500; ++trial) {
        SparseVector q, d;
        for (TermId t = 0; t < 12; ++t) {
            if (uniform01(rng) < 0.6) {
                q.entries.push_back({t, 0.1 + 5.0 * uniform01(rng)});
            }
            if (uniform01(rng) < 0.6) {
                d.entries.push_back({t, 0.1 + 5.0 * uniform01(rng)});
            }
        }
        double viaInf = score_saturated(q, d, SaturationParams::infinite());
        CHECK(std::abs(viaInf - score_dot(q, d)) <= 1e-12);

        double matched_weights = 0.0;
        for (const auto& qe : q.entries) {
            for (const auto& de : d.entries) {
                if (de.term == qe.term) {
                    matched_weights += qe.weight;
                }
            }
        }
        CHECK(std::abs(score_saturated(q, d, SaturationParams{0.0}) - matched_weights) <=
              1e-12);
    }
}

TEST_CASE("saturation is bounded by min(tf, k1+1) and monotone in k1") {
    // (k1+1)tf/(tf+k1) <= tf needs tf >= 1: term frequencies are zero or at
    // least one, so sample that domain (tf in (0,1) breaks the tf side)
    std::mt19937_64 rng(103);
    for (int trial = 0; trial < 20000; ++trial) {
        double tf = trial % 50 == 0 ? 0.0 : 1.0 + 99.0 * uniform01(rng);
        double k1 = 1000.0 * uniform01(rng) + 1e-6;
        double s = saturate(tf, k1);
        CHECK(s <= std::min(tf, k1 + 1.0) * (1.0 + 1e-12));

        // the k1+1 side needs no tf restriction
        double small_tf = uniform01(rng);
        CHECK(saturate(small_tf, k1) <= (k1 + 1.0) * (1.0 + 1e-12));

        // scores grow with k1 once tf >= 1
        double larger = saturate(tf, k1 * 1.5 + 0.1);
        if (tf >= 1.0) {
            CHECK(larger >= s - 1e-12);
        }
    }
}

TEST_CASE("saturated ranking converges to dot ranking as k1 grows") {
    std::mt19937_64 rng(107);
    for (int trial = 0; trial < 100; ++trial) {
        SparseVector q;
        for (TermId t = 0; t < 6; ++t) {
            q.entries.push_back({t, 0.5 + 3.0 * uniform01(rng)});
        }
        std::vector<SparseVector> docs(30);
        for (auto& d : docs) {
            for (TermId t = 0; t < 6; ++t) {
                if (uniform01(rng) < 0.7) {
                    d.entries.push_back({t, 0.25 + 4.0 * uniform01(rng)});
                }
            }
        }
        auto argmax = [&](const SaturationParams& p) {
            std::size_t best = 0;
            double best_score = -1.0;
            for (std::size_t i = 0; i < docs.size(); ++i) {
                double s = score_saturated(q, docs[i], p);
                if (s > best_score) {
                    best_score = s;
                    best = i;
                }
            }
            return best;
        };
        CHECK(argmax(SaturationParams{1e8}) == argmax(SaturationParams::infinite()));
    }
}

TEST_CASE("bm25 hand-checked contribution") {
    // two docs of length 2; term a appears once with weight 2, max weight 255
    // keeps quantization exact
    Collection c;
    c.lexicon.insert("a");
    c.lexicon.insert("b");
    c.lexicon.insert("c");
    c.docs.push_back({"d0", SparseVector{{{0, 2.0}, {1, 255.0}}}});
    c.docs.push_back({"d1", SparseVector{{{1, 1.0}, {2, 1.0}}}});
    auto idx = build_inverted(c);
    REQUIRE(idx.quant_scale == 1.0);
    REQUIRE(idx.postings[0].impacts[0] == 2);

    auto params = Bm25Params::from_index(idx);
    REQUIRE(params.avg_doc_len == 2.0);

    SparseVector qa{{{0, 1.0}}};
    double expected = std::log(2.0) * (2.0 * 1.9) / (2.0 + 0.9);
    CHECK(score_bm25(qa, 0, idx, params) == doctest::Approx(expected).epsilon(1e-12));

    // absent term contributes nothing
    SparseVector qc{{{2, 1.0}}};
    CHECK(score_bm25(qc, 0, idx, params) == 0.0);

    // a term in every document keeps a small positive idf
    double idf_everywhere = bm25_idf(2, 2);
    CHECK(idf_everywhere > 0.0);
    CHECK(idf_everywhere < std::log(2.0));
}

TEST_CASE("scorers are pure") {
    SparseVector q{{{0, 1.25}, {3, 0.75}}};
    SparseVector d{{{0, 2.0}, {3, 4.0}}};
    SaturationParams p{37.5};
    CHECK(score_saturated(q, d, p) == score_saturated(q, d, p));
    CHECK(score_dot(q, d) == score_dot(q, d));
}
