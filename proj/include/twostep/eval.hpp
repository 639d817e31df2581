#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "twostep/collection.hpp"

namespace twostep {

struct RunEntry {
    std::string doc;
    double score;
};

// One TREC run: per query, a ranked result list. Query order is preserved
// from the source (file or search order) so outputs stay deterministic.
struct RunFile {
    std::vector<std::string> qids;
    std::unordered_map<std::string, std::vector<RunEntry>> results;

    const std::vector<RunEntry>& ranking(const std::string& qid) const;
    void add(const std::string& qid, std::vector<RunEntry> entries);
};

// `qid Q0 docid rank score tag` lines; ranks are rewritten contiguously
// from 1 on save, scores with six decimals.
RunFile load_run(const std::string& path);
void save_run(const RunFile& run, const std::string& path, const std::string& tag);

// Mean of a per-query metric with a .99 normal-approximation confidence
// interval over the per-query values.
struct MetricResult {
    double value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t evaluated = 0;  // queries contributing to the mean
    std::size_t skipped = 0;    // run queries without any judgment
    std::vector<std::string> qids;      // evaluated query ids
    std::vector<double> per_query;      // aligned with qids
};

// Metrics evaluate every judged query; judged queries missing from the run
// score 0, run queries without judgments are skipped and counted.
MetricResult ndcg_at(const RunFile& run, const Qrels& qrels, std::size_t cutoff = 10);
MetricResult mrr_at(const RunFile& run, const Qrels& qrels, std::size_t cutoff = 10);
MetricResult success_at(const RunFile& run, const Qrels& qrels, std::size_t cutoff = 5);

// Mean over queries of 100 * |top-ref_depth(reference) ∩ top-cand_depth
// (candidate)| / ref_depth, with the same .99 confidence interval.
MetricResult intersection_at(const RunFile& reference, const RunFile& candidate,
                             std::size_t ref_depth = 10, std::size_t cand_depth = 100);

enum class Verdict { Better, Worse, Indistinguishable };

struct TTestResult {
    double mean_delta = 0.0;
    double t_statistic = 0.0;
    double p_value = 1.0;
    Verdict verdict = Verdict::Indistinguishable;
};

// Two-sided paired Student t-test on a-b deltas, p from the t distribution
// with n-1 dof. All-zero deltas are indistinguishable; zero variance with a
// nonzero mean reports p = 0 and the verdict from the mean's sign.
TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b,
                         double alpha = 0.01);

struct SignificanceEntry {
    std::string dataset;
    TTestResult test;
};

// The >= / > / < dataset counts of an effect-size table row.
struct EffectSizeCounts {
    std::size_t not_worse = 0;
    std::size_t better = 0;
    std::size_t worse = 0;
};

EffectSizeCounts count_effects(const std::vector<SignificanceEntry>& entries);

// Regularized incomplete beta I_x(a,b) by Lentz continued fraction,
// converged to 1e-10. Backs the t distribution CDF.
double incomplete_beta(double a, double b, double x);

double student_t_two_sided_p(double t, double dof);

}  // namespace twostep
