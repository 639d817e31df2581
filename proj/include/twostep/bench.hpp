#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "twostep/retrieval.hpp"
#include "twostep/sparse_vector.hpp"

namespace twostep {

struct LatencyReport {
    double avg_ms = 0.0;
    double p99_ms = 0.0;                // ceil(0.99*n)-th order statistic
    std::vector<double> per_query_ms;   // mean over repetitions, query order
    std::uint64_t postings_touched = 0;
    std::uint64_t docs_fully_scored = 0;
    double norm_vs_baseline = 1.0;
};

using QueryEngine = std::function<ScoredList(const SparseVector&)>;

// Times `engine` per query after `warmup` untimed passes over the whole
// stream; each query's latency is the mean of `repetitions` timed runs.
// Counters are summed over one pass and are timing-independent.
LatencyReport run_bench(const QueryEngine& engine, const std::vector<SparseVector>& queries,
                        std::size_t warmup = 2, std::size_t repetitions = 5);

struct SweepRow {
    std::string config;
    std::string algorithm;
    std::string k1;           // "inf" for the unsaturated limit
    std::string doc_prune;    // "full" when unpruned
    std::string query_prune;
    LatencyReport report;
};

// Fills norm_vs_baseline in place from the named baseline row (1.0 when
// absent or empty).
void normalize_rows(std::vector<SweepRow>& rows, const std::string& baseline_config);

// Tidy CSV: config,algorithm,k1,doc_prune,query_prune,avg_ms,p99_ms,
// postings_touched,docs_fully_scored,norm_vs_baseline. With
// counters_only, wall-clock columns are written as 0 so the output is
// byte-deterministic.
std::string sweep_csv(const std::vector<SweepRow>& rows, bool counters_only = false);

}  // namespace twostep
