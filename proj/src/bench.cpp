#include "twostep/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace twostep {

LatencyReport run_bench(const QueryEngine& engine, const std::vector<SparseVector>& queries,
                        std::size_t warmup, std::size_t repetitions) {
    if (queries.empty()) {
        throw InputError("benchmark requires at least one query");
    }
    if (repetitions == 0) {
        throw InputError("benchmark requires at least one repetition");
    }

    LatencyReport report;
    for (std::size_t pass = 0; pass < warmup; ++pass) {
        for (const auto& q : queries) {
            (void)engine(q);
        }
    }
    // one counted pass; counters do not depend on timing
    for (const auto& q : queries) {
        auto result = engine(q);
        report.postings_touched += result.counters.postings_touched;
        report.docs_fully_scored += result.counters.docs_fully_scored;
    }

    report.per_query_ms.reserve(queries.size());
    for (const auto& q : queries) {
        double total = 0.0;
        for (std::size_t rep = 0; rep < repetitions; ++rep) {
            auto start = std::chrono::steady_clock::now();
            (void)engine(q);
            auto stop = std::chrono::steady_clock::now();
            total += std::chrono::duration<double, std::milli>(stop - start).count();
        }
        report.per_query_ms.push_back(total / static_cast<double>(repetitions));
    }

    double sum = 0.0;
    for (double v : report.per_query_ms) {
        sum += v;
    }
    report.avg_ms = sum / static_cast<double>(report.per_query_ms.size());

    std::vector<double> sorted = report.per_query_ms;
    std::sort(sorted.begin(), sorted.end());
    auto rank = static_cast<std::size_t>(
        std::ceil(0.99 * static_cast<double>(sorted.size())));
    rank = std::max<std::size_t>(1, std::min(rank, sorted.size()));
    report.p99_ms = sorted[rank - 1];
    return report;
}

void normalize_rows(std::vector<SweepRow>& rows, const std::string& baseline_config) {
    double baseline = 0.0;
    for (const auto& row : rows) {
        if (!baseline_config.empty() && row.config == baseline_config) {
            baseline = row.report.avg_ms;
            break;
        }
    }
    for (auto& row : rows) {
        row.report.norm_vs_baseline = baseline > 0.0 ? row.report.avg_ms / baseline : 1.0;
    }
}

std::string sweep_csv(const std::vector<SweepRow>& rows, bool counters_only) {
    std::ostringstream out;
    out << "config,algorithm,k1,doc_prune,query_prune,avg_ms,p99_ms,postings_touched,"
           "docs_fully_scored,norm_vs_baseline\n";
    for (const auto& row : rows) {
        out << row.config << ',' << row.algorithm << ',' << row.k1 << ',' << row.doc_prune
            << ',' << row.query_prune << ',';
        if (counters_only) {
            out << "0,0,";
        } else {
            out << row.report.avg_ms << ',' << row.report.p99_ms << ',';
        }
        out << row.report.postings_touched << ',' << row.report.docs_fully_scored << ',';
        if (counters_only) {
            out << "0\n";
        } else {
            out << row.report.norm_vs_baseline << '\n';
        }
    }
    return out.str();
}

}  // namespace twostep
