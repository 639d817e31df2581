#include "twostep/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_set>

namespace twostep {

namespace {

constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile

void finish(MetricResult& r) {
    if (r.per_query.empty()) {
        return;
    }
    double sum = 0.0;
    for (double v : r.per_query) {
        sum += v;
    }
    auto n = static_cast<double>(r.per_query.size());
    r.value = sum / n;
    r.evaluated = r.per_query.size();
    double var = 0.0;
    if (r.per_query.size() > 1) {
        for (double v : r.per_query) {
            var += (v - r.value) * (v - r.value);
        }
        var /= n - 1.0;
    }
    double half = kZ99 * std::sqrt(var / n);
    r.ci_low = r.value - half;
    r.ci_high = r.value + half;
}

// qid -> (docid -> grade), in qrels order
std::map<std::string, std::map<std::string, int>> by_query(const Qrels& qrels) {
    std::map<std::string, std::map<std::string, int>> grouped;
    for (const auto& [key, grade] : qrels.judgments) {
        grouped[key.first][key.second] = grade;
    }
    return grouped;
}

double log2_discount(std::size_t rank) {
    return std::log2(static_cast<double>(rank) + 1.0);
}

}  // namespace

const std::vector<RunEntry>& RunFile::ranking(const std::string& qid) const {
    auto it = results.find(qid);
    if (it == results.end()) {
        throw InputError("query not present in run: " + qid);
    }
    return it->second;
}

void RunFile::add(const std::string& qid, std::vector<RunEntry> entries) {
    if (results.count(qid) > 0) {
        throw InputError("duplicate query in run: " + qid);
    }
    qids.push_back(qid);
    results[qid] = std::move(entries);
}

RunFile load_run(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open run file: " + path);
    }
    RunFile run;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        std::string qid, q0, doc, tag;
        long rank;
        double score;
        if (!(fields >> qid >> q0 >> doc >> rank >> score >> tag)) {
            throw ParseError(path, lineno, "malformed run line");
        }
        auto [it, fresh] = run.results.try_emplace(qid);
        if (fresh) {
            run.qids.push_back(qid);
        }
        auto& ranking = it->second;
        if (std::any_of(ranking.begin(), ranking.end(),
                        [&](const RunEntry& e) { return e.doc == doc; })) {
            throw ParseError(path, lineno, "duplicate docid for query " + qid);
        }
        ranking.push_back({doc, score});
    }
    return run;
}

void save_run(const RunFile& run, const std::string& path, const std::string& tag) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write run file: " + path);
    }
    out << std::fixed << std::setprecision(6);
    for (const auto& qid : run.qids) {
        const auto& ranking = run.results.at(qid);
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            out << qid << " Q0 " << ranking[i].doc << ' ' << i + 1 << ' ' << ranking[i].score
                << ' ' << tag << '\n';
        }
    }
}

MetricResult ndcg_at(const RunFile& run, const Qrels& qrels, std::size_t cutoff) {
    MetricResult r;
    auto judged = by_query(qrels);
    for (const auto& qid : run.qids) {
        if (judged.find(qid) == judged.end()) {
            ++r.skipped;
        }
    }
    for (const auto& [qid, grades] : judged) {
        double dcg = 0.0;
        auto it = run.results.find(qid);
        if (it != run.results.end()) {
            const auto& ranking = it->second;
            for (std::size_t i = 0; i < std::min(cutoff, ranking.size()); ++i) {
                auto g = grades.find(ranking[i].doc);
                if (g != grades.end() && g->second > 0) {
                    dcg += static_cast<double>(g->second) / log2_discount(i + 1);
                }
            }
        }
        std::vector<int> ideal;
        for (const auto& [doc, grade] : grades) {
            if (grade > 0) {
                ideal.push_back(grade);
            }
        }
        std::sort(ideal.rbegin(), ideal.rend());
        double idcg = 0.0;
        for (std::size_t i = 0; i < std::min(cutoff, ideal.size()); ++i) {
            idcg += static_cast<double>(ideal[i]) / log2_discount(i + 1);
        }
        r.qids.push_back(qid);
        r.per_query.push_back(idcg > 0.0 ? dcg / idcg : 0.0);
    }
    finish(r);
    return r;
}

MetricResult mrr_at(const RunFile& run, const Qrels& qrels, std::size_t cutoff) {
    MetricResult r;
    auto judged = by_query(qrels);
    for (const auto& qid : run.qids) {
        if (judged.find(qid) == judged.end()) {
            ++r.skipped;
        }
    }
    for (const auto& [qid, grades] : judged) {
        double rr = 0.0;
        auto it = run.results.find(qid);
        if (it != run.results.end()) {
            const auto& ranking = it->second;
            for (std::size_t i = 0; i < std::min(cutoff, ranking.size()); ++i) {
                auto g = grades.find(ranking[i].doc);
                if (g != grades.end() && g->second >= 1) {
                    rr = 1.0 / static_cast<double>(i + 1);
                    break;
                }
            }
        }
        r.qids.push_back(qid);
        r.per_query.push_back(rr);
    }
    finish(r);
    return r;
}

MetricResult success_at(const RunFile& run, const Qrels& qrels, std::size_t cutoff) {
    MetricResult r;
    auto judged = by_query(qrels);
    for (const auto& qid : run.qids) {
        if (judged.find(qid) == judged.end()) {
            ++r.skipped;
        }
    }
    for (const auto& [qid, grades] : judged) {
        double hit = 0.0;
        auto it = run.results.find(qid);
        if (it != run.results.end()) {
            const auto& ranking = it->second;
            for (std::size_t i = 0; i < std::min(cutoff, ranking.size()); ++i) {
                auto g = grades.find(ranking[i].doc);
                if (g != grades.end() && g->second >= 1) {
                    hit = 1.0;
                    break;
                }
            }
        }
        r.qids.push_back(qid);
        r.per_query.push_back(hit);
    }
    finish(r);
    return r;
}

MetricResult intersection_at(const RunFile& reference, const RunFile& candidate,
                             std::size_t ref_depth, std::size_t cand_depth) {
    std::vector<std::string> missing;
    for (const auto& qid : reference.qids) {
        if (candidate.results.find(qid) == candidate.results.end()) {
            missing.push_back(qid);
        }
    }
    for (const auto& qid : candidate.qids) {
        if (reference.results.find(qid) == reference.results.end()) {
            missing.push_back(qid);
        }
    }
    if (!missing.empty()) {
        std::string joined;
        for (const auto& qid : missing) {
            joined += (joined.empty() ? "" : ", ") + qid;
        }
        throw InputError("runs cover different query sets; missing: " + joined);
    }

    MetricResult r;
    for (const auto& qid : reference.qids) {
        const auto& ref = reference.results.at(qid);
        const auto& cand = candidate.results.at(qid);
        std::unordered_set<std::string> cand_top;
        for (std::size_t i = 0; i < std::min(cand_depth, cand.size()); ++i) {
            cand_top.insert(cand[i].doc);
        }
        std::size_t depth = std::min(ref_depth, ref.size());
        std::size_t overlap = 0;
        for (std::size_t i = 0; i < depth; ++i) {
            overlap += cand_top.count(ref[i].doc);
        }
        r.qids.push_back(qid);
        r.per_query.push_back(depth == 0
                                  ? 0.0
                                  : 100.0 * static_cast<double>(overlap) /
                                        static_cast<double>(depth));
    }
    finish(r);
    return r;
}

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= 1.0) {
        return 1.0;
    }
    // continued fraction converges fastest for x < (a+1)/(a+b+2)
    if (x > (a + 1.0) / (a + b + 2.0)) {
        return 1.0 - incomplete_beta(b, a, 1.0 - x);
    }
    double log_front = a * std::log(x) + b * std::log(1.0 - x) -
                       (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    double front = std::exp(log_front) / a;

    // Lentz's algorithm
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-10;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::abs(d) < kTiny) {
        d = kTiny;
    }
    d = 1.0 / d;
    double f = d;
    for (int m = 1; m <= 400; ++m) {
        double dm = static_cast<double>(m);
        // even step
        double numerator = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
        d = 1.0 + numerator * d;
        if (std::abs(d) < kTiny) {
            d = kTiny;
        }
        d = 1.0 / d;
        c = 1.0 + numerator / c;
        if (std::abs(c) < kTiny) {
            c = kTiny;
        }
        f *= c * d;
        // odd step
        numerator = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
        d = 1.0 + numerator * d;
        if (std::abs(d) < kTiny) {
            d = kTiny;
        }
        d = 1.0 / d;
        c = 1.0 + numerator / c;
        if (std::abs(c) < kTiny) {
            c = kTiny;
        }
        double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < kEps) {
            break;
        }
    }
    return front * f;
}

double student_t_two_sided_p(double t, double dof) {
    if (std::isinf(t)) {
        return 0.0;
    }
    double x = dof / (dof + t * t);
    return incomplete_beta(dof / 2.0, 0.5, x);
}

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b,
                         double alpha) {
    if (a.size() != b.size()) {
        throw InputError("paired t-test requires equal-length samples");
    }
    if (a.size() < 2) {
        throw InputError("paired t-test requires n >= 2");
    }
    auto n = static_cast<double>(a.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean += a[i] - b[i];
    }
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i] - mean;
        var += d * d;
    }
    var /= n - 1.0;

    TTestResult r;
    r.mean_delta = mean;
    if (var == 0.0) {
        if (mean == 0.0) {
            r.t_statistic = 0.0;
            r.p_value = 1.0;
            r.verdict = Verdict::Indistinguishable;
        } else {
            // degenerate: identical nonzero shift everywhere
            r.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), mean);
            r.p_value = 0.0;
            r.verdict = mean > 0.0 ? Verdict::Better : Verdict::Worse;
        }
        return r;
    }
    r.t_statistic = mean / std::sqrt(var / n);
    r.p_value = student_t_two_sided_p(r.t_statistic, n - 1.0);
    if (r.p_value <= alpha && mean != 0.0) {
        r.verdict = mean > 0.0 ? Verdict::Better : Verdict::Worse;
    } else {
        r.verdict = Verdict::Indistinguishable;
    }
    return r;
}

EffectSizeCounts count_effects(const std::vector<SignificanceEntry>& entries) {
    EffectSizeCounts counts;
    for (const auto& e : entries) {
        switch (e.test.verdict) {
            case Verdict::Better:
                ++counts.better;
                ++counts.not_worse;
                break;
            case Verdict::Indistinguishable:
                ++counts.not_worse;
                break;
            case Verdict::Worse:
                ++counts.worse;
                break;
        }
    }
    return counts;
}

}  // namespace twostep
