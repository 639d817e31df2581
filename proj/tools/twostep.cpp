#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "twostep/bench.hpp"
#include "twostep/collection.hpp"
#include "twostep/eval.hpp"
#include "twostep/index_io.hpp"
#include "twostep/pipeline.hpp"
#include "twostep/pruning.hpp"
#include "twostep/retrieval.hpp"
#include "twostep/synthetic.hpp"

using namespace twostep;

namespace {

double parse_k1(const std::string& text) {
    if (text == "inf" || text == "INF" || text == "infinity") {
        return std::numeric_limits<double>::infinity();
    }
    double value = std::stod(text);
    if (value < 0.0) {
        throw InputError("k1 must be non-negative or 'inf'");
    }
    return value;
}

std::string k1_label(double k1) {
    if (std::isinf(k1)) {
        return "inf";
    }
    std::ostringstream out;
    out << k1;
    return out.str();
}

Algorithm algorithm_from(const std::string& name) {
    if (name == "exhaustive") {
        return Algorithm::Exhaustive;
    }
    if (name == "maxscore") {
        return Algorithm::MaxScore;
    }
    if (name == "wand") {
        return Algorithm::Wand;
    }
    if (name == "bmw") {
        return Algorithm::BlockMaxWand;
    }
    throw InputError("unknown algorithm: " + name +
                     " (expected exhaustive|maxscore|wand|bmw)");
}

ScorerKind scorer_from(const std::string& name) {
    if (name == "dot") {
        return ScorerKind::Dot;
    }
    if (name == "saturated") {
        return ScorerKind::Saturated;
    }
    if (name == "bm25") {
        return ScorerKind::Bm25;
    }
    throw InputError("unknown scorer: " + name + " (expected dot|saturated|bm25)");
}

RescoreMode rescore_mode_from(const std::string& name) {
    if (name == "forward") {
        return RescoreMode::Forward;
    }
    if (name == "inverted") {
        return RescoreMode::InvertedNextGeq;
    }
    throw InputError("unknown rescore mode: " + name + " (expected forward|inverted)");
}

void require_file(const std::string& path, const std::string& what) {
    if (!std::filesystem::exists(path)) {
        throw InputError(what + " not found: " + path);
    }
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream stream(csv);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

Collection load_queries_for(const Lexicon& lexicon, const std::string& path) {
    require_file(path, "query file");
    auto queries = load_vectors(path, &lexicon);
    if (queries.docs.empty()) {
        throw InputError("query file holds no queries: " + path);
    }
    return queries;
}

RunFile hits_to_run(const Collection& queries, const std::vector<ScoredList>& results,
                    const InvertedIndex& idx) {
    RunFile run;
    for (std::size_t i = 0; i < queries.docs.size(); ++i) {
        std::vector<RunEntry> entries;
        entries.reserve(results[i].hits.size());
        for (const auto& hit : results[i].hits) {
            entries.push_back({idx.doc_names[hit.doc], hit.score});
        }
        run.add(queries.docs[i].id, std::move(entries));
    }
    return run;
}

void check_shared_docid_space(const InvertedIndex& a, const InvertedIndex& b) {
    if (a.num_docs != b.num_docs || a.doc_names != b.doc_names) {
        throw InputError(
            "approx and rescore indexes do not share a docid space; rebuild them "
            "from the same collection in one `twostep index` run");
    }
}

void print_size_report(const std::string& label, const std::filesystem::path& dir) {
    auto report = index_size_report(dir);
    std::cout << label << " index bytes: postings=" << report.postings_bytes
              << " blockmax=" << report.blockmax_bytes << " lexicon=" << report.lexicon_bytes
              << " forward=" << report.forward_bytes << " meta=" << report.meta_bytes
              << " docids=" << report.docids_bytes << " total=" << report.total_bytes()
              << "\n";
}

// document-centric top pooling parallelized per document
Collection parallel_doc_topk(const Collection& c, std::size_t k, unsigned threads,
                             std::size_t* emptied) {
    Collection out;
    out.lexicon = c.lexicon;
    out.docs.resize(c.docs.size());
    threads = std::max(1u, threads);
    std::vector<std::thread> pool;
    std::size_t chunk = (c.docs.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t begin = t * chunk;
        std::size_t end = std::min(c.docs.size(), begin + chunk);
        if (begin >= end) {
            break;
        }
        pool.emplace_back([&, begin, end] {
            for (std::size_t i = begin; i < end; ++i) {
                out.docs[i] = {c.docs[i].id, prune_vector_topk(c.docs[i].vector, k)};
            }
        });
    }
    for (auto& worker : pool) {
        worker.join();
    }
    *emptied = 0;
    for (const auto& d : out.docs) {
        if (d.vector.empty()) {
            ++*emptied;
        }
    }
    return out;
}

struct IndexArgs {
    std::string collection;
    std::string queries;
    std::string full_out;
    std::string approx_out;
    std::string prune = "lexical";  // none|lexical|topk|quantile|threshold
    std::size_t prune_k = 50;
    double quantile = 0.5;
    double threshold = 0.0;
    std::size_t doc_cap = 128;
    std::size_t query_cap = 32;
    std::uint32_t block_size = 64;
    std::uint32_t quant_bits = 8;
    unsigned threads = std::thread::hardware_concurrency();
};

int cmd_index(const IndexArgs& args) {
    require_file(args.collection, "collection file");
    auto collection = load_vectors(args.collection);
    if (collection.docs.empty()) {
        throw InputError("collection is empty: " + args.collection);
    }

    CollectionStats stats = compute_stats(collection);
    if (!args.queries.empty()) {
        auto queries = load_queries_for(collection.lexicon, args.queries);
        stats.avg_query_terms = compute_stats(queries).avg_doc_terms;
    }
    std::cout << "collection: docs=" << stats.num_docs << " vocab=" << stats.vocab_size
              << " avg_doc_terms=" << stats.avg_doc_terms
              << " max_doc_terms=" << stats.max_doc_terms;
    if (stats.avg_query_terms > 0.0) {
        std::cout << " avg_query_terms=" << stats.avg_query_terms;
    }
    std::cout << "\n";

    std::size_t emptied = 0;
    Collection approx;
    if (args.prune == "none") {
        approx = collection;
    } else if (args.prune == "lexical" || args.prune == "topk") {
        std::size_t k = args.prune == "lexical"
                            ? static_cast<std::size_t>(std::llround(stats.avg_doc_terms))
                            : args.prune_k;
        k = std::max<std::size_t>(1, std::min(k, args.doc_cap));
        std::cout << "document pruning: top-" << k << " (cap " << args.doc_cap << ")\n";
        approx = parallel_doc_topk(collection, k, args.threads, &emptied);
    } else if (args.prune == "quantile") {
        PruneConfig cfg;
        cfg.strategy = PruneStrategy::TermQuantile;
        cfg.quantile = args.quantile;
        auto outcome = prune_collection(collection, cfg);
        approx = std::move(outcome.collection);
        emptied = outcome.emptied_docs;
    } else if (args.prune == "threshold") {
        PruneConfig cfg;
        cfg.strategy = PruneStrategy::ValueThreshold;
        cfg.threshold = args.threshold;
        auto outcome = prune_collection(collection, cfg);
        approx = std::move(outcome.collection);
        emptied = outcome.emptied_docs;
    } else {
        throw InputError("unknown prune mode: " + args.prune);
    }
    if (emptied > 0) {
        std::cout << "documents emptied by pruning (kept in docid space): " << emptied << "\n";
    }

    auto full_inv = build_inverted(collection, args.block_size, args.quant_bits);
    auto full_fwd = build_forward(collection);
    save_index(full_inv, full_fwd, args.full_out);
    print_size_report("full", args.full_out);

    auto approx_inv = build_inverted(approx, args.block_size, args.quant_bits);
    auto approx_fwd = build_forward(approx);
    save_index(approx_inv, approx_fwd, args.approx_out);
    print_size_report("approx", args.approx_out);
    return 0;
}

struct PruneArgs {
    std::string collection;
    std::string out;
    std::string strategy = "doc-topk";  // doc-topk|query-topk|term-quantile|value-threshold
    std::size_t k = 32;                 // document sweeps use 4,8,16,32,64; queries 5
    double quantile = 0.5;
    double threshold = 0.0;
    std::size_t doc_cap = 128;
    std::size_t query_cap = 32;
};

int cmd_prune(const PruneArgs& args) {
    require_file(args.collection, "collection file");
    auto collection = load_vectors(args.collection);
    PruneConfig cfg;
    cfg.size_k = args.k;
    cfg.quantile = args.quantile;
    cfg.threshold = args.threshold;
    cfg.doc_cap = args.doc_cap;
    cfg.query_cap = args.query_cap;
    if (args.strategy == "doc-topk") {
        cfg.strategy = PruneStrategy::DocTopK;
    } else if (args.strategy == "query-topk") {
        cfg.strategy = PruneStrategy::QueryTopK;
    } else if (args.strategy == "term-quantile") {
        cfg.strategy = PruneStrategy::TermQuantile;
    } else if (args.strategy == "value-threshold") {
        cfg.strategy = PruneStrategy::ValueThreshold;
    } else {
        throw InputError("unknown strategy: " + args.strategy);
    }
    auto outcome = prune_collection(collection, cfg);
    save_vectors(outcome.collection, args.out);
    std::cout << "pruned " << collection.size() << " vectors -> " << args.out << " (emptied "
              << outcome.emptied_docs << ")\n";
    return 0;
}

struct SearchArgs {
    std::string index;
    std::string queries;
    std::string out;
    std::string tag = "twostep";
    std::size_t k = 100;
    std::string algorithm = "maxscore";
    std::string scorer = "dot";
    std::string k1 = "100";
    double bm25_k1 = 0.9;
    double bm25_b = 0.4;
    std::size_t query_k = 0;  // 0 = no query pruning
};

int cmd_search(const SearchArgs& args) {
    auto index = load_index(args.index);
    auto queries = load_queries_for(index.inverted.lexicon, args.queries);

    SearchParams params;
    params.k = args.k;
    params.algorithm = algorithm_from(args.algorithm);
    params.scorer = scorer_from(args.scorer);
    params.saturation.k1 = parse_k1(args.k1);
    params.bm25_k1 = args.bm25_k1;
    params.bm25_b = args.bm25_b;

    Searcher searcher(index.inverted);
    std::vector<ScoredList> results;
    results.reserve(queries.docs.size());
    for (const auto& q : queries.docs) {
        SparseVector vec =
            args.query_k > 0 ? prune_vector_topk(q.vector, args.query_k) : q.vector;
        results.push_back(searcher.search(vec, params));
    }
    save_run(hits_to_run(queries, results, index.inverted), args.out, args.tag);
    std::cout << "wrote " << args.out << " (" << queries.docs.size() << " queries)\n";
    return 0;
}

struct TwoStepArgs {
    std::string approx_index;
    std::string rescore_index;
    std::string queries;
    std::string out;
    std::string tag = "two-step";
    std::size_t k = 100;
    std::size_t candidates = 100;
    std::string k1 = "100";
    std::size_t query_k = 5;
    std::string algorithm = "maxscore";
    std::string rescore_mode = "forward";
};

int cmd_two_step(const TwoStepArgs& args) {
    auto approx = load_index(args.approx_index);
    auto rescore = load_index(args.rescore_index);
    check_shared_docid_space(approx.inverted, rescore.inverted);
    auto queries = load_queries_for(rescore.inverted.lexicon, args.queries);

    TwoStepConfig cfg;
    cfg.k = args.k;
    cfg.candidates = args.candidates;
    cfg.saturation.k1 = parse_k1(args.k1);
    cfg.query_prune_k = args.query_k;
    cfg.first_stage_algorithm = algorithm_from(args.algorithm);
    cfg.rescore_mode = rescore_mode_from(args.rescore_mode);

    RescoreSource source;
    source.forward = &rescore.forward;
    source.inverted = &rescore.inverted;

    std::vector<ScoredList> results;
    results.reserve(queries.docs.size());
    for (const auto& q : queries.docs) {
        results.push_back(two_step_search(q.vector, approx.inverted, source, cfg));
    }
    save_run(hits_to_run(queries, results, rescore.inverted), args.out, args.tag);
    std::cout << "wrote " << args.out << " (" << queries.docs.size() << " queries)\n";
    return 0;
}

struct GtArgs {
    std::string approx_index;
    std::string rescore_index;
    std::string queries;
    std::string out;
    std::string tag = "gt";
    std::size_t k = 100;
    std::size_t candidates = 100;
    std::size_t query_k = 5;
    double bm25_k1 = 0.9;
    double bm25_b = 0.4;
    std::string algorithm = "maxscore";
    std::string rescore_mode = "forward";
};

int cmd_gt(const GtArgs& args) {
    auto approx = load_index(args.approx_index);
    auto rescore = load_index(args.rescore_index);
    check_shared_docid_space(approx.inverted, rescore.inverted);
    auto queries = load_queries_for(rescore.inverted.lexicon, args.queries);

    GtConfig cfg;
    cfg.k = args.k;
    cfg.candidates = args.candidates;
    cfg.query_prune_k = args.query_k;
    cfg.bm25_k1 = args.bm25_k1;
    cfg.bm25_b = args.bm25_b;
    cfg.first_stage_algorithm = algorithm_from(args.algorithm);
    cfg.rescore_mode = rescore_mode_from(args.rescore_mode);

    RescoreSource source;
    source.forward = &rescore.forward;
    source.inverted = &rescore.inverted;

    std::vector<ScoredList> results;
    results.reserve(queries.docs.size());
    for (const auto& q : queries.docs) {
        results.push_back(gt_search(q.vector, approx.inverted, source, cfg));
    }
    save_run(hits_to_run(queries, results, rescore.inverted), args.out, args.tag);
    std::cout << "wrote " << args.out << " (" << queries.docs.size() << " queries)\n";
    return 0;
}

struct EvalArgs {
    std::string run;
    std::string qrels;
    std::string baseline_run;
    std::string dataset = "dataset";
    std::string csv;
    std::string sig_csv;
    std::size_t ndcg_cutoff = 10;
    std::size_t mrr_cutoff = 10;
    std::size_t success_cutoff = 5;
    double alpha = 0.01;
};

void append_csv(const std::string& path, const std::string& header,
                const std::vector<std::string>& rows) {
    bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    if (fresh) {
        out << header << '\n';
    }
    for (const auto& row : rows) {
        out << row << '\n';
    }
}

int cmd_eval(const EvalArgs& args) {
    auto run = load_run(args.run);
    auto qrels = load_qrels(args.qrels);
    if (qrels.judgments.empty()) {
        throw InputError("qrels file holds no judgments: " + args.qrels);
    }

    struct Row {
        std::string name;
        MetricResult result;
    };
    std::vector<Row> rows{
        {"ndcg@" + std::to_string(args.ndcg_cutoff), ndcg_at(run, qrels, args.ndcg_cutoff)},
        {"mrr@" + std::to_string(args.mrr_cutoff), mrr_at(run, qrels, args.mrr_cutoff)},
        {"success@" + std::to_string(args.success_cutoff),
         success_at(run, qrels, args.success_cutoff)},
    };

    std::ostringstream table;
    table << std::fixed;
    table.precision(6);
    std::vector<std::string> csv_rows;
    for (const auto& row : rows) {
        table << row.name << "\t" << row.result.value << "\t[" << row.result.ci_low << ", "
              << row.result.ci_high << "]\tqueries=" << row.result.evaluated
              << " skipped=" << row.result.skipped << "\n";
        std::ostringstream csv_row;
        csv_row << std::fixed;
        csv_row.precision(6);
        csv_row << row.name << ',' << args.dataset << ',' << row.result.value << ','
                << row.result.ci_low << ',' << row.result.ci_high;
        csv_rows.push_back(csv_row.str());
    }
    std::cout << table.str();
    if (!args.csv.empty()) {
        append_csv(args.csv, "metric,dataset,value,ci_low,ci_high", csv_rows);
    }

    if (!args.baseline_run.empty()) {
        auto baseline = load_run(args.baseline_run);
        std::vector<std::string> sig_rows;
        for (std::size_t m = 0; m < rows.size(); ++m) {
            MetricResult base_result =
                m == 0 ? ndcg_at(baseline, qrels, args.ndcg_cutoff)
                       : (m == 1 ? mrr_at(baseline, qrels, args.mrr_cutoff)
                                 : success_at(baseline, qrels, args.success_cutoff));
            if (base_result.qids != rows[m].result.qids) {
                throw InputError("run and baseline evaluate different query sets");
            }
            auto test =
                paired_ttest(rows[m].result.per_query, base_result.per_query, args.alpha);
            const char* verdict =
                test.verdict == Verdict::Better
                    ? "better"
                    : (test.verdict == Verdict::Worse ? "worse" : "indistinguishable");
            std::cout << "ttest " << rows[m].name << ": mean_delta=" << test.mean_delta
                      << " t=" << test.t_statistic << " p=" << test.p_value << " -> " << verdict
                      << " (alpha=" << args.alpha << ")\n";
            std::ostringstream sig_row;
            sig_row << std::fixed;
            sig_row.precision(6);
            sig_row << args.dataset << ',' << rows[m].name << ',' << test.mean_delta << ','
                    << test.t_statistic << ',' << test.p_value << ',' << verdict;
            sig_rows.push_back(sig_row.str());
        }
        if (!args.sig_csv.empty()) {
            append_csv(args.sig_csv, "dataset,metric,mean_delta,t,p,verdict", sig_rows);
        }
    }
    return 0;
}

struct EffectArgs {
    std::string sig_csv;
    std::string metric = "ndcg@10";
};

// aggregates per-dataset verdicts into the >= / > / < dataset counts
int cmd_effect(const EffectArgs& args) {
    require_file(args.sig_csv, "significance csv");
    std::ifstream in(args.sig_csv);
    std::string line;
    std::getline(in, line);  // header
    std::vector<SignificanceEntry> entries;
    while (std::getline(in, line)) {
        auto fields = split_list(line);
        if (fields.size() != 6 || fields[1] != args.metric) {
            continue;
        }
        SignificanceEntry e;
        e.dataset = fields[0];
        e.test.mean_delta = std::stod(fields[2]);
        e.test.verdict =
            fields[5] == "better"
                ? Verdict::Better
                : (fields[5] == "worse" ? Verdict::Worse : Verdict::Indistinguishable);
        entries.push_back(e);
    }
    auto counts = count_effects(entries);
    std::cout << args.metric << " over " << entries.size()
              << " datasets: >=" << counts.not_worse << " >" << counts.better << " <"
              << counts.worse << "\n";
    return 0;
}

struct IntersectArgs {
    std::string reference;
    std::string candidate;
    std::string dataset = "dataset";
    std::string csv;
    std::size_t ref_depth = 10;
    std::size_t cand_depth = 100;
};

int cmd_intersect(const IntersectArgs& args) {
    auto reference = load_run(args.reference);
    auto candidate = load_run(args.candidate);
    auto result = intersection_at(reference, candidate, args.ref_depth, args.cand_depth);
    std::cout << std::fixed;
    std::cout.precision(4);
    std::cout << "intersection@" << args.ref_depth << " (candidate depth " << args.cand_depth
              << "): " << result.value << " [" << result.ci_low << ", " << result.ci_high
              << "] over " << result.evaluated << " queries\n";
    if (!args.csv.empty()) {
        std::ostringstream row;
        row << std::fixed;
        row.precision(6);
        row << "intersection@" << args.ref_depth << ',' << args.dataset << ',' << result.value
            << ',' << result.ci_low << ',' << result.ci_high;
        append_csv(args.csv, "metric,dataset,value,ci_low,ci_high", {row.str()});
    }
    return 0;
}

struct BenchArgs {
    std::string mode = "search";  // search|two-step|gt
    std::string index;
    std::string approx_index;
    std::string rescore_index;
    std::string queries;
    std::string csv;
    std::string counters_csv;
    std::string label = "bench";
    std::string baseline;
    std::string algorithms = "maxscore";
    std::string k1_list = "100";
    std::string scorer = "saturated";
    std::size_t k = 100;
    std::size_t candidates = 100;
    std::size_t query_k = 0;
    double bm25_k1 = 0.9;
    double bm25_b = 0.4;
    std::string rescore_mode = "forward";
    std::string doc_prune_label = "full";
    std::size_t warmup = 2;
    std::size_t reps = 5;
    unsigned clients = 1;
};

int cmd_bench(const BenchArgs& args) {
    std::vector<SweepRow> rows;
    std::vector<SparseVector> query_vecs;

    auto collect_queries = [&](const Lexicon& lexicon) {
        auto queries = load_queries_for(lexicon, args.queries);
        for (const auto& q : queries.docs) {
            query_vecs.push_back(args.query_k > 0 ? prune_vector_topk(q.vector, args.query_k)
                                                  : q.vector);
        }
    };

    if (args.mode == "search") {
        if (args.index.empty()) {
            throw InputError("bench --mode search needs --index");
        }
        auto index = load_index(args.index);
        collect_queries(index.inverted.lexicon);
        Searcher searcher(index.inverted);
        for (const auto& algorithm : split_list(args.algorithms)) {
            for (const auto& k1_text : split_list(args.k1_list)) {
                SearchParams params;
                params.k = args.k;
                params.algorithm = algorithm_from(algorithm);
                params.scorer = scorer_from(args.scorer);
                params.saturation.k1 = parse_k1(k1_text);
                params.bm25_k1 = args.bm25_k1;
                params.bm25_b = args.bm25_b;
                auto engine = [&](const SparseVector& q) { return searcher.search(q, params); };
                SweepRow row;
                row.config = args.label + "/" + algorithm + "/k1=" + k1_text;
                row.algorithm = algorithm;
                row.k1 = params.scorer == ScorerKind::Saturated
                             ? k1_label(params.saturation.k1)
                             : args.scorer;
                row.doc_prune = args.doc_prune_label;
                row.query_prune = args.query_k > 0 ? std::to_string(args.query_k) : "full";
                row.report = run_bench(engine, query_vecs, args.warmup, args.reps);
                rows.push_back(std::move(row));
            }
        }
    } else if (args.mode == "two-step" || args.mode == "gt") {
        if (args.approx_index.empty() || args.rescore_index.empty()) {
            throw InputError("pipeline bench needs --approx-index and --rescore-index");
        }
        auto approx = load_index(args.approx_index);
        auto rescore = load_index(args.rescore_index);
        check_shared_docid_space(approx.inverted, rescore.inverted);
        collect_queries(rescore.inverted.lexicon);
        RescoreSource source;
        source.forward = &rescore.forward;
        source.inverted = &rescore.inverted;
        for (const auto& algorithm : split_list(args.algorithms)) {
            for (const auto& k1_text : split_list(args.k1_list)) {
                QueryEngine engine;
                if (args.mode == "two-step") {
                    TwoStepConfig cfg;
                    cfg.k = args.k;
                    cfg.candidates = args.candidates;
                    cfg.saturation.k1 = parse_k1(k1_text);
                    cfg.query_prune_k = args.query_k > 0 ? args.query_k : 5;
                    cfg.first_stage_algorithm = algorithm_from(algorithm);
                    cfg.rescore_mode = rescore_mode_from(args.rescore_mode);
                    engine = [&approx, &source, cfg](const SparseVector& q) {
                        return two_step_search(q, approx.inverted, source, cfg);
                    };
                } else {
                    GtConfig cfg;
                    cfg.k = args.k;
                    cfg.candidates = args.candidates;
                    cfg.query_prune_k = args.query_k > 0 ? args.query_k : 5;
                    cfg.bm25_k1 = args.bm25_k1;
                    cfg.bm25_b = args.bm25_b;
                    cfg.first_stage_algorithm = algorithm_from(algorithm);
                    cfg.rescore_mode = rescore_mode_from(args.rescore_mode);
                    engine = [&approx, &source, cfg](const SparseVector& q) {
                        return gt_search(q, approx.inverted, source, cfg);
                    };
                }
                SweepRow row;
                row.config = args.label + "/" + args.mode + "/" + algorithm + "/k1=" + k1_text;
                row.algorithm = algorithm;
                row.k1 = args.mode == "gt" ? "bm25" : k1_text;
                row.doc_prune = args.doc_prune_label;
                row.query_prune =
                    std::to_string(args.query_k > 0 ? args.query_k : std::size_t{5});
                row.report = run_bench(engine, query_vecs, args.warmup, args.reps);
                rows.push_back(std::move(row));
            }
        }
    } else {
        throw InputError("unknown bench mode: " + args.mode);
    }

    normalize_rows(rows, args.baseline);
    std::cout << sweep_csv(rows);
    if (!args.csv.empty()) {
        std::ofstream out(args.csv);
        out << sweep_csv(rows);
    }
    if (!args.counters_csv.empty()) {
        std::ofstream out(args.counters_csv);
        out << sweep_csv(rows, true);
    }

    // optional throughput mode, never part of the latency tables
    if (args.clients > 1 && args.mode == "search") {
        auto index = load_index(args.index);
        auto start = std::chrono::steady_clock::now();
        std::vector<std::thread> pool;
        for (unsigned c = 0; c < args.clients; ++c) {
            pool.emplace_back([&] {
                Searcher searcher(index.inverted);
                SearchParams params;
                params.k = args.k;
                params.scorer = scorer_from(args.scorer);
                params.saturation.k1 = parse_k1(split_list(args.k1_list).front());
                for (const auto& q : query_vecs) {
                    (void)searcher.search(q, params);
                }
            });
        }
        for (auto& worker : pool) {
            worker.join();
        }
        auto stop = std::chrono::steady_clock::now();
        double secs = std::chrono::duration<double>(stop - start).count();
        std::cout << "throughput: "
                  << static_cast<double>(query_vecs.size() * args.clients) / secs
                  << " queries/s with " << args.clients << " clients\n";
    }
    return 0;
}

struct SynthArgs {
    std::string out_docs;
    std::string out_queries;
    std::string out_qrels;
    SynthConfig cfg;
};

int cmd_synth(const SynthArgs& args) {
    auto data = make_synthetic(args.cfg);
    save_vectors(data.docs, args.out_docs);
    if (!args.out_queries.empty()) {
        save_vectors(data.queries, args.out_queries);
    }
    if (!args.out_qrels.empty()) {
        std::ofstream out(args.out_qrels);
        if (!out) {
            throw IoError("cannot write " + args.out_qrels);
        }
        for (const auto& [key, grade] : data.qrels.judgments) {
            out << key.first << " 0 " << key.second << ' ' << grade << '\n';
        }
    }
    std::cout << "synthesized docs=" << data.docs.size() << " queries=" << data.queries.size()
              << " judgments=" << data.qrels.judgments.size() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"twostep: two-step sparse retrieval over an impact-quantized inverted index"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; flags override it");

    IndexArgs index_args;
    auto* index_cmd = app.add_subcommand(
        "index", "Build the approximate (pruned) and full index directories in one pass");
    index_cmd->add_option("--collection", index_args.collection, "JSONL vector file")
        ->required();
    index_cmd->add_option("--queries", index_args.queries,
                          "optional query JSONL, reported in the statistics line");
    index_cmd->add_option("--full-out", index_args.full_out, "full (rescoring) index directory")
        ->required();
    index_cmd
        ->add_option("--approx-out", index_args.approx_out,
                     "approximate (pruned) index directory")
        ->required();
    index_cmd
        ->add_option("--doc-prune", index_args.prune,
                     "none | lexical | topk | quantile | threshold")
        ->capture_default_str();
    index_cmd->add_option("--prune-k", index_args.prune_k, "top-k size for --doc-prune topk")
        ->capture_default_str();
    index_cmd->add_option("--quantile", index_args.quantile, "term-quantile keep fraction")
        ->capture_default_str();
    index_cmd->add_option("--threshold", index_args.threshold, "value-threshold cutoff")
        ->capture_default_str();
    index_cmd->add_option("--doc-cap", index_args.doc_cap, "upper limit for document pruning")
        ->capture_default_str();
    index_cmd
        ->add_option("--query-cap", index_args.query_cap,
                     "upper limit for query pruning (reporting only)")
        ->capture_default_str();
    index_cmd->add_option("--block-size", index_args.block_size, "block-max block size")
        ->envname("TWOSTEP_BLOCK_SIZE")
        ->capture_default_str();
    index_cmd->add_option("--quant-bits", index_args.quant_bits, "impact quantization bits")
        ->envname("TWOSTEP_QUANT_BITS")
        ->capture_default_str();
    index_cmd
        ->add_option("--threads", index_args.threads, "worker threads for document pruning")
        ->envname("TWOSTEP_THREADS")
        ->capture_default_str();

    PruneArgs prune_args;
    auto* prune_cmd =
        app.add_subcommand("prune", "Statically prune a vector file to a new vector file");
    prune_cmd->add_option("--collection", prune_args.collection, "JSONL vector file")
        ->required();
    prune_cmd->add_option("--out", prune_args.out, "output JSONL path")->required();
    prune_cmd
        ->add_option("--strategy", prune_args.strategy,
                     "doc-topk | query-topk | term-quantile | value-threshold")
        ->capture_default_str();
    prune_cmd
        ->add_option("--k", prune_args.k,
                     "top-k size (document sweeps use 4,8,16,32,64; queries 5)")
        ->capture_default_str();
    prune_cmd->add_option("--quantile", prune_args.quantile, "term-quantile keep fraction")
        ->capture_default_str();
    prune_cmd->add_option("--threshold", prune_args.threshold, "value-threshold cutoff")
        ->capture_default_str();
    prune_cmd->add_option("--doc-cap", prune_args.doc_cap, "document pruning cap")
        ->capture_default_str();
    prune_cmd->add_option("--query-cap", prune_args.query_cap, "query pruning cap")
        ->capture_default_str();

    SearchArgs search_args;
    auto* search_cmd = app.add_subcommand("search", "Single-stage top-k retrieval");
    search_cmd->add_option("--index", search_args.index, "index directory")->required();
    search_cmd->add_option("--queries", search_args.queries, "query JSONL file")->required();
    search_cmd->add_option("--out", search_args.out, "TREC run output path")->required();
    search_cmd->add_option("--tag", search_args.tag, "run tag")->capture_default_str();
    search_cmd->add_option("--k", search_args.k, "results per query")->capture_default_str();
    search_cmd->add_option("--algorithm", search_args.algorithm, "exhaustive|maxscore|wand|bmw")
        ->capture_default_str();
    search_cmd->add_option("--scorer", search_args.scorer, "dot|saturated|bm25")
        ->capture_default_str();
    search_cmd->add_option("--k1", search_args.k1, "saturation parameter; 'inf' for none")
        ->capture_default_str();
    search_cmd->add_option("--bm25-k1", search_args.bm25_k1, "BM25 k1")->capture_default_str();
    search_cmd->add_option("--bm25-b", search_args.bm25_b, "BM25 b")->capture_default_str();
    search_cmd
        ->add_option("--query-k", search_args.query_k, "prune queries to their top-k (0 = off)")
        ->capture_default_str();

    TwoStepArgs two_step_args;
    auto* two_step_cmd = app.add_subcommand(
        "two-step",
        "Approximate search on the pruned index, exact rescoring of the top candidates");
    two_step_cmd
        ->add_option("--approx-index", two_step_args.approx_index, "pruned index directory")
        ->required();
    two_step_cmd
        ->add_option("--rescore-index", two_step_args.rescore_index, "full index directory")
        ->required();
    two_step_cmd->add_option("--queries", two_step_args.queries, "query JSONL file")
        ->required();
    two_step_cmd->add_option("--out", two_step_args.out, "TREC run output path")->required();
    two_step_cmd->add_option("--tag", two_step_args.tag, "run tag")->capture_default_str();
    two_step_cmd->add_option("--k", two_step_args.k, "results per query")
        ->capture_default_str();
    two_step_cmd
        ->add_option("--candidates", two_step_args.candidates, "first-stage depth to rescore")
        ->capture_default_str();
    two_step_cmd->add_option("--k1", two_step_args.k1, "saturation parameter; 'inf' for none")
        ->capture_default_str();
    two_step_cmd->add_option("--query-k", two_step_args.query_k, "first-stage query top-k")
        ->capture_default_str();
    two_step_cmd
        ->add_option("--algorithm", two_step_args.algorithm,
                     "first-stage algorithm: exhaustive|maxscore|wand|bmw")
        ->capture_default_str();
    two_step_cmd
        ->add_option("--rescore-mode", two_step_args.rescore_mode,
                     "forward (exact) | inverted (quantized docid-skipping)")
        ->capture_default_str();

    GtArgs gt_args;
    auto* gt_cmd = app.add_subcommand(
        "gt", "Guided-Traversal-style baseline: BM25 first stage, exact rescoring");
    gt_cmd->add_option("--approx-index", gt_args.approx_index, "first-stage index directory")
        ->required();
    gt_cmd->add_option("--rescore-index", gt_args.rescore_index, "full index directory")
        ->required();
    gt_cmd->add_option("--queries", gt_args.queries, "query JSONL file")->required();
    gt_cmd->add_option("--out", gt_args.out, "TREC run output path")->required();
    gt_cmd->add_option("--tag", gt_args.tag, "run tag")->capture_default_str();
    gt_cmd->add_option("--k", gt_args.k, "results per query")->capture_default_str();
    gt_cmd->add_option("--candidates", gt_args.candidates, "first-stage depth to rescore")
        ->capture_default_str();
    gt_cmd->add_option("--query-k", gt_args.query_k, "first-stage query top-k")
        ->capture_default_str();
    gt_cmd->add_option("--bm25-k1", gt_args.bm25_k1, "BM25 k1")->capture_default_str();
    gt_cmd->add_option("--bm25-b", gt_args.bm25_b, "BM25 b")->capture_default_str();
    gt_cmd->add_option("--algorithm", gt_args.algorithm, "first-stage algorithm")
        ->capture_default_str();
    gt_cmd->add_option("--rescore-mode", gt_args.rescore_mode, "forward | inverted")
        ->capture_default_str();

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Effectiveness metrics for a TREC run");
    eval_cmd->add_option("--run", eval_args.run, "TREC run file")->required();
    eval_cmd->add_option("--qrels", eval_args.qrels, "TREC qrels file")->required();
    eval_cmd->add_option("--baseline-run", eval_args.baseline_run,
                         "second run for a paired significance test");
    eval_cmd->add_option("--dataset", eval_args.dataset, "dataset label for CSV rows")
        ->capture_default_str();
    eval_cmd->add_option("--csv", eval_args.csv, "append metric rows to this CSV");
    eval_cmd->add_option("--sig-csv", eval_args.sig_csv, "append significance rows to this CSV");
    eval_cmd->add_option("--ndcg-cutoff", eval_args.ndcg_cutoff, "nDCG cutoff")
        ->capture_default_str();
    eval_cmd->add_option("--mrr-cutoff", eval_args.mrr_cutoff, "MRR cutoff")
        ->capture_default_str();
    eval_cmd->add_option("--success-cutoff", eval_args.success_cutoff, "Success cutoff")
        ->capture_default_str();
    eval_cmd->add_option("--alpha", eval_args.alpha, "significance level")
        ->capture_default_str();

    EffectArgs effect_args;
    auto* effect_cmd = app.add_subcommand(
        "effect", "Count datasets by significance verdict from an eval --sig-csv file");
    effect_cmd->add_option("--sig-csv", effect_args.sig_csv, "significance CSV")->required();
    effect_cmd->add_option("--metric", effect_args.metric, "metric row to aggregate")
        ->capture_default_str();

    IntersectArgs intersect_args;
    auto* intersect_cmd =
        app.add_subcommand("intersect", "Overlap of a reference top-k with a candidate run");
    intersect_cmd->add_option("--reference", intersect_args.reference, "reference run file")
        ->required();
    intersect_cmd->add_option("--candidate", intersect_args.candidate, "candidate run file")
        ->required();
    intersect_cmd->add_option("--dataset", intersect_args.dataset, "dataset label")
        ->capture_default_str();
    intersect_cmd->add_option("--csv", intersect_args.csv, "append the row to this CSV");
    intersect_cmd->add_option("--ref-depth", intersect_args.ref_depth, "reference depth")
        ->capture_default_str();
    intersect_cmd->add_option("--cand-depth", intersect_args.cand_depth, "candidate depth")
        ->capture_default_str();

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "Latency and work measurement");
    bench_cmd->add_option("--mode", bench_args.mode, "search | two-step | gt")
        ->capture_default_str();
    bench_cmd->add_option("--index", bench_args.index, "index directory (search mode)");
    bench_cmd->add_option("--approx-index", bench_args.approx_index,
                          "pruned index (pipeline modes)");
    bench_cmd->add_option("--rescore-index", bench_args.rescore_index,
                          "full index (pipeline modes)");
    bench_cmd->add_option("--queries", bench_args.queries, "query JSONL file")->required();
    bench_cmd->add_option("--csv", bench_args.csv, "write the latency CSV here");
    bench_cmd->add_option("--counters-csv", bench_args.counters_csv,
                          "write the deterministic counters-only CSV here");
    bench_cmd->add_option("--label", bench_args.label, "config label prefix")
        ->capture_default_str();
    bench_cmd->add_option("--baseline", bench_args.baseline,
                          "config label to normalize latencies against");
    bench_cmd->add_option("--algorithms", bench_args.algorithms, "comma list of algorithms")
        ->capture_default_str();
    bench_cmd->add_option("--k1-list", bench_args.k1_list, "comma list of k1 values")
        ->capture_default_str();
    bench_cmd->add_option("--scorer", bench_args.scorer, "search-mode scorer")
        ->capture_default_str();
    bench_cmd->add_option("--k", bench_args.k, "results per query")->capture_default_str();
    bench_cmd->add_option("--candidates", bench_args.candidates, "pipeline candidate depth")
        ->capture_default_str();
    bench_cmd->add_option("--query-k", bench_args.query_k, "query pruning top-k (0 = off)")
        ->capture_default_str();
    bench_cmd->add_option("--bm25-k1", bench_args.bm25_k1, "BM25 k1")->capture_default_str();
    bench_cmd->add_option("--bm25-b", bench_args.bm25_b, "BM25 b")->capture_default_str();
    bench_cmd->add_option("--rescore-mode", bench_args.rescore_mode, "forward | inverted")
        ->capture_default_str();
    bench_cmd
        ->add_option("--doc-prune-label", bench_args.doc_prune_label,
                     "doc_prune column value for the CSV")
        ->capture_default_str();
    bench_cmd->add_option("--warmup", bench_args.warmup, "untimed warmup passes")
        ->capture_default_str();
    bench_cmd->add_option("--reps", bench_args.reps, "timed repetitions per query")
        ->capture_default_str();
    bench_cmd
        ->add_option("--clients", bench_args.clients,
                     "concurrent clients for throughput reporting (latency stays "
                     "single-threaded)")
        ->capture_default_str();

    SynthArgs synth_args;
    auto* synth_cmd =
        app.add_subcommand("synth", "Deterministic synthetic corpus/query/qrels generator");
    synth_cmd->add_option("--out-docs", synth_args.out_docs, "document JSONL output")
        ->required();
    synth_cmd->add_option("--out-queries", synth_args.out_queries, "query JSONL output");
    synth_cmd->add_option("--out-qrels", synth_args.out_qrels, "qrels output");
    synth_cmd->add_option("--docs", synth_args.cfg.num_docs, "documents")
        ->capture_default_str();
    synth_cmd->add_option("--vocab", synth_args.cfg.vocab, "vocabulary size")
        ->capture_default_str();
    synth_cmd->add_option("--queries", synth_args.cfg.num_queries, "queries")
        ->capture_default_str();
    synth_cmd->add_option("--doc-nnz-min", synth_args.cfg.doc_nnz_min, "min doc nonzeros")
        ->capture_default_str();
    synth_cmd->add_option("--doc-nnz-max", synth_args.cfg.doc_nnz_max, "max doc nonzeros")
        ->capture_default_str();
    synth_cmd->add_option("--query-nnz-min", synth_args.cfg.query_nnz_min, "min query nonzeros")
        ->capture_default_str();
    synth_cmd->add_option("--query-nnz-max", synth_args.cfg.query_nnz_max, "max query nonzeros")
        ->capture_default_str();
    synth_cmd->add_option("--zipf-s", synth_args.cfg.zipf_s, "term popularity exponent")
        ->capture_default_str();
    synth_cmd->add_option("--weight-alpha", synth_args.cfg.weight_alpha, "weight tail index")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth_args.cfg.seed, "RNG seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (index_cmd->parsed()) {
            return cmd_index(index_args);
        }
        if (prune_cmd->parsed()) {
            return cmd_prune(prune_args);
        }
        if (search_cmd->parsed()) {
            return cmd_search(search_args);
        }
        if (two_step_cmd->parsed()) {
            return cmd_two_step(two_step_args);
        }
        if (gt_cmd->parsed()) {
            return cmd_gt(gt_args);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eval_args);
        }
        if (effect_cmd->parsed()) {
            return cmd_effect(effect_args);
        }
        if (intersect_cmd->parsed()) {
            return cmd_intersect(intersect_args);
        }
        if (bench_cmd->parsed()) {
            return cmd_bench(bench_args);
        }
        if (synth_cmd->parsed()) {
            return cmd_synth(synth_args);
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IndexFormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
