// efind: expert finding over bibliographic networks.
//
// Subcommands: ingest, train-global, expand, rank, eval, sweep.
// Result tables go to stdout as TSV; logs and reports go to stderr.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "efind/eval.hpp"
#include "efind/pipeline.hpp"

using namespace efind;

namespace {

struct CliOptions {
    std::string corpus_path;
    std::string hierarchy_path;
    std::string cache_dir;
    bool no_cache = false;
    std::size_t jobs = 1;
    std::uint64_t seed = 1;
    PipelineConfig pipeline;
};

void add_model_options(CLI::App& cmd, CliOptions& o) {
    cmd.add_option("--seed", o.seed, "Random seed")->capture_default_str();
    cmd.add_option("--beta", o.pipeline.smoothing.beta,
                   "Smoothing weight of the document model")
        ->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd.add_option("--gamma", o.pipeline.local.gamma,
                   "Weight of the document model vs expansion similarity")
        ->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd.add_option("--k", o.pipeline.local.k, "Neighbors per concept expansion")
        ->capture_default_str();
    cmd.add_option("--dim-base", o.pipeline.local.dim_base,
                   "Base dimension of the level schedule ceil(base/(5m+1))")
        ->capture_default_str();
    cmd.add_option("--prune-ratio", o.pipeline.local.prune_ratio,
                   "Keep expansion terms with sim >= ratio * top-1")
        ->capture_default_str();
    cmd.add_option("--prune-max", o.pipeline.local.prune_max,
                   "Cap on the pruned expansion set")->capture_default_str();
    cmd.add_option("--window", o.pipeline.embed.window, "Skip-gram window")
        ->capture_default_str();
    cmd.add_option("--negatives", o.pipeline.embed.negatives, "Negative samples per pair")
        ->capture_default_str();
    cmd.add_option("--epochs", o.pipeline.embed.epochs, "Training epochs")
        ->capture_default_str();
    cmd.add_option("--lr", o.pipeline.embed.learning_rate, "Initial learning rate")
        ->capture_default_str();
    cmd.add_option("--noise-exponent", o.pipeline.embed.noise_exponent,
                   "Unigram noise distribution exponent")->capture_default_str();
    cmd.add_option("--sample-size", o.pipeline.embed.sample_size,
                   "Documents drawn per epoch (0 = corpus size)")->capture_default_str();
    cmd.add_option("--workers", o.pipeline.embed.workers,
                   "Training workers (>1 is nondeterministic)")->capture_default_str();
    cmd.add_option("--lambda-pp", o.pipeline.walk.lambda_pp, "Citation edge weight")
        ->capture_default_str();
    cmd.add_option("--lambda-pa", o.pipeline.walk.lambda_pa, "Write edge weight")
        ->capture_default_str();
    cmd.add_option("--lambda-pv", o.pipeline.walk.lambda_pv, "Publish edge weight")
        ->capture_default_str();
    cmd.add_option("--lambda-aa", o.pipeline.walk.lambda_aa, "Coauthor edge weight")
        ->capture_default_str();
    cmd.add_option("--lambda-vv", o.pipeline.walk.lambda_vv, "Venue citation weight")
        ->capture_default_str();
    cmd.add_option("--eta-p", o.pipeline.walk.eta_p, "Paper restart weight")
        ->capture_default_str();
    cmd.add_option("--eta-a", o.pipeline.walk.eta_a, "Author restart weight")
        ->capture_default_str();
    cmd.add_option("--eta-v", o.pipeline.walk.eta_v, "Venue restart weight")
        ->capture_default_str();
    cmd.add_option("--tolerance", o.pipeline.walk.tolerance, "Walk convergence tolerance")
        ->capture_default_str();
    cmd.add_option("--max-iterations", o.pipeline.walk.max_iterations,
                   "Walk iteration budget")->capture_default_str();
    cmd.add_flag("--keep-self-coauthor", o.pipeline.network.keep_self_coauthor,
                 "Keep the raw coauthor-matrix diagonal");
    cmd.add_option("--cache-dir", o.cache_dir, "Embedding cache directory");
    cmd.add_flag("--no-cache", o.no_cache, "Force recomputation of cached embeddings");
    cmd.add_option("--jobs", o.jobs, "Worker threads for batch ranking")
        ->capture_default_str();
}

std::optional<EmbeddingCache> make_cache(const CliOptions& o) {
    if (o.cache_dir.empty() || o.no_cache) return std::nullopt;
    return EmbeddingCache(o.cache_dir);
}

Corpus load_corpus_checked(const std::string& path) {
    if (path.empty()) throw CLI::ValidationError("--corpus is required");
    return load_corpus(path);
}

std::vector<QueryText> gather_queries(const std::string& single,
                                      const std::string& query_id,
                                      const std::string& queries_file) {
    if (!queries_file.empty()) return load_queries(queries_file);
    if (single.empty())
        throw CLI::ValidationError("provide a query argument or --queries FILE");
    return {{query_id, single}};
}

int run_cli(int argc, char** argv) {
    CLI::App app{"expert finding in heterogeneous bibliographic networks"};
    app.require_subcommand(1);
    app.set_config("--config")->configurable(false);

    CliOptions o;
    o.pipeline.embed.seed = 1;

    // ingest
    std::string in_path, in_format = "jsonl", out_path;
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse a corpus file into a binary cache");
    ingest_cmd->add_option("--input", in_path, "Line-delimited corpus file")->required();
    ingest_cmd->add_option("--format", in_format, "Corpus format")
        ->check(CLI::IsMember({"jsonl"}))->capture_default_str();
    ingest_cmd->add_option("--output", out_path, "Corpus cache to write")->required();

    // train-global
    auto* train_cmd = app.add_subcommand("train-global",
                                         "Train global embeddings on the whole corpus");
    std::string vec_out;
    std::size_t train_dim = 0;
    train_cmd->add_option("--corpus", o.corpus_path, "Corpus cache")->required();
    train_cmd->add_option("--output", vec_out, "Vector file to write")->required();
    train_cmd->add_option("--dim", train_dim, "Embedding dimension (default: level-0 schedule)");
    add_model_options(*train_cmd, o);

    // expand
    auto* expand_cmd = app.add_subcommand("expand", "Hierarchy-guided query expansion");
    std::string query_arg, query_id = "q1", queries_file;
    expand_cmd->add_option("--corpus", o.corpus_path, "Corpus cache")->required();
    expand_cmd->add_option("--hierarchy", o.hierarchy_path, "Concept hierarchy file");
    expand_cmd->add_option("query", query_arg, "Query text");
    expand_cmd->add_option("--queries", queries_file, "TSV query_id<TAB>text");
    expand_cmd->add_option("--query-id", query_id, "Query id for single-query runs")
        ->capture_default_str();
    add_model_options(*expand_cmd, o);

    // rank
    auto* rank_cmd = app.add_subcommand("rank", "Rank candidate experts for a query");
    bool no_expansion = false, explain = false;
    std::string baseline = "le", run_tag = "efind";
    std::size_t limit = 1000;
    rank_cmd->add_option("--corpus", o.corpus_path, "Corpus cache")->required();
    rank_cmd->add_option("--hierarchy", o.hierarchy_path, "Concept hierarchy file");
    rank_cmd->add_option("query", query_arg, "Query text");
    rank_cmd->add_option("--queries", queries_file, "TSV query_id<TAB>text");
    rank_cmd->add_option("--query-id", query_id, "Query id for single-query runs")
        ->capture_default_str();
    rank_cmd->add_flag("--no-expansion", no_expansion,
                       "Exact-match retrieval (expansion sets collapse to the term itself)");
    rank_cmd->add_option("--baseline", baseline, "Ranking model: le (network walk) or lm")
        ->check(CLI::IsMember({"le", "lm"}))->capture_default_str();
    rank_cmd->add_option("--run-tag", run_tag, "Tag column of the run output")
        ->capture_default_str();
    rank_cmd->add_option("--limit", limit, "Candidates emitted per query")
        ->capture_default_str();
    rank_cmd->add_flag("--explain", explain, "Per-candidate score decomposition on stderr");
    std::string dump_network_dir;
    rank_cmd->add_option("--dump-network", dump_network_dir,
                         "Write the relevance network as TSV files into this directory");
    add_model_options(*rank_cmd, o);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Score a run against judgments");
    std::string run_path, qrels_path;
    bool per_query = false, ideal_truncate = false;
    eval_cmd->add_option("--run", run_path, "trec-run file")->required();
    eval_cmd->add_option("--qrels", qrels_path, "Relevance judgments")->required();
    eval_cmd->add_flag("--per-query", per_query, "Emit per-query rows");
    eval_cmd->add_flag("--ideal-truncate", ideal_truncate,
                       "Truncate the NDCG ideal gain at the number of relevant items");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep",
                                         "Metric vs one lambda over a value grid");
    std::string lambda_name, values_arg, metric_name = "p@10";
    sweep_cmd->add_option("--corpus", o.corpus_path, "Corpus cache")->required();
    sweep_cmd->add_option("--hierarchy", o.hierarchy_path, "Concept hierarchy file");
    sweep_cmd->add_option("--queries", queries_file, "TSV query_id<TAB>text")->required();
    sweep_cmd->add_option("--qrels", qrels_path, "Relevance judgments")->required();
    sweep_cmd->add_option("--lambda", lambda_name, "One of pp, pa, pv, aa, vv")->required();
    sweep_cmd->add_option("--values", values_arg, "Comma-separated grid, e.g. 0,0.5,1,2")
        ->required();
    sweep_cmd->add_option("--metric", metric_name, "Metric to report")
        ->capture_default_str();
    sweep_cmd->add_flag("--no-expansion", no_expansion, "Exact-match retrieval");
    add_model_options(*sweep_cmd, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    o.pipeline.embed.seed = o.seed;
    o.pipeline.expand = !no_expansion;
    o.pipeline.run_tag = run_tag;

    if (ingest_cmd->parsed()) {
        LoadReport report;
        Corpus corpus = ingest(in_path, in_format, &report);
        save_corpus(corpus, out_path);
        std::cerr << "wrote corpus cache: " << out_path << '\n';
        return 0;
    }

    if (train_cmd->parsed()) {
        Corpus corpus = load_corpus_checked(o.corpus_path);
        EmbedConfig ecfg = o.pipeline.embed;
        ecfg.dim = train_dim ? train_dim : o.pipeline.local.dim(0);
        auto table = train(corpus, uniform_weights(corpus), ecfg);
        save_embeddings(table, corpus, vec_out);
        std::cerr << "wrote " << table.vocab_size() << " x " << table.dim()
                  << " vectors: " << vec_out << '\n';
        return 0;
    }

    if (expand_cmd->parsed()) {
        Corpus corpus = load_corpus_checked(o.corpus_path);
        std::optional<ConceptHierarchy> hierarchy;
        if (!o.hierarchy_path.empty())
            hierarchy = ConceptHierarchy::load(o.hierarchy_path);
        auto cache = make_cache(o);
        for (const auto& q : gather_queries(query_arg, query_id, queries_file)) {
            auto expansions = pipeline_expansions(
                q.text, corpus, hierarchy ? &*hierarchy : nullptr, o.pipeline,
                cache ? &*cache : nullptr);
            write_expansions(std::cout, q.id, expansions, corpus);
        }
        return 0;
    }

    if (rank_cmd->parsed()) {
        Corpus corpus = load_corpus_checked(o.corpus_path);
        std::optional<ConceptHierarchy> hierarchy;
        if (!o.hierarchy_path.empty())
            hierarchy = ConceptHierarchy::load(o.hierarchy_path);
        auto cache = make_cache(o);
        auto queries = gather_queries(query_arg, query_id, queries_file);

        if (baseline == "lm") {
            for (const auto& q : queries) {
                auto terms = segment_query(q.text, corpus,
                                           hierarchy ? &*hierarchy : nullptr);
                auto ranking = rank_candidates_lm(terms, corpus, o.pipeline.smoothing);
                write_trec_run(std::cout, q.id, ranking, run_tag + "-lm", limit);
                if (explain)
                    for (std::size_t i = 0; i < std::min<std::size_t>(limit, ranking.size()); ++i)
                        std::cerr << "explain\t" << q.id << '\t' << ranking[i].author_id
                                  << "\tscore=" << ranking[i].score << '\n';
            }
            return 0;
        }

        if (queries.size() > 1 && o.jobs > 1 && dump_network_dir.empty() && !explain) {
            // batch mode: rankings computed in parallel, emitted in query order
            auto results = batch_rank(queries, corpus,
                                      hierarchy ? &*hierarchy : nullptr, o.pipeline,
                                      cache ? &*cache : nullptr, o.jobs);
            for (const auto& [qid, ranking] : results) {
                if (ranking.empty())
                    std::cerr << "rank: query " << qid
                              << " has an empty relevance network\n";
                write_trec_run(std::cout, qid, ranking, run_tag, limit);
            }
            return 0;
        }

        for (const auto& q : queries) {
            RankDiagnostics diag;
            std::vector<ScoredAuthor> ranking;
            auto expansions = pipeline_expansions(q.text, corpus,
                                                  hierarchy ? &*hierarchy : nullptr,
                                                  o.pipeline, cache ? &*cache : nullptr);
            auto dq = relevant_docs(expansions, corpus);
            diag.expansions = expansions;
            diag.relevant_docs = dq.size();
            if (!dq.empty()) {
                auto net = build_network(dq, corpus, o.pipeline.network);
                if (!dump_network_dir.empty())
                    export_network(net, corpus, dump_network_dir + "/" + q.id);
                ranking = rank_network(net, o.pipeline.walk, corpus, &diag);
            }
            if (ranking.empty())
                std::cerr << "rank: query " << q.id << " has an empty relevance network\n";
            write_trec_run(std::cout, q.id, ranking, run_tag, limit);
            std::cerr << "iterations=" << diag.iterations << " delta=" << diag.delta
                      << '\n';
            if (!diag.converged)
                std::cerr << "rank: query " << q.id
                          << " did not converge within the iteration budget\n";
            if (explain) {
                std::cerr << "explain\t" << q.id << "\trelevant_docs="
                          << diag.relevant_docs << "\tpapers=" << diag.papers
                          << "\tauthors=" << diag.authors << "\tvenues=" << diag.venues
                          << '\n';
                for (std::size_t i = 0; i < std::min<std::size_t>(limit, ranking.size()); ++i)
                    std::cerr << "explain\t" << q.id << '\t' << ranking[i].author_id
                              << "\tscore=" << ranking[i].score << '\n';
            }
        }
        return 0;
    }

    if (eval_cmd->parsed()) {
        auto run = RunFile::load(run_path);
        auto qrels = Qrels::load(qrels_path);
        EvalOptions opt{per_query, ideal_truncate};
        auto res = evaluate(run, qrels, opt);
        write_metrics(std::cout, std::cerr, res, opt);
        return 0;
    }

    if (sweep_cmd->parsed()) {
        Corpus corpus = load_corpus_checked(o.corpus_path);
        std::optional<ConceptHierarchy> hierarchy;
        if (!o.hierarchy_path.empty())
            hierarchy = ConceptHierarchy::load(o.hierarchy_path);
        auto cache = make_cache(o);
        auto queries = load_queries(queries_file);
        auto qrels = Qrels::load(qrels_path);

        std::vector<double> grid;
        std::stringstream ss(values_arg);
        std::string piece;
        while (std::getline(ss, piece, ','))
            if (!piece.empty()) grid.push_back(std::stod(piece));
        if (grid.empty()) throw CLI::ValidationError("--values: empty grid");

        auto points = sweep_lambda(lambda_name, grid, queries, qrels, corpus,
                                   hierarchy ? &*hierarchy : nullptr, o.pipeline,
                                   metric_name, cache ? &*cache : nullptr, o.jobs);
        char buf[64];
        for (const auto& p : points) {
            std::snprintf(buf, sizeof(buf), "%g\t%s\t%.6f", p.value, p.metric.c_str(),
                          p.score);
            std::cout << "lambda_" << p.lambda_name << '\t' << buf << '\n';
        }
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
