#include "efind/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace efind {

std::vector<ScoredAuthor> rank_network(const RelevanceNetwork& net,
                                       const RankConfig& cfg, const Corpus& corpus,
                                       RankDiagnostics* diag) {
    RankState state = run(net, cfg);
    if (diag) {
        diag->papers = net.papers.size();
        diag->authors = net.authors.size();
        diag->venues = net.venues.size();
        diag->iterations = state.iterations;
        diag->delta = state.last_delta;
        diag->converged = state.converged;
        diag->paper_scores = state.papers;
    }
    std::vector<ScoredAuthor> out;
    out.reserve(net.authors.size());
    for (std::size_t i = 0; i < net.authors.size(); ++i)
        out.push_back({corpus.author_id(net.authors[i]), state.authors[i]});
    std::sort(out.begin(), out.end(), [](const ScoredAuthor& x, const ScoredAuthor& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.author_id < y.author_id;
    });
    return out;
}

std::vector<ExpansionSet> pipeline_expansions(const std::string& query,
                                              const Corpus& corpus,
                                              const ConceptHierarchy* hierarchy,
                                              const PipelineConfig& cfg,
                                              const EmbeddingCache* cache) {
    auto terms = segment_query(query, corpus, cfg.expand ? hierarchy : nullptr);
    if (!cfg.expand) return exact_expansions(terms, corpus);
    return expand_query(terms, corpus, hierarchy, cfg.local, cfg.embed, cfg.smoothing,
                        cache);
}

std::vector<ScoredAuthor> rank_experts(const std::string& query, const Corpus& corpus,
                                       const ConceptHierarchy* hierarchy,
                                       const PipelineConfig& cfg,
                                       const EmbeddingCache* cache,
                                       RankDiagnostics* diag) {
    auto expansions = pipeline_expansions(query, corpus, hierarchy, cfg, cache);
    auto dq = relevant_docs(expansions, corpus);
    if (diag) {
        diag->expansions = expansions;
        diag->relevant_docs = dq.size();
    }
    if (dq.empty()) return {};
    auto net = build_network(dq, corpus, cfg.network);
    return rank_network(net, cfg.walk, corpus, diag);
}

double metric_value(const MetricsRow& row, const std::string& name) {
    if (name == "p@5") return row.p5;
    if (name == "p@10") return row.p10;
    if (name == "p@20") return row.p20;
    if (name == "ndcg@5") return row.ndcg5;
    if (name == "ndcg@10") return row.ndcg10;
    if (name == "ndcg@20") return row.ndcg20;
    if (name == "map" || name == "ap") return row.ap;
    if (name == "bpref") return row.bpref;
    throw std::invalid_argument("unknown metric: " + name);
}

std::vector<QueryText> load_queries(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot read queries file: " + path);
    std::vector<QueryText> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError("queries line " + std::to_string(lineno) +
                            ": expected query_id<TAB>text");
        out.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    return out;
}

namespace {

template <typename Fn>
void parallel_over_queries(std::size_t n, std::size_t jobs, Fn fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < jobs; ++w)
        threads.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : threads) t.join();
}

} // namespace

std::vector<std::pair<std::string, std::vector<ScoredAuthor>>> batch_rank(
    std::span<const QueryText> queries, const Corpus& corpus,
    const ConceptHierarchy* hierarchy, const PipelineConfig& cfg,
    const EmbeddingCache* cache, std::size_t jobs) {
    std::vector<std::pair<std::string, std::vector<ScoredAuthor>>> out(queries.size());
    parallel_over_queries(queries.size(), jobs, [&](std::size_t i) {
        out[i] = {queries[i].id,
                  rank_experts(queries[i].text, corpus, hierarchy, cfg, cache)};
    });
    return out;
}

std::vector<SweepPoint> sweep_lambda(const std::string& lambda_name,
                                     std::span<const double> grid,
                                     std::span<const QueryText> queries,
                                     const Qrels& qrels, const Corpus& corpus,
                                     const ConceptHierarchy* hierarchy,
                                     const PipelineConfig& cfg,
                                     const std::string& metric,
                                     const EmbeddingCache* cache, std::size_t jobs) {
    if (grid.empty()) throw std::invalid_argument("sweep: empty value grid");

    // expansions and networks are lambda-independent: build once per query
    struct PerQuery {
        std::string id;
        std::optional<RelevanceNetwork> net;
    };
    std::vector<PerQuery> prepared(queries.size());
    parallel_over_queries(queries.size(), jobs, [&](std::size_t i) {
        prepared[i].id = queries[i].id;
        auto expansions =
            pipeline_expansions(queries[i].text, corpus, hierarchy, cfg, cache);
        auto dq = relevant_docs(expansions, corpus);
        if (!dq.empty()) prepared[i].net = build_network(dq, corpus, cfg.network);
    });

    std::vector<SweepPoint> out;
    for (double value : grid) {
        RankConfig walk = cfg.walk;
        walk.lambda_pp = walk.lambda_pa = walk.lambda_pv = 1.0;
        walk.lambda_aa = walk.lambda_vv = 1.0;
        walk.set_lambda(lambda_name, value);

        RunFile run;
        for (auto& pq : prepared) {
            std::vector<RunEntry> entries;
            if (pq.net) {
                auto ranking = rank_network(*pq.net, walk, corpus);
                for (const auto& s : ranking) entries.push_back({s.author_id, s.score});
            }
            run.runs.emplace(pq.id, std::move(entries));
        }
        auto res = evaluate(run, qrels);
        out.push_back({lambda_name, value, metric, metric_value(res.mean, metric)});
    }
    return out;
}

} // namespace efind
