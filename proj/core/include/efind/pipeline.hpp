#pragma once

#include <optional>
#include <string>
#include <vector>

#include "efind/eval.hpp"
#include "efind/hierarchy.hpp"
#include "efind/network.hpp"
#include "efind/rank.hpp"

namespace efind {

struct PipelineConfig {
    SmoothingConfig smoothing;
    EmbedConfig embed;
    LocalConfig local;
    RankConfig walk;
    NetworkOptions network;
    bool expand = true;        // false reproduces the exact-match baseline
    std::string run_tag = "efind";
};

struct RankDiagnostics {
    std::vector<ExpansionSet> expansions;
    std::size_t relevant_docs = 0;
    std::size_t papers = 0, authors = 0, venues = 0;
    std::size_t iterations = 0;
    double delta = 0.0;
    bool converged = true;
    std::vector<double> paper_scores;   // aligned with the network's paper list
};

/// Author ranking from an already-built network (descending author score,
/// ties by ascending author id).
std::vector<ScoredAuthor> rank_network(const RelevanceNetwork& net,
                                       const RankConfig& cfg, const Corpus& corpus,
                                       RankDiagnostics* diag = nullptr);

/// Expansion sets for a raw query string under the pipeline's expansion
/// policy (hierarchy-guided when enabled, singleton otherwise).
std::vector<ExpansionSet> pipeline_expansions(const std::string& query,
                                              const Corpus& corpus,
                                              const ConceptHierarchy* hierarchy,
                                              const PipelineConfig& cfg,
                                              const EmbeddingCache* cache = nullptr);

/// Full pipeline: expand -> relevant docs -> network -> coupled walk.
/// An empty relevance network yields an empty ranking, not an error.
std::vector<ScoredAuthor> rank_experts(const std::string& query, const Corpus& corpus,
                                       const ConceptHierarchy* hierarchy,
                                       const PipelineConfig& cfg,
                                       const EmbeddingCache* cache = nullptr,
                                       RankDiagnostics* diag = nullptr);

/// "p@5" / "p@10" / "p@20" / "ndcg@5" / "ndcg@10" / "ndcg@20" / "map" / "bpref"
double metric_value(const MetricsRow& row, const std::string& name);

struct QueryText {
    std::string id;
    std::string text;
};

/// TSV: query_id <TAB> query text.
std::vector<QueryText> load_queries(const std::string& path);

/// Rankings for a batch of queries, in input order. `jobs` bounds worker
/// threads; outputs are merged deterministically regardless of it.
std::vector<std::pair<std::string, std::vector<ScoredAuthor>>> batch_rank(
    std::span<const QueryText> queries, const Corpus& corpus,
    const ConceptHierarchy* hierarchy, const PipelineConfig& cfg,
    const EmbeddingCache* cache = nullptr, std::size_t jobs = 1);

struct SweepPoint {
    std::string lambda_name;
    double value = 0.0;
    std::string metric;
    double score = 0.0;
};

/// Re-ranks every query for each grid value of one lambda (the others pinned
/// to 1) and reports the mean of the requested metric. Expansions and
/// networks are built once per query and shared across the grid.
std::vector<SweepPoint> sweep_lambda(const std::string& lambda_name,
                                     std::span<const double> grid,
                                     std::span<const QueryText> queries,
                                     const Qrels& qrels, const Corpus& corpus,
                                     const ConceptHierarchy* hierarchy,
                                     const PipelineConfig& cfg,
                                     const std::string& metric = "p@10",
                                     const EmbeddingCache* cache = nullptr,
                                     std::size_t jobs = 1);

} // namespace efind
