#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "efind/embed.hpp"
#include "efind/lm.hpp"

namespace efind {

/// Lowercase, spaces to hyphens: the surface form used in hierarchy files and
/// the vocabulary's phrase-token convention.
std::string normalize_concept(std::string_view name);

/// Rooted tree of concept terms. Node names are stored normalized.
class ConceptHierarchy {
public:
    /// One edge per line: parent<TAB>child. Exactly one node may lack a parent.
    static ConceptHierarchy load(const std::string& path);
    static ConceptHierarchy from_edges(
        std::span<const std::pair<std::string, std::string>> edges);

    bool contains(std::string_view concept_name) const;
    std::size_t size() const { return names_.size(); }
    const std::string& root() const;

    /// C_0 ... C_l, starting at the root and ending at the concept.
    /// Throws DataError when the concept is not a node.
    std::vector<std::string> path_to_root(std::string_view concept_name) const;

private:
    std::vector<std::string> names_;
    std::vector<int> parent_;                      // -1 for the root
    std::unordered_map<std::string, int> index_;
    int root_ = -1;

    void validate() const;
};

struct LocalConfig {
    double gamma = 0.5;          // Eq. weight of the document model vs similarity
    std::size_t k = 30;          // neighbor-list size per concept
    std::size_t dim_base = 300;  // dim schedule: ceil(dim_base / (5m + 1))
    double prune_ratio = 0.5;    // keep neighbors with sim >= ratio * top similarity
    std::size_t prune_max = 10;  // cap on the pruned set, concept excluded

    std::size_t dim(std::size_t level) const;
};

/// Per-level query expansion: the concept, its raw neighbor list N_m under the
/// previous level's embeddings, and the pruned subset used for retrieval.
struct ExpansionSet {
    std::size_t level = 0;
    std::string concept_name;                 // normalized surface form
    std::optional<TermId> concept_term;  // unset only in the no-vocabulary fallback
    std::vector<Neighbor> neighbors;     // descending similarity
    std::vector<TermId> pruned;          // concept first, then kept neighbors

    bool contains_neighbor(TermId t) const;
    double neighbor_similarity(TermId t) const;   // 0 when absent
};

/// Builds an ExpansionSet from a raw neighbor list, applying the prune rule
/// (similarity >= prune_ratio * top-1, capped at prune_max) and placing the
/// concept itself first in the pruned set.
ExpansionSet make_expansion(std::size_t level, std::string concept_name,
                            std::optional<TermId> concept_term,
                            std::vector<Neighbor> neighbors, const LocalConfig& cfg);

/// gamma * P(t|d) + (1-gamma) * max(sim,0) * 1(t in N_m).
double expanded_term_prob(TermId t, const Document& d, const Corpus& corpus,
                          const ExpansionSet& exp, const LocalConfig& cfg);

/// Document sampling weight for the next training level. Level 0 is uniform
/// 1/|D|; deeper levels smooth the expanded concept probability with the
/// corpus background: beta * P^m(C_m|d) + (1-beta) * P_b(C_m).
double doc_sampling_weight(const Document& d, const Corpus& corpus,
                           const ExpansionSet& exp, const LocalConfig& cfg,
                           const SmoothingConfig& smoothing);

/// All-document weights for one level (exp == nullptr means level 0).
DocWeights level_weights(const Corpus& corpus, const ExpansionSet* exp,
                         const LocalConfig& cfg, const SmoothingConfig& smoothing);

struct LocalTrainResult {
    EmbeddingTable table;              // table whose neighbors of q are final
    std::vector<ExpansionSet> levels;  // one per level m = 1..l (level 0 when l = 0)
};

/// Recursive local embedding training along the hierarchy path of `concept`.
/// Falls back to a single global pass when the concept is the root.
LocalTrainResult train_local(const std::string& concept_name, const Corpus& corpus,
                             const ConceptHierarchy& hierarchy, const LocalConfig& cfg,
                             const EmbedConfig& ecfg, const SmoothingConfig& smoothing,
                             const EmbeddingCache* cache = nullptr);

/// Splits a raw query into terms, preferring the longest hierarchy concept at
/// each position ("support vector machine" stays one concept when the
/// hierarchy knows it); remaining tokens pass through singly.
std::vector<std::string> segment_query(const std::string& query, const Corpus& corpus,
                                       const ConceptHierarchy* hierarchy);

/// One final-level expansion per query term. Terms outside the hierarchy (or
/// with a null hierarchy) expand against global embeddings; terms outside the
/// vocabulary yield a singleton expansion of themselves.
std::vector<ExpansionSet> expand_query(std::span<const std::string> query_terms,
                                       const Corpus& corpus,
                                       const ConceptHierarchy* hierarchy,
                                       const LocalConfig& cfg, const EmbedConfig& ecfg,
                                       const SmoothingConfig& smoothing,
                                       const EmbeddingCache* cache = nullptr);

/// Expansion sets with expansion disabled: one singleton {t} per query term.
std::vector<ExpansionSet> exact_expansions(std::span<const std::string> query_terms,
                                           const Corpus& corpus);

/// TSV export: query <TAB> term <TAB> similarity <TAB> level.
void write_expansions(std::ostream& os, const std::string& query,
                      std::span<const ExpansionSet> expansions, const Corpus& corpus);

} // namespace efind
