#pragma once

#include <span>
#include <string>
#include <vector>

#include "efind/corpus.hpp"

namespace efind {

struct SmoothingConfig {
    double beta = 0.5;   // weight of the document model vs the background model
};

struct ScoredAuthor {
    std::string author_id;
    double score = 0.0;
};

/// Citation prior ln(e + c_d); always >= 1, left unnormalized.
double doc_prior(const Document& d);

/// beta * P(t|d) + (1-beta) * P_b(t). Unknown terms score 0.
double smoothed_term_prob(std::string_view term, const Document& d,
                          const Corpus& corpus, const SmoothingConfig& cfg);

/// Query generation likelihood exp(sum_t P(t|q) log P(t|theta_d)), evaluated
/// in log space; 0 as soon as any smoothed term probability vanishes.
double query_likelihood(std::span<const std::string> query, const Document& d,
                        const Corpus& corpus, const SmoothingConfig& cfg);

/// Document-based candidate ranking:
/// score(a) = sum_{d authored by a} 1/|A_d| * P(q|d) * prior(d).
/// Authors with zero score are dropped; ties break by ascending author id.
std::vector<ScoredAuthor> rank_candidates_lm(std::span<const std::string> query,
                                             const Corpus& corpus,
                                             const SmoothingConfig& cfg);

/// Same, with caller-supplied per-document priors (indexed by doc index).
std::vector<ScoredAuthor> rank_candidates_lm(std::span<const std::string> query,
                                             const Corpus& corpus,
                                             const SmoothingConfig& cfg,
                                             std::span<const double> priors);

} // namespace efind
