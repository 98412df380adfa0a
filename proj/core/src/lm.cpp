#include "efind/lm.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace efind {

double doc_prior(const Document& d) {
    return std::log(std::exp(1.0) + static_cast<double>(d.citation_count));
}

double smoothed_term_prob(std::string_view term, const Document& d,
                          const Corpus& corpus, const SmoothingConfig& cfg) {
    auto t = corpus.vocabulary().find(term);
    if (!t) return 0.0;
    return cfg.beta * corpus.term_doc_prob(*t, d) +
           (1.0 - cfg.beta) * corpus.background_prob(*t);
}

double query_likelihood(std::span<const std::string> query, const Document& d,
                        const Corpus& corpus, const SmoothingConfig& cfg) {
    if (query.empty()) return 0.0;
    // within-query term frequencies P(t|q)
    std::map<std::string_view, std::size_t> tf;
    for (const auto& t : query) ++tf[t];
    const double qlen = static_cast<double>(query.size());

    double log_score = 0.0;
    for (const auto& [term, count] : tf) {
        double p = smoothed_term_prob(term, d, corpus, cfg);
        if (p <= 0.0) return 0.0;
        log_score += (static_cast<double>(count) / qlen) * std::log(p);
    }
    return std::exp(log_score);
}

std::vector<ScoredAuthor> rank_candidates_lm(std::span<const std::string> query,
                                             const Corpus& corpus,
                                             const SmoothingConfig& cfg,
                                             std::span<const double> priors) {
    std::vector<double> scores(corpus.num_authors(), 0.0);
    // fixed doc-index order keeps the floating-point sums deterministic
    for (DocIndex i = 0; i < corpus.num_docs(); ++i) {
        const Document& d = corpus.doc(i);
        if (d.authors.empty()) continue;
        double l = query_likelihood(query, d, corpus, cfg);
        if (l <= 0.0) continue;
        double contrib = l * priors[i] / static_cast<double>(d.authors.size());
        for (AuthorIndex a : d.authors) scores[a] += contrib;
    }

    std::vector<ScoredAuthor> out;
    for (AuthorIndex a = 0; a < scores.size(); ++a)
        if (scores[a] > 0.0) out.push_back({corpus.author_id(a), scores[a]});
    std::sort(out.begin(), out.end(), [](const ScoredAuthor& x, const ScoredAuthor& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.author_id < y.author_id;
    });
    return out;
}

std::vector<ScoredAuthor> rank_candidates_lm(std::span<const std::string> query,
                                             const Corpus& corpus,
                                             const SmoothingConfig& cfg) {
    std::vector<double> priors(corpus.num_docs());
    for (DocIndex i = 0; i < corpus.num_docs(); ++i)
        priors[i] = doc_prior(corpus.doc(i));
    return rank_candidates_lm(query, corpus, cfg, priors);
}

} // namespace efind
