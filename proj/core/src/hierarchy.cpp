#include "efind/hierarchy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "efind/rng.hpp"

namespace efind {

std::string normalize_concept(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (char ch : name) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isspace(c))
            out.push_back('-');
        else
            out.push_back(static_cast<char>(std::tolower(c)));
    }
    // collapse runs of hyphens produced by multi-space names
    std::string collapsed;
    collapsed.reserve(out.size());
    for (char c : out) {
        if (c == '-' && !collapsed.empty() && collapsed.back() == '-') continue;
        collapsed.push_back(c);
    }
    return collapsed;
}

ConceptHierarchy ConceptHierarchy::from_edges(
    std::span<const std::pair<std::string, std::string>> edges) {
    ConceptHierarchy h;
    auto intern = [&](const std::string& raw) {
        std::string name = normalize_concept(raw);
        auto it = h.index_.find(name);
        if (it != h.index_.end()) return it->second;
        int id = static_cast<int>(h.names_.size());
        h.names_.push_back(name);
        h.parent_.push_back(-1);
        h.index_.emplace(h.names_.back(), id);
        return id;
    };
    for (const auto& [parent, child] : edges) {
        int p = intern(parent);
        int c = intern(child);
        if (h.parent_[c] != -1 && h.parent_[c] != p)
            throw DataError("hierarchy node has two parents: " + h.names_[c]);
        if (p == c) throw DataError("hierarchy self-edge: " + h.names_[c]);
        h.parent_[c] = p;
    }
    h.validate();
    return h;
}

ConceptHierarchy ConceptHierarchy::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot read hierarchy file: " + path);
    std::vector<std::pair<std::string, std::string>> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError("hierarchy line " + std::to_string(lineno) +
                            ": expected parent<TAB>child");
        edges.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    if (edges.empty()) throw DataError("empty hierarchy file: " + path);
    return from_edges(edges);
}

void ConceptHierarchy::validate() const {
    int roots = 0;
    for (std::size_t i = 0; i < parent_.size(); ++i) {
        if (parent_[i] == -1) {
            ++roots;
            const_cast<ConceptHierarchy*>(this)->root_ = static_cast<int>(i);
        }
    }
    if (roots != 1)
        throw DataError("hierarchy must have exactly one root, found " +
                        std::to_string(roots));
    // cycle check: every node must reach the root
    for (std::size_t i = 0; i < parent_.size(); ++i) {
        int cur = static_cast<int>(i);
        std::size_t hops = 0;
        while (cur != -1) {
            cur = parent_[cur];
            if (++hops > parent_.size())
                throw DataError("hierarchy contains a cycle through: " + names_[i]);
        }
    }
}

bool ConceptHierarchy::contains(std::string_view concept_name) const {
    return index_.count(normalize_concept(concept_name)) > 0;
}

const std::string& ConceptHierarchy::root() const { return names_.at(root_); }

std::vector<std::string> ConceptHierarchy::path_to_root(std::string_view concept_name) const {
    auto it = index_.find(normalize_concept(concept_name));
    if (it == index_.end())
        throw DataError("concept_name not in hierarchy: " + std::string(concept_name));
    std::vector<std::string> rev;
    int cur = it->second;
    while (cur != -1) {
        rev.push_back(names_[cur]);
        cur = parent_[cur];
    }
    std::reverse(rev.begin(), rev.end());
    return rev;
}

std::size_t LocalConfig::dim(std::size_t level) const {
    return static_cast<std::size_t>(std::ceil(
        static_cast<double>(dim_base) / static_cast<double>(5 * level + 1)));
}

bool ExpansionSet::contains_neighbor(TermId t) const {
    for (const auto& n : neighbors)
        if (n.term == t) return true;
    return false;
}

double ExpansionSet::neighbor_similarity(TermId t) const {
    for (const auto& n : neighbors)
        if (n.term == t) return n.similarity;
    return 0.0;
}

ExpansionSet make_expansion(std::size_t level, std::string concept_name,
                            std::optional<TermId> concept_term,
                            std::vector<Neighbor> neighbors, const LocalConfig& cfg) {
    ExpansionSet e;
    e.level = level;
    e.concept_name = std::move(concept_name);
    e.concept_term = concept_term;
    e.neighbors = std::move(neighbors);
    if (concept_term) e.pruned.push_back(*concept_term);
    if (!e.neighbors.empty()) {
        const double cutoff = cfg.prune_ratio * e.neighbors.front().similarity;
        std::size_t kept = 0;
        for (const auto& n : e.neighbors) {
            if (kept >= cfg.prune_max) break;
            if (n.similarity < cutoff || n.similarity <= 0.0) break;
            if (concept_term && n.term == *concept_term) continue;
            e.pruned.push_back(n.term);
            ++kept;
        }
    }
    return e;
}

double expanded_term_prob(TermId t, const Document& d, const Corpus& corpus,
                          const ExpansionSet& exp, const LocalConfig& cfg) {
    double sim = std::max(0.0, exp.neighbor_similarity(t));
    return cfg.gamma * corpus.term_doc_prob(t, d) + (1.0 - cfg.gamma) * sim;
}

double doc_sampling_weight(const Document& d, const Corpus& corpus,
                           const ExpansionSet& exp, const LocalConfig& cfg,
                           const SmoothingConfig& smoothing) {
    if (exp.level == 0 || !exp.concept_term)
        return 1.0 / static_cast<double>(corpus.num_docs());
    TermId c = *exp.concept_term;
    return smoothing.beta * expanded_term_prob(c, d, corpus, exp, cfg) +
           (1.0 - smoothing.beta) * corpus.background_prob(c);
}

DocWeights level_weights(const Corpus& corpus, const ExpansionSet* exp,
                         const LocalConfig& cfg, const SmoothingConfig& smoothing) {
    DocWeights w;
    w.w.resize(corpus.num_docs());
    if (!exp) {
        double u = 1.0 / static_cast<double>(corpus.num_docs());
        std::fill(w.w.begin(), w.w.end(), u);
        return w;
    }
    for (DocIndex i = 0; i < corpus.num_docs(); ++i)
        w.w[i] = doc_sampling_weight(corpus.doc(i), corpus, *exp, cfg, smoothing);
    return w;
}

namespace {

std::uint64_t level_cache_key(const Corpus& corpus,
                              std::span<const std::string> path_prefix,
                              std::size_t level, const LocalConfig& cfg,
                              const EmbedConfig& ecfg,
                              const SmoothingConfig& smoothing) {
    std::ostringstream os;
    os << "corpus:" << corpus.num_docs() << ':' << corpus.total_tokens() << ':'
       << corpus.vocabulary().size();
    os << "|path:";
    for (const auto& c : path_prefix) os << c << '>';
    os << "|m:" << level << "|dim:" << ecfg.dim << "|win:" << ecfg.window
       << "|neg:" << ecfg.negatives << "|ep:" << ecfg.epochs
       << "|lr:" << ecfg.learning_rate << "|nx:" << ecfg.noise_exponent
       << "|seed:" << ecfg.seed << "|sub:" << ecfg.sample_size
       << "|gamma:" << cfg.gamma << "|k:" << cfg.k << "|beta:" << smoothing.beta;
    return fnv1a(os.str());
}

EmbeddingTable train_or_load(const Corpus& corpus, const DocWeights& weights,
                             const EmbedConfig& ecfg, std::uint64_t key,
                             const EmbeddingCache* cache) {
    if (cache) {
        if (auto t = cache->load(corpus, key)) return std::move(*t);
    }
    EmbeddingTable t = train(corpus, weights, ecfg);
    if (cache) cache->store(key, t, corpus);
    return t;
}

} // namespace

LocalTrainResult train_local(const std::string& concept_name, const Corpus& corpus,
                             const ConceptHierarchy& hierarchy, const LocalConfig& cfg,
                             const EmbedConfig& ecfg, const SmoothingConfig& smoothing,
                             const EmbeddingCache* cache) {
    auto path = hierarchy.path_to_root(concept_name);   // C_0 .. C_l
    const std::size_t l = path.size() - 1;

    std::vector<TermId> path_terms(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
        auto t = corpus.vocabulary().find(path[i]);
        if (!t) throw DataError("path concept_name missing from vocabulary: " + path[i]);
        path_terms[i] = *t;
    }

    LocalTrainResult result;
    DocWeights weights = level_weights(corpus, nullptr, cfg, smoothing);

    if (l == 0) {
        EmbedConfig e = ecfg;
        e.dim = cfg.dim(0);
        e.seed = mix_seed(ecfg.seed, 0);
        // level-0 weights are uniform, so the key carries no path prefix and
        // the global table is shared by every query
        auto key = level_cache_key(corpus, {}, 0, cfg, e, smoothing);
        result.table = train_or_load(corpus, weights, e, key, cache);
        result.levels.push_back(make_expansion(
            0, path[0], path_terms[0], knn(path_terms[0], cfg.k, result.table), cfg));
        return result;
    }

    for (std::size_t m = 0; m < l; ++m) {
        EmbedConfig e = ecfg;
        e.dim = cfg.dim(m);
        e.seed = mix_seed(ecfg.seed, m);
        auto prefix = m == 0 ? std::span<const std::string>{}
                             : std::span<const std::string>(path).first(m + 1);
        auto key = level_cache_key(corpus, prefix, m, cfg, e, smoothing);
        result.table = train_or_load(corpus, weights, e, key, cache);

        // expansion of C_{m+1} under the level-m table
        auto exp = make_expansion(m + 1, path[m + 1], path_terms[m + 1],
                                  knn(path_terms[m + 1], cfg.k, result.table), cfg);
        if (m + 1 < l)
            weights = level_weights(corpus, &exp, cfg, smoothing);
        result.levels.push_back(std::move(exp));
    }
    return result;
}

std::vector<std::string> segment_query(const std::string& query, const Corpus& corpus,
                                       const ConceptHierarchy* hierarchy) {
    auto toks = tokenize(query);
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < toks.size()) {
        std::size_t matched = 0;
        if (hierarchy) {
            // longest concept first: join up to 6 tokens with hyphens
            std::size_t max_len = std::min<std::size_t>(6, toks.size() - i);
            for (std::size_t len = max_len; len >= 2; --len) {
                std::string joined = toks[i];
                for (std::size_t j = 1; j < len; ++j) joined += '-' + toks[i + j];
                if (hierarchy->contains(joined)) {
                    out.push_back(joined);
                    matched = len;
                    break;
                }
            }
        }
        if (!matched) {
            // a multi-token phrase may still be a vocabulary term even when
            // the hierarchy does not know it
            out.push_back(toks[i]);
            matched = 1;
        }
        i += matched;
    }
    return out;
}

std::vector<ExpansionSet> expand_query(std::span<const std::string> query_terms,
                                       const Corpus& corpus,
                                       const ConceptHierarchy* hierarchy,
                                       const LocalConfig& cfg, const EmbedConfig& ecfg,
                                       const SmoothingConfig& smoothing,
                                       const EmbeddingCache* cache) {
    std::vector<ExpansionSet> out;
    out.reserve(query_terms.size());
    std::optional<EmbeddingTable> global_table;   // shared by fallback terms
    for (const auto& raw : query_terms) {
        std::string term = normalize_concept(raw);
        auto term_id = corpus.vocabulary().find(term);

        if (!term_id) {
            // out-of-vocabulary query term: nothing to expand against
            ExpansionSet e;
            e.level = 0;
            e.concept_name = term;
            out.push_back(std::move(e));
            continue;
        }

        if (hierarchy && hierarchy->contains(term)) {
            auto local = train_local(term, corpus, *hierarchy, cfg, ecfg, smoothing,
                                     cache);
            out.push_back(std::move(local.levels.back()));
            continue;
        }

        // fallback: global-embedding expansion (level 0 semantics)
        if (!global_table) {
            EmbedConfig e = ecfg;
            e.dim = cfg.dim(0);
            e.seed = mix_seed(ecfg.seed, 0);
            DocWeights weights = level_weights(corpus, nullptr, cfg, smoothing);
            auto key = level_cache_key(corpus, {}, 0, cfg, e, smoothing);
            global_table = train_or_load(corpus, weights, e, key, cache);
        }
        out.push_back(
            make_expansion(0, term, *term_id, knn(*term_id, cfg.k, *global_table), cfg));
    }
    return out;
}

std::vector<ExpansionSet> exact_expansions(std::span<const std::string> query_terms,
                                           const Corpus& corpus) {
    std::vector<ExpansionSet> out;
    out.reserve(query_terms.size());
    for (const auto& raw : query_terms) {
        ExpansionSet e;
        e.level = 0;
        e.concept_name = normalize_concept(raw);
        e.concept_term = corpus.vocabulary().find(e.concept_name);
        if (e.concept_term) e.pruned.push_back(*e.concept_term);
        out.push_back(std::move(e));
    }
    return out;
}

void write_expansions(std::ostream& os, const std::string& query,
                      std::span<const ExpansionSet> expansions, const Corpus& corpus) {
    for (const auto& exp : expansions) {
        char buf[64];
        for (TermId t : exp.pruned) {
            double sim = exp.concept_term && t == *exp.concept_term
                             ? 1.0
                             : exp.neighbor_similarity(t);
            std::snprintf(buf, sizeof(buf), "%.6f", sim);
            os << query << '\t' << corpus.vocabulary().term(t) << '\t' << buf << '\t'
               << exp.level << '\n';
        }
    }
}

} // namespace efind
