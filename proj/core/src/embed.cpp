#include "efind/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "efind/rng.hpp"

namespace efind {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(sigmoid(x)) without overflow for large |x|
double log_sigmoid(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

DocWeights uniform_weights(const Corpus& corpus) {
    const auto n = corpus.num_docs();
    return DocWeights{std::vector<double>(n, n ? 1.0 / static_cast<double>(n) : 0.0)};
}

std::vector<double> noise_distribution(const Corpus& corpus, const DocWeights& weights,
                                       double exponent) {
    if (weights.w.size() != corpus.num_docs())
        throw std::invalid_argument("noise_distribution: weights do not cover the corpus");
    std::vector<double> counts(corpus.vocabulary().size(), 0.0);
    for (DocIndex i = 0; i < corpus.num_docs(); ++i) {
        double w = weights.w[i];
        if (w <= 0.0) continue;
        for (TermId t : corpus.doc(i).tokens) counts[t] += w;
    }
    double total = 0.0;
    for (auto& c : counts) {
        c = c > 0.0 ? std::pow(c, exponent) : 0.0;
        total += c;
    }
    if (total <= 0.0)
        throw std::invalid_argument("noise_distribution: no positive term mass");
    for (auto& c : counts) c /= total;
    return counts;
}

double pair_loss(TermId u, TermId c, std::span<const TermId> negatives,
                 const EmbeddingTable& table, PairGradients* grads) {
    auto bu = table.target(u);
    auto bc = table.context(c);
    const std::size_t z = table.dim();

    double pos_dot = dot(bu, bc);
    double loss = -log_sigmoid(pos_dot);

    std::vector<double> cgrad(z, 0.0);
    double gpos = sigmoid(pos_dot) - 1.0;   // d loss / d pos_dot
    for (std::size_t i = 0; i < z; ++i) cgrad[i] += gpos * bu[i];

    std::vector<std::pair<TermId, std::vector<double>>> tgrads;
    auto grad_for = [&](TermId t) -> std::vector<double>& {
        for (auto& [id, g] : tgrads)
            if (id == t) return g;
        tgrads.emplace_back(t, std::vector<double>(z, 0.0));
        return tgrads.back().second;
    };
    if (grads) {
        auto& g = grad_for(u);
        for (std::size_t i = 0; i < z; ++i) g[i] += gpos * bc[i];
    }

    for (TermId n : negatives) {
        auto bn = table.target(n);
        double nd = dot(bn, bc);
        loss -= log_sigmoid(-nd);
        double gneg = sigmoid(nd);          // d loss / d neg_dot
        for (std::size_t i = 0; i < z; ++i) cgrad[i] += gneg * bn[i];
        if (grads) {
            auto& g = grad_for(n);
            for (std::size_t i = 0; i < z; ++i) g[i] += gneg * bc[i];
        }
    }

    if (grads) {
        grads->target = std::move(tgrads);
        grads->context = std::move(cgrad);
    }
    return loss;
}

double pair_update(TermId u, TermId c, std::span<const TermId> negatives,
                   EmbeddingTable& table, double lr) {
    auto bu = table.target(u);
    auto bc = table.context(c);
    const std::size_t z = table.dim();

    // accumulate the context gradient against pre-update target vectors,
    // updating each target vector immediately against the old context
    static thread_local std::vector<double> cgrad;
    cgrad.assign(z, 0.0);

    double pos_dot = dot(bu, bc);
    double loss = -log_sigmoid(pos_dot);
    double gpos = sigmoid(pos_dot) - 1.0;
    for (std::size_t i = 0; i < z; ++i) {
        cgrad[i] += gpos * bu[i];
        bu[i] -= lr * gpos * bc[i];
    }
    for (TermId n : negatives) {
        auto bn = table.target(n);
        double nd = dot(bn, bc);
        loss -= log_sigmoid(-nd);
        double gneg = sigmoid(nd);
        for (std::size_t i = 0; i < z; ++i) {
            cgrad[i] += gneg * bn[i];
            bn[i] -= lr * gneg * bc[i];
        }
    }
    for (std::size_t i = 0; i < z; ++i) bc[i] -= lr * cgrad[i];
    return loss;
}

namespace {

struct EpochTotals {
    double loss = 0.0;
    std::size_t pairs = 0;
};

// Window pass over one document: every ordered (target=tok[i], context=tok[j])
// pair with 0 < |i-j| <= window.
EpochTotals document_pass(const Document& d, EmbeddingTable& table,
                          const EmbedConfig& cfg, const DiscreteSampler& noise,
                          Rng& rng, double lr) {
    EpochTotals totals;
    const auto& toks = d.tokens;
    const std::size_t n = toks.size();
    std::vector<TermId> negs;
    negs.reserve(cfg.negatives);
    for (std::size_t i = 0; i < n; ++i) {
        const TermId u = toks[i];
        const std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
        const std::size_t hi = std::min(n - 1, i + cfg.window);
        for (std::size_t j = lo; j <= hi; ++j) {
            if (j == i) continue;
            const TermId c = toks[j];
            negs.clear();
            for (std::size_t g = 0; g < cfg.negatives; ++g) {
                auto cand = static_cast<TermId>(noise.sample(rng));
                if (cand == u) continue;   // a negative equal to the positive target is skipped
                negs.push_back(cand);
            }
            totals.loss += pair_update(u, c, negs, table, lr);
            ++totals.pairs;
        }
    }
    return totals;
}

} // namespace

EmbeddingTable train(const Corpus& corpus, const DocWeights& weights,
                     const EmbedConfig& cfg, const TrainHooks* hooks,
                     TrainStats* stats) {
    if (corpus.num_docs() == 0) throw std::invalid_argument("train: empty corpus");
    if (weights.w.size() != corpus.num_docs())
        throw std::invalid_argument("train: weights do not cover the corpus");
    if (std::none_of(weights.w.begin(), weights.w.end(),
                     [](double w) { return w > 0.0; }))
        throw std::invalid_argument("train: all document weights are zero");
    if (cfg.dim == 0 || cfg.window == 0 || cfg.negatives == 0)
        throw std::invalid_argument("train: dim, window and negatives must be positive");

    const std::size_t vocab = corpus.vocabulary().size();
    EmbeddingTable table(vocab, cfg.dim);
    {
        Rng init_rng(mix_seed(cfg.seed, 0x1a17));
        const double half = 0.5 / static_cast<double>(cfg.dim);
        for (TermId t = 0; t < vocab; ++t) {
            auto row = table.target(t);
            for (auto& x : row) x = init_rng.uniform(-half, half);
        }
        // context vectors stay zero
    }

    const auto noise = noise_distribution(corpus, weights, cfg.noise_exponent);
    const DiscreteSampler noise_sampler(noise);
    const DiscreteSampler doc_sampler(weights.w);

    const std::size_t n_sub = cfg.sample_size ? cfg.sample_size : corpus.num_docs();
    const std::size_t total_draws = cfg.epochs * n_sub;
    const std::size_t workers = std::max<std::size_t>(1, cfg.workers);

    TrainStats local_stats;
    std::size_t processed_draws = 0;

    auto lr_at = [&](std::size_t draw_index) {
        double frac = 1.0 - static_cast<double>(draw_index) /
                                static_cast<double>(std::max<std::size_t>(1, total_draws));
        return cfg.learning_rate * std::max(cfg.min_lr_fraction, frac);
    };

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        EpochTotals epoch_totals;
        if (workers == 1) {
            Rng rng(mix_seed(cfg.seed, 0xe90c + epoch));
            for (std::size_t k = 0; k < n_sub; ++k) {
                auto di = static_cast<DocIndex>(doc_sampler.sample(rng));
                if (hooks && hooks->sampled_docs) hooks->sampled_docs->push_back(di);
                double lr = lr_at(processed_draws);
                auto t = document_pass(corpus.doc(di), table, cfg, noise_sampler, rng, lr);
                epoch_totals.loss += t.loss;
                epoch_totals.pairs += t.pairs;
                ++processed_draws;
            }
        } else {
            // lock-free concurrent updates; losses reduced per worker
            std::vector<EpochTotals> wt(workers);
            std::vector<std::thread> threads;
            const std::size_t base_draws = processed_draws;
            for (std::size_t w = 0; w < workers; ++w) {
                threads.emplace_back([&, w]() {
                    Rng rng(mix_seed(cfg.seed, 0xe90c + epoch * 131 + w + 1));
                    const std::size_t share =
                        n_sub / workers + (w < n_sub % workers ? 1 : 0);
                    for (std::size_t k = 0; k < share; ++k) {
                        auto di = static_cast<DocIndex>(doc_sampler.sample(rng));
                        double lr = lr_at(base_draws + k * workers + w);
                        auto t = document_pass(corpus.doc(di), table, cfg,
                                               noise_sampler, rng, lr);
                        wt[w].loss += t.loss;
                        wt[w].pairs += t.pairs;
                    }
                });
            }
            for (auto& t : threads) t.join();
            for (const auto& t : wt) {
                epoch_totals.loss += t.loss;
                epoch_totals.pairs += t.pairs;
            }
            processed_draws += n_sub;
        }

        double mean = epoch_totals.pairs
                          ? epoch_totals.loss / static_cast<double>(epoch_totals.pairs)
                          : 0.0;
        local_stats.epoch_mean_loss.push_back(mean);
        local_stats.pairs_processed += epoch_totals.pairs;
        if (hooks && hooks->on_epoch) hooks->on_epoch(epoch, mean, table);
    }

    if (stats) *stats = std::move(local_stats);
    return table;
}

double cosine(TermId a, TermId b, const EmbeddingTable& table) {
    auto va = table.target(a);
    auto vb = table.target(b);
    double na = std::sqrt(dot(va, va));
    double nb = std::sqrt(dot(vb, vb));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(va, vb) / (na * nb);
}

std::vector<Neighbor> knn(TermId t, std::size_t k, const EmbeddingTable& table) {
    std::vector<Neighbor> all;
    const auto vocab = static_cast<TermId>(table.vocab_size());
    all.reserve(vocab ? vocab - 1 : 0);
    for (TermId o = 0; o < vocab; ++o) {
        if (o == t) continue;
        all.push_back({o, cosine(t, o, table)});
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& x, const Neighbor& y) {
        if (x.similarity != y.similarity) return x.similarity > y.similarity;
        return x.term < y.term;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

void save_embeddings(const EmbeddingTable& table, const Corpus& corpus,
                     const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write embeddings: " + path);
    os << table.vocab_size() << ' ' << table.dim() << '\n';
    os.precision(17);
    for (TermId t = 0; t < table.vocab_size(); ++t) {
        os << corpus.vocabulary().term(t);
        for (double x : table.target(t)) os << ' ' << x;
        os << '\n';
    }
    if (!os) throw DataError("failed writing embeddings: " + path);
}

EmbeddingTable load_embeddings(const Corpus& corpus, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot read embeddings: " + path);
    std::size_t vocab = 0, dim = 0;
    is >> vocab >> dim;
    if (!is || dim == 0) throw DataError("bad embedding header: " + path);
    if (vocab != corpus.vocabulary().size())
        throw DataError("embedding vocabulary size mismatch: " + path);
    EmbeddingTable table(vocab, dim);
    std::string term;
    std::size_t lines = 0;
    for (std::size_t i = 0; i < vocab; ++i) {
        if (!(is >> term)) throw DataError("embedding file truncated: " + path);
        auto id = corpus.vocabulary().find(term);
        if (!id) throw DataError("embedding term not in vocabulary: " + term);
        auto row = table.target(*id);
        for (auto& x : row)
            if (!(is >> x)) throw DataError("embedding file truncated: " + path);
        ++lines;
    }
    if (lines != vocab) throw DataError("embedding header/line count mismatch: " + path);
    return table;
}

EmbeddingCache::EmbeddingCache(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string EmbeddingCache::path_for(std::uint64_t key) const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "emb_%016llx.vec",
                  static_cast<unsigned long long>(key));
    return (std::filesystem::path(dir_) / buf).string();
}

std::optional<EmbeddingTable> EmbeddingCache::load(const Corpus& corpus,
                                                   std::uint64_t key) const {
    auto p = path_for(key);
    if (!std::filesystem::exists(p)) return std::nullopt;
    return load_embeddings(corpus, p);
}

void EmbeddingCache::store(std::uint64_t key, const EmbeddingTable& table,
                           const Corpus& corpus) const {
    auto p = path_for(key);
    auto tmp = p + ".tmp" + std::to_string(::getpid());
    save_embeddings(table, corpus, tmp);
    std::filesystem::rename(tmp, p);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace efind
