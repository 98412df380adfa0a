#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "efind/corpus.hpp"

namespace efind {

struct EmbedConfig {
    std::size_t dim = 100;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    double learning_rate = 0.025;
    double min_lr_fraction = 1e-4;   // linear decay floor, as a fraction of learning_rate
    double noise_exponent = 0.75;
    std::uint64_t seed = 1;
    std::size_t workers = 1;         // >1 trades determinism for speed (lock-free updates)
    std::size_t sample_size = 0;     // documents drawn per epoch; 0 = corpus size
};

/// Target and context vectors over the full vocabulary, row-major.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::size_t vocab_size, std::size_t dim)
        : dim_(dim), target_(vocab_size * dim, 0.0), context_(vocab_size * dim, 0.0) {}

    std::size_t dim() const { return dim_; }
    std::size_t vocab_size() const { return dim_ ? target_.size() / dim_ : 0; }

    std::span<double> target(TermId t) { return {target_.data() + t * dim_, dim_}; }
    std::span<const double> target(TermId t) const { return {target_.data() + t * dim_, dim_}; }
    std::span<double> context(TermId t) { return {context_.data() + t * dim_, dim_}; }
    std::span<const double> context(TermId t) const { return {context_.data() + t * dim_, dim_}; }

private:
    std::size_t dim_ = 0;
    std::vector<double> target_;
    std::vector<double> context_;
};

/// Per-document sampling weights (indexed by doc index).
struct DocWeights {
    std::vector<double> w;
};

DocWeights uniform_weights(const Corpus& corpus);

/// Noise distribution for negative sampling: unigram counts accumulated with
/// document weights, raised to `exponent` and renormalized. Sums to 1.
std::vector<double> noise_distribution(const Corpus& corpus, const DocWeights& weights,
                                       double exponent);

/// Analytic gradients of one (target, context, negatives) loss term.
/// Gradients for target-side vectors are keyed by term id, with duplicates
/// (e.g. a negative drawn twice) accumulated into a single entry.
struct PairGradients {
    std::vector<std::pair<TermId, std::vector<double>>> target;
    std::vector<double> context;   // w.r.t. the context vector of c
};

/// Negative-sampling loss for one pair:
///   -log sigma(b_u . b~_c) - sum_n log sigma(-b_n . b~_c)
/// When grads is non-null it receives exact analytic gradients.
double pair_loss(TermId u, TermId c, std::span<const TermId> negatives,
                 const EmbeddingTable& table, PairGradients* grads = nullptr);

/// One in-place SGD update for a pair, word2vec update order: target vectors
/// move against the old context vector, the context vector moves last.
/// Returns the pre-update loss.
double pair_update(TermId u, TermId c, std::span<const TermId> negatives,
                   EmbeddingTable& table, double lr);

struct TrainStats {
    std::vector<double> epoch_mean_loss;
    std::size_t pairs_processed = 0;
};

struct TrainHooks {
    /// Called after each epoch with that epoch's mean pair loss.
    std::function<void(std::size_t epoch, double mean_loss, const EmbeddingTable&)> on_epoch;
    /// When set, every sampled document index is appended (single-worker only).
    std::vector<DocIndex>* sampled_docs = nullptr;
};

/// Skip-gram training over documents drawn with replacement proportionally to
/// `weights`. Single worker + fixed seed is bit-reproducible.
EmbeddingTable train(const Corpus& corpus, const DocWeights& weights,
                     const EmbedConfig& cfg, const TrainHooks* hooks = nullptr,
                     TrainStats* stats = nullptr);

double cosine(TermId a, TermId b, const EmbeddingTable& table);

struct Neighbor {
    TermId term;
    double similarity;
};

/// k nearest terms by target-vector cosine, excluding t itself; descending
/// similarity, ties by ascending term id.
std::vector<Neighbor> knn(TermId t, std::size_t k, const EmbeddingTable& table);

/// Text vector file: "<vocab_size> <dim>" header then "term v1 ... vz" lines.
void save_embeddings(const EmbeddingTable& table, const Corpus& corpus,
                     const std::string& path);
EmbeddingTable load_embeddings(const Corpus& corpus, const std::string& path);

/// Disk cache of trained tables keyed by a caller-computed content hash.
/// Writes go through a temp file + rename, so concurrent producers of the
/// same key do not interleave.
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::string dir);
    std::optional<EmbeddingTable> load(const Corpus& corpus, std::uint64_t key) const;
    void store(std::uint64_t key, const EmbeddingTable& table, const Corpus& corpus) const;
    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    std::string path_for(std::uint64_t key) const;
};

/// FNV-1a over a canonical string; used for cache keys.
std::uint64_t fnv1a(std::string_view s);

} // namespace efind
