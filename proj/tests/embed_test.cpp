#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>

#include "efind/embed.hpp"
#include "efind/rng.hpp"
#include "synthetic.hpp"

using namespace efind;

namespace {

Corpus tiny_corpus() {
    std::vector<DocumentRecord> recs(2);
    recs[0] = {"d1", "red green blue red", "", {"x"}, "", 0, {}, std::nullopt};
    recs[1] = {"d2", "cat dog cat", "", {"x"}, "", 0, {}, std::nullopt};
    return build_corpus(recs);
}

EmbeddingTable random_table(std::size_t vocab, std::size_t dim, std::uint64_t seed) {
    EmbeddingTable t(vocab, dim);
    Rng rng(seed);
    for (TermId i = 0; i < vocab; ++i) {
        for (auto& x : t.target(i)) x = rng.uniform(-1.0, 1.0);
        for (auto& x : t.context(i)) x = rng.uniform(-1.0, 1.0);
    }
    return t;
}

} // namespace

TEST_CASE("pair loss at zero dot products") {
    Corpus c = tiny_corpus();
    EmbeddingTable t(c.vocabulary().size(), 4);   // all zeros
    CHECK(pair_loss(0, 1, {}, t) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    TermId negs[] = {2};
    CHECK(pair_loss(0, 1, negs, t) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
    const std::size_t vocab = 12, dim = 4;
    Rng pick(99);
    for (int rep = 0; rep < 100; ++rep) {
        auto table = random_table(vocab, dim, 1000 + rep);
        TermId u = static_cast<TermId>(pick.uniform_int(vocab));
        TermId c = static_cast<TermId>(pick.uniform_int(vocab));
        std::vector<TermId> negs;
        for (int g = 0; g < 2; ++g) {
            TermId n = static_cast<TermId>(pick.uniform_int(vocab));
            if (n != u) negs.push_back(n);
        }

        PairGradients grads;
        pair_loss(u, c, negs, table, &grads);

        const double h = 1e-4;
        auto check_close = [](double analytic, double numeric) {
            double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            CHECK(std::abs(analytic - numeric) / denom < 1e-5);
        };

        for (const auto& [term, grad] : grads.target) {
            for (std::size_t i = 0; i < dim; ++i) {
                auto t2 = table;
                t2.target(term)[i] += h;
                double up = pair_loss(u, c, negs, t2);
                t2.target(term)[i] -= 2 * h;
                double down = pair_loss(u, c, negs, t2);
                check_close(grad[i], (up - down) / (2 * h));
            }
        }
        for (std::size_t i = 0; i < dim; ++i) {
            auto t2 = table;
            t2.context(c)[i] += h;
            double up = pair_loss(u, c, negs, t2);
            t2.context(c)[i] -= 2 * h;
            double down = pair_loss(u, c, negs, t2);
            check_close(grads.context[i], (up - down) / (2 * h));
        }
    }
}

TEST_CASE("duplicate negatives accumulate into one gradient entry") {
    auto table = random_table(6, 3, 5);
    TermId negs[] = {4, 4};
    PairGradients grads;
    pair_loss(0, 1, negs, table, &grads);
    std::set<TermId> seen;
    for (const auto& [term, grad] : grads.target) CHECK(seen.insert(term).second);
}

TEST_CASE("pair_update applies the pair_loss gradients") {
    auto table = random_table(8, 5, 42);
    TermId u = 0, c = 1;
    std::vector<TermId> negs = {3, 5};
    const double lr = 0.1;

    PairGradients grads;
    double loss = pair_loss(u, c, negs, table, &grads);

    auto manual = table;
    for (const auto& [term, grad] : grads.target) {
        auto row = manual.target(term);
        for (std::size_t i = 0; i < row.size(); ++i) row[i] -= lr * grad[i];
    }
    {
        auto row = manual.context(c);
        for (std::size_t i = 0; i < row.size(); ++i) row[i] -= lr * grads.context[i];
    }

    auto updated = table;
    double loss2 = pair_update(u, c, negs, updated, lr);
    CHECK(loss2 == doctest::Approx(loss).epsilon(1e-12));
    for (TermId t = 0; t < 8; ++t)
        for (std::size_t i = 0; i < 5; ++i)
            CHECK(updated.target(t)[i] ==
                  doctest::Approx(manual.target(t)[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(updated.context(c)[i] ==
              doctest::Approx(manual.context(c)[i]).epsilon(1e-12));
}

TEST_CASE("noise distribution sums to one and respects weights") {
    Corpus c = tiny_corpus();
    auto uniform = uniform_weights(c);
    auto noise = noise_distribution(c, uniform, 0.75);
    CHECK(std::accumulate(noise.begin(), noise.end(), 0.0) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // zero weight on d2 removes its exclusive terms from the noise support
    DocWeights skew{{1.0, 0.0}};
    auto noise2 = noise_distribution(c, skew, 0.75);
    CHECK(std::accumulate(noise2.begin(), noise2.end(), 0.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(noise2[*c.vocabulary().find("cat")] == 0.0);
    CHECK(noise2[*c.vocabulary().find("red")] > 0.0);
}

TEST_CASE("training rejects degenerate inputs") {
    Corpus c = tiny_corpus();
    EmbedConfig cfg;
    DocWeights zeros{{0.0, 0.0}};
    CHECK_THROWS_AS(train(c, zeros, cfg), std::invalid_argument);
    DocWeights wrong{{1.0}};
    CHECK_THROWS_AS(train(c, wrong, cfg), std::invalid_argument);
}

TEST_CASE("training with a fixed seed is reproducible") {
    Corpus c = tiny_corpus();
    EmbedConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 2;
    cfg.seed = 123;
    auto t1 = train(c, uniform_weights(c), cfg);
    auto t2 = train(c, uniform_weights(c), cfg);
    for (TermId t = 0; t < c.vocabulary().size(); ++t)
        for (std::size_t i = 0; i < cfg.dim; ++i)
            CHECK(t1.target(t)[i] == t2.target(t)[i]);
}

TEST_CASE("zero weights restrict sampling to the support") {
    Corpus c = testing::two_cluster_corpus(20, 3);
    DocWeights w{std::vector<double>(c.num_docs(), 0.0)};
    for (std::size_t i = 0; i < 10; ++i) w.w[i] = 1.0;

    EmbedConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 1;
    cfg.seed = 5;
    std::vector<DocIndex> sampled;
    TrainHooks hooks;
    hooks.sampled_docs = &sampled;
    train(c, w, cfg, &hooks);

    CHECK(sampled.size() == c.num_docs());   // one epoch of |D| draws
    for (DocIndex d : sampled) CHECK(d < 10);
}

TEST_CASE("two-cluster corpus separates after training") {
    Corpus c = testing::two_cluster_corpus(200, 7);
    EmbedConfig cfg;
    cfg.dim = 16;
    cfg.epochs = 3;
    cfg.window = 4;
    cfg.seed = 9;
    auto table = train(c, uniform_weights(c), cfg);

    std::vector<TermId> a_terms, b_terms;
    for (TermId t = 0; t < c.vocabulary().size(); ++t) {
        const auto& name = c.vocabulary().term(t);
        if (name.rfind("alpha", 0) == 0) a_terms.push_back(t);
        else if (name.rfind("beta", 0) == 0) b_terms.push_back(t);
    }
    REQUIRE(a_terms.size() == 10);
    REQUIRE(b_terms.size() == 10);

    double intra = 0.0, inter = 0.0;
    std::size_t n_intra = 0, n_inter = 0;
    for (std::size_t i = 0; i < a_terms.size(); ++i) {
        for (std::size_t j = i + 1; j < a_terms.size(); ++j) {
            intra += cosine(a_terms[i], a_terms[j], table);
            ++n_intra;
        }
        for (TermId b : b_terms) {
            inter += cosine(a_terms[i], b, table);
            ++n_inter;
        }
    }
    CHECK(intra / static_cast<double>(n_intra) >
          inter / static_cast<double>(n_inter));
}

TEST_CASE("loss on a fixed pair stream is non-increasing over the first epochs") {
    Corpus c = testing::two_cluster_corpus(200, 7);

    // freeze an evaluation stream: window pairs from a fixed document sample
    // plus fixed negatives
    struct EvalPair {
        TermId u, c;
        std::vector<TermId> negs;
    };
    std::vector<EvalPair> stream;
    Rng rng(81);
    for (int k = 0; k < 50; ++k) {
        const auto& d = c.doc(static_cast<DocIndex>(rng.uniform_int(c.num_docs())));
        for (std::size_t i = 0; i + 1 < d.tokens.size(); ++i) {
            EvalPair p{d.tokens[i], d.tokens[i + 1], {}};
            for (int g = 0; g < 3; ++g) {
                auto n = static_cast<TermId>(rng.uniform_int(c.vocabulary().size()));
                if (n != p.u) p.negs.push_back(n);
            }
            stream.push_back(std::move(p));
        }
    }
    auto stream_loss = [&](const EmbeddingTable& t) {
        double total = 0.0;
        for (const auto& p : stream) total += pair_loss(p.u, p.c, p.negs, t);
        return total / static_cast<double>(stream.size());
    };

    EmbedConfig cfg;
    cfg.dim = 16;
    cfg.epochs = 3;
    cfg.seed = 17;
    std::vector<double> losses;
    TrainHooks hooks;
    hooks.on_epoch = [&](std::size_t, double, const EmbeddingTable& t) {
        losses.push_back(stream_loss(t));
    };
    train(c, uniform_weights(c), cfg, &hooks);
    REQUIRE(losses.size() == 3);
    CHECK(losses[0] >= losses[1]);
    CHECK(losses[1] >= losses[2]);
}

TEST_CASE("cosine basics") {
    EmbeddingTable t(3, 2);
    t.target(0)[0] = 1.0; t.target(0)[1] = 0.0;
    t.target(1)[0] = 1.0; t.target(1)[1] = 1.0;
    t.target(2)[0] = 0.0; t.target(2)[1] = 1.0;
    CHECK(cosine(0, 0, t) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine(0, 2, t) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cosine(0, 1, t) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    EmbeddingTable zero(2, 2);
    CHECK(cosine(0, 1, zero) == 0.0);
}

TEST_CASE("knn ordering and boundaries") {
    EmbeddingTable t(3, 2);
    t.target(0)[0] = 1.0;  t.target(0)[1] = 0.0;
    t.target(1)[0] = 0.9;  t.target(1)[1] = 0.1;
    t.target(2)[0] = 0.0;  t.target(2)[1] = 1.0;

    auto top1 = knn(0, 1, t);
    REQUIRE(top1.size() == 1);
    CHECK(top1[0].term == 1);
    CHECK(top1[0].similarity == doctest::Approx(0.9 / std::sqrt(0.82)).epsilon(1e-9));

    auto all = knn(0, 99, t);            // k beyond vocab-1 returns everything else
    CHECK(all.size() == 2);
    for (const auto& n : all) CHECK(n.term != 0);
}

TEST_CASE("knn is invariant under uniform positive scaling") {
    auto t = random_table(10, 6, 31);
    auto before = knn(3, 5, t);
    for (TermId i = 0; i < 10; ++i)
        for (auto& x : t.target(i)) x *= 4.2;
    auto after = knn(3, 5, t);
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(before[i].term == after[i].term);
}

TEST_CASE("vector file round trip and validation") {
    Corpus c = tiny_corpus();
    auto table = random_table(c.vocabulary().size(), 4, 77);
    auto path = std::filesystem::temp_directory_path() / "embed_roundtrip.vec";
    save_embeddings(table, c, path.string());
    auto loaded = load_embeddings(c, path.string());
    for (TermId t = 0; t < c.vocabulary().size(); ++t)
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(loaded.target(t)[i] == doctest::Approx(table.target(t)[i]).epsilon(1e-15));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_embeddings(c, path.string()), DataError);
}
