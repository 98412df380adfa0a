#include <benchmark/benchmark.h>

#include "efind/embed.hpp"
#include "synthetic.hpp"

using namespace efind;

namespace {

const Corpus& bench_corpus() {
    static Corpus c = testing::two_cluster_corpus(300, 5);
    return c;
}

void BM_TrainEpoch(benchmark::State& state) {
    const auto& c = bench_corpus();
    EmbedConfig cfg;
    cfg.dim = static_cast<std::size_t>(state.range(0));
    cfg.epochs = 1;
    cfg.seed = 3;
    auto w = uniform_weights(c);
    for (auto _ : state) {
        auto table = train(c, w, cfg);
        benchmark::DoNotOptimize(table);
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(c.total_tokens()));
}
BENCHMARK(BM_TrainEpoch)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_PairUpdate(benchmark::State& state) {
    EmbeddingTable table(64, static_cast<std::size_t>(state.range(0)));
    Rng rng(17);
    for (TermId t = 0; t < 64; ++t)
        for (auto& x : table.target(t)) x = rng.uniform(-0.1, 0.1);
    TermId negs[] = {7, 13, 21, 33, 41};
    for (auto _ : state) {
        double loss = pair_update(1, 2, negs, table, 0.01);
        benchmark::DoNotOptimize(loss);
    }
}
BENCHMARK(BM_PairUpdate)->Arg(50)->Arg(300);

void BM_Knn(benchmark::State& state) {
    const auto& c = bench_corpus();
    EmbedConfig cfg;
    cfg.dim = 50;
    cfg.epochs = 1;
    cfg.seed = 3;
    static EmbeddingTable table = train(c, uniform_weights(c), cfg);
    for (auto _ : state) {
        auto n = knn(0, 30, table);
        benchmark::DoNotOptimize(n);
    }
}
BENCHMARK(BM_Knn);

} // namespace
