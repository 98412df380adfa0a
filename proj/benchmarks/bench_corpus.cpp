#include <benchmark/benchmark.h>

#include "efind/corpus.hpp"

using namespace efind;

namespace {

void BM_Tokenize(benchmark::State& state) {
    const std::string text =
        "Locally-trained Term Embeddings for Expert Finding in "
        "Heterogeneous Bibliographic (Citation) Networks!";
    for (auto _ : state) {
        auto toks = tokenize(text);
        benchmark::DoNotOptimize(toks);
    }
}
BENCHMARK(BM_Tokenize);

void BM_BuildCorpus(benchmark::State& state) {
    std::vector<DocumentRecord> recs;
    for (int i = 0; i < 2000; ++i) {
        DocumentRecord r;
        r.id = "p" + std::to_string(i);
        r.title = "topic t" + std::to_string(i % 40) + " study of methods and systems";
        r.authors = {"a" + std::to_string(i % 300)};
        if (i % 3) r.cites = {"p" + std::to_string((i * 7) % 2000)};
        recs.push_back(std::move(r));
    }
    for (auto _ : state) {
        auto copy = recs;
        auto c = build_corpus(std::move(copy));
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(BM_BuildCorpus)->Unit(benchmark::kMillisecond);

} // namespace
