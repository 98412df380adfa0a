#include <benchmark/benchmark.h>

#include "efind/rank.hpp"
#include "efind/rng.hpp"

using namespace efind;

namespace {

// random citation network at ranking scale
RelevanceNetwork big_network(std::size_t n_papers, std::size_t n_authors,
                             std::size_t n_venues, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Triple> pp, ap, vp;
    for (std::size_t p = 0; p < n_papers; ++p) {
        for (int e = 0; e < 5; ++e) {
            std::size_t q = rng.uniform_int(n_papers);
            if (q != p) pp.push_back({p, q, 1.0});
        }
        ap.push_back({rng.uniform_int(n_authors), p, 1.0});
        if (rng.uniform() < 0.5) ap.push_back({rng.uniform_int(n_authors), p, 1.0});
        vp.push_back({rng.uniform_int(n_venues), p, 1.0});
    }
    std::vector<DocIndex> papers(n_papers);
    std::vector<AuthorIndex> authors(n_authors);
    std::vector<VenueIndex> venues(n_venues);
    for (std::size_t i = 0; i < n_papers; ++i) papers[i] = static_cast<DocIndex>(i);
    for (std::size_t i = 0; i < n_authors; ++i) authors[i] = static_cast<AuthorIndex>(i);
    for (std::size_t i = 0; i < n_venues; ++i) venues[i] = static_cast<VenueIndex>(i);
    return derive_network(std::move(papers), std::move(authors), std::move(venues),
                          SparseMatrix::from_triples(n_papers, n_papers, std::move(pp)),
                          SparseMatrix::from_triples(n_authors, n_papers, std::move(ap)),
                          SparseMatrix::from_triples(n_venues, n_papers, std::move(vp)));
}

void BM_WalkStep(benchmark::State& state) {
    auto net = big_network(static_cast<std::size_t>(state.range(0)),
                           static_cast<std::size_t>(state.range(0)) / 2, 20, 11);
    auto trans = make_transitions(net);
    RankConfig cfg;
    auto s = init_state(net);
    for (auto _ : state) {
        s = step(s, trans, net, cfg);
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WalkStep)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_RunToConvergence(benchmark::State& state) {
    auto net = big_network(static_cast<std::size_t>(state.range(0)),
                           static_cast<std::size_t>(state.range(0)) / 2, 20, 11);
    RankConfig cfg;
    for (auto _ : state) {
        auto s = run(net, cfg);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_RunToConvergence)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_DeriveNetwork(benchmark::State& state) {
    auto base = big_network(static_cast<std::size_t>(state.range(0)), 400, 20, 13);
    for (auto _ : state) {
        auto net = derive_network(base.papers, base.authors, base.venues, base.r_pp,
                                  base.r_ap, base.r_vp);
        benchmark::DoNotOptimize(net);
    }
}
BENCHMARK(BM_DeriveNetwork)->Arg(1000)->Unit(benchmark::kMillisecond);

} // namespace
