#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "efind/hierarchy.hpp"
#include "synthetic.hpp"

using namespace efind;

namespace {

ConceptHierarchy nlp_hierarchy() {
    std::vector<std::pair<std::string, std::string>> edges = {
        {"computer science", "natural language processing"},
        {"natural language processing", "information extraction"},
        {"computer science", "machine learning"},
    };
    return ConceptHierarchy::from_edges(edges);
}

} // namespace

TEST_CASE("concept normalization") {
    CHECK(normalize_concept("Information Extraction") == "information-extraction");
    CHECK(normalize_concept("a  b") == "a-b");
}

TEST_CASE("path to root") {
    auto h = nlp_hierarchy();
    CHECK(h.root() == "computer-science");

    auto path = h.path_to_root("information extraction");
    REQUIRE(path.size() == 3);
    CHECK(path[0] == "computer-science");
    CHECK(path[1] == "natural-language-processing");
    CHECK(path[2] == "information-extraction");

    CHECK(h.path_to_root("computer-science") ==
          std::vector<std::string>{"computer-science"});
    CHECK_THROWS_AS(h.path_to_root("astrology"), DataError);
}

TEST_CASE("hierarchy file loading and validation") {
    auto p = std::filesystem::temp_directory_path() / "hier.tsv";
    {
        std::ofstream os(p);
        os << "science\tphysics\n" << "science\tchemistry\n";
    }
    auto h = ConceptHierarchy::load(p.string());
    CHECK(h.size() == 3);
    CHECK(h.contains("Physics"));
    std::filesystem::remove(p);

    std::vector<std::pair<std::string, std::string>> two_roots = {{"a", "b"}, {"c", "d"}};
    CHECK_THROWS_AS(ConceptHierarchy::from_edges(two_roots), DataError);
    std::vector<std::pair<std::string, std::string>> cycle = {
        {"a", "b"}, {"b", "c"}, {"c", "a"}};
    CHECK_THROWS_AS(ConceptHierarchy::from_edges(cycle), DataError);
}

TEST_CASE("dimension schedule") {
    LocalConfig cfg;
    CHECK(cfg.dim(0) == 300);
    CHECK(cfg.dim(1) == 50);
    CHECK(cfg.dim(2) == 28);
}

TEST_CASE("expanded term probability follows the interpolation") {
    std::vector<DocumentRecord> recs(1);
    recs[0] = {"d1", "x x x x y", "", {"a"}, "", 0, {}, std::nullopt};
    Corpus c = build_corpus(recs);
    TermId x = *c.vocabulary().find("x");
    TermId y = *c.vocabulary().find("y");

    LocalConfig cfg;   // gamma = 0.5
    ExpansionSet exp;
    exp.level = 1;
    exp.concept_name = "q";
    exp.neighbors = {{x, 0.8}};

    // P(x|d) = 0.8: 0.5*0.8 + 0.5*0.8 = 0.8
    CHECK(expanded_term_prob(x, c.doc(0), c, exp, cfg) ==
          doctest::Approx(0.8).epsilon(1e-12));
    // y not in N_m: only the document half survives
    CHECK(expanded_term_prob(y, c.doc(0), c, exp, cfg) ==
          doctest::Approx(0.5 * 0.2).epsilon(1e-12));

    LocalConfig all_doc;
    all_doc.gamma = 1.0;
    CHECK(expanded_term_prob(x, c.doc(0), c, exp, all_doc) ==
          doctest::Approx(0.8).epsilon(1e-12));

    // negative similarities clamp to zero
    ExpansionSet neg = exp;
    neg.neighbors = {{y, -0.9}};
    CHECK(expanded_term_prob(y, c.doc(0), c, neg, cfg) ==
          doctest::Approx(0.5 * 0.2).epsilon(1e-12));
}

TEST_CASE("doc sampling weight") {
    std::vector<DocumentRecord> recs(4);
    for (int i = 0; i < 4; ++i)
        recs[i] = {"d" + std::to_string(i), i == 0 ? "q w" : "w w", "", {"a"}, "", 0,
                   {}, std::nullopt};
    Corpus c = build_corpus(recs);
    LocalConfig cfg;
    SmoothingConfig smoothing;

    ExpansionSet level0;
    level0.level = 0;
    level0.concept_name = "q";
    level0.concept_term = c.vocabulary().find("q");
    for (const auto& d : c.docs())
        CHECK(doc_sampling_weight(d, c, level0, cfg, smoothing) ==
              doctest::Approx(0.25).epsilon(1e-12));

    ExpansionSet level1 = level0;
    level1.level = 1;
    TermId q = *c.vocabulary().find("q");
    // doc 0 contains q: beta*(gamma*P(q|d)) + (1-beta)*P_b(q)
    double expect0 = 0.5 * (0.5 * 0.5) + 0.5 * c.background_prob(q);
    CHECK(doc_sampling_weight(c.doc(0), c, level1, cfg, smoothing) ==
          doctest::Approx(expect0).epsilon(1e-12));
    // docs without q sit at the background floor
    double floor = 0.5 * c.background_prob(q);
    CHECK(doc_sampling_weight(c.doc(1), c, level1, cfg, smoothing) ==
          doctest::Approx(floor).epsilon(1e-12));
    CHECK(floor > 0.0);

    auto w = level_weights(c, &level1, cfg, smoothing);
    for (double x : w.w) CHECK(x > 0.0);
}

TEST_CASE("expansion pruning keeps the concept and applies the cutoff") {
    LocalConfig cfg;
    cfg.prune_ratio = 0.5;
    cfg.prune_max = 2;
    std::vector<Neighbor> neighbors = {{5, 0.9}, {6, 0.5}, {7, 0.44}, {8, 0.1}};
    auto e = make_expansion(1, "c", TermId{3}, neighbors, cfg);
    REQUIRE(e.pruned.size() == 3);
    CHECK(e.pruned[0] == 3);              // the concept itself, always first
    CHECK(e.pruned[1] == 5);
    CHECK(e.pruned[2] == 6);              // 0.44 < 0.5*0.9 cut, 0.1 far below

    cfg.prune_max = 1;
    auto e2 = make_expansion(1, "c", TermId{3}, neighbors, cfg);
    CHECK(e2.pruned == std::vector<TermId>{3, 5});
}

TEST_CASE("train_local on the planted hierarchy localizes the neighborhood") {
    auto fix = testing::hierarchy_corpus(400, 11);
    auto h = ConceptHierarchy::from_edges(fix.edges);

    LocalConfig cfg;
    cfg.dim_base = 96;        // smaller than the paper schedule to keep this quick
    cfg.k = 30;
    EmbedConfig ecfg;
    ecfg.epochs = 6;
    ecfg.window = 4;
    ecfg.seed = 2024;
    SmoothingConfig smoothing;

    auto result = train_local("alpha-spec", fix.corpus, h, cfg, ecfg, smoothing);
    REQUIRE(result.levels.size() == 2);
    CHECK(result.levels[0].level == 1);
    CHECK(result.levels[0].concept_name == "alpha");
    CHECK(result.levels[1].level == 2);
    CHECK(result.levels[1].concept_name == "alpha-spec");

    const auto& c = fix.corpus;
    TermId fine = *c.vocabulary().find("alpha-fine");
    TermId generic = *c.vocabulary().find("common");
    auto rank_of = [&](const ExpansionSet& e, TermId t) {
        for (std::size_t i = 0; i < e.neighbors.size(); ++i)
            if (e.neighbors[i].term == t) return static_cast<long>(i);
        return static_cast<long>(e.neighbors.size());
    };
    const auto& final_exp = result.levels.back();
    CHECK(rank_of(final_exp, fine) < rank_of(final_exp, generic));

    // neighbor list is sorted by descending similarity
    for (std::size_t i = 1; i < final_exp.neighbors.size(); ++i)
        CHECK(final_exp.neighbors[i - 1].similarity >=
              final_exp.neighbors[i].similarity);
}

TEST_CASE("train_local depth one and missing-vocabulary errors") {
    auto fix = testing::hierarchy_corpus(60, 4);
    auto h = ConceptHierarchy::from_edges(fix.edges);
    LocalConfig cfg;
    cfg.dim_base = 16;
    cfg.k = 5;
    EmbedConfig ecfg;
    ecfg.epochs = 1;
    ecfg.seed = 3;
    SmoothingConfig smoothing;

    auto res = train_local("alpha", fix.corpus, h, cfg, ecfg, smoothing);
    REQUIRE(res.levels.size() == 1);
    CHECK(res.levels[0].concept_name == "alpha");
    CHECK(res.table.dim() == cfg.dim(0));

    auto root = train_local("research", fix.corpus, h, cfg, ecfg, smoothing);
    REQUIRE(root.levels.size() == 1);
    CHECK(root.levels[0].level == 0);

    std::vector<std::pair<std::string, std::string>> edges = fix.edges;
    edges.emplace_back("research", "astro-turf");   // not in the corpus text
    auto h2 = ConceptHierarchy::from_edges(edges);
    CHECK_THROWS_AS(
        train_local("astro-turf", fix.corpus, h2, cfg, ecfg, smoothing), DataError);
}

TEST_CASE("train_local is deterministic end to end") {
    auto fix = testing::hierarchy_corpus(60, 4);
    auto h = ConceptHierarchy::from_edges(fix.edges);
    LocalConfig cfg;
    cfg.dim_base = 12;
    cfg.k = 6;
    EmbedConfig ecfg;
    ecfg.epochs = 2;
    ecfg.seed = 404;
    SmoothingConfig smoothing;

    auto r1 = train_local("alpha-spec", fix.corpus, h, cfg, ecfg, smoothing);
    auto r2 = train_local("alpha-spec", fix.corpus, h, cfg, ecfg, smoothing);
    REQUIRE(r1.levels.size() == r2.levels.size());
    for (std::size_t m = 0; m < r1.levels.size(); ++m) {
        REQUIRE(r1.levels[m].neighbors.size() == r2.levels[m].neighbors.size());
        for (std::size_t i = 0; i < r1.levels[m].neighbors.size(); ++i) {
            CHECK(r1.levels[m].neighbors[i].term == r2.levels[m].neighbors[i].term);
            CHECK(r1.levels[m].neighbors[i].similarity ==
                  r2.levels[m].neighbors[i].similarity);
        }
    }
    // neighbors never leave the vocabulary
    for (const auto& lvl : r1.levels)
        for (const auto& n : lvl.neighbors)
            CHECK(n.term < fix.corpus.vocabulary().size());
}

TEST_CASE("embedding cache hits skip retraining") {
    auto fix = testing::hierarchy_corpus(60, 4);
    auto h = ConceptHierarchy::from_edges(fix.edges);
    LocalConfig cfg;
    cfg.dim_base = 12;
    cfg.k = 6;
    EmbedConfig ecfg;
    ecfg.epochs = 1;
    ecfg.seed = 11;
    SmoothingConfig smoothing;

    auto dir = std::filesystem::temp_directory_path() / "efind_cache_test";
    std::filesystem::remove_all(dir);
    EmbeddingCache cache(dir.string());

    auto r1 = train_local("alpha-spec", fix.corpus, h, cfg, ecfg, smoothing, &cache);
    auto files = std::distance(std::filesystem::directory_iterator(dir),
                               std::filesystem::directory_iterator{});
    CHECK(files == 2);   // one table per level

    auto r2 = train_local("alpha-spec", fix.corpus, h, cfg, ecfg, smoothing, &cache);
    for (TermId t = 0; t < fix.corpus.vocabulary().size(); ++t)
        for (std::size_t i = 0; i < r1.table.dim(); ++i)
            CHECK(r1.table.target(t)[i] ==
                  doctest::Approx(r2.table.target(t)[i]).epsilon(1e-15));
    std::filesystem::remove_all(dir);
}

TEST_CASE("query segmentation prefers the longest hierarchy concept") {
    std::vector<DocumentRecord> recs(1);
    recs[0] = {"d1", "support-vector-machine kernels boosting", "", {"a"}, "", 0, {},
               std::nullopt};
    Corpus c = build_corpus(recs);
    std::vector<std::pair<std::string, std::string>> edges = {
        {"machine-learning", "support-vector-machine"},
        {"machine-learning", "boosting"},
    };
    auto h = ConceptHierarchy::from_edges(edges);

    auto terms = segment_query("support vector machine boosting", c, &h);
    CHECK(terms == std::vector<std::string>{"support-vector-machine", "boosting"});

    auto flat = segment_query("support vector machine", c, nullptr);
    CHECK(flat == std::vector<std::string>{"support", "vector", "machine"});
}

TEST_CASE("expand_query falls back and always contains the term") {
    auto fix = testing::hierarchy_corpus(60, 4);
    auto h = ConceptHierarchy::from_edges(fix.edges);
    LocalConfig cfg;
    cfg.dim_base = 12;
    cfg.k = 6;
    EmbedConfig ecfg;
    ecfg.epochs = 1;
    ecfg.seed = 2;
    SmoothingConfig smoothing;

    // "common" is a vocabulary term but not a hierarchy node -> global fallback
    std::vector<std::string> q = {"alpha-spec", "common"};
    auto exps = expand_query(q, fix.corpus, &h, cfg, ecfg, smoothing);
    REQUIRE(exps.size() == 2);
    TermId spec = *fix.corpus.vocabulary().find("alpha-spec");
    TermId common = *fix.corpus.vocabulary().find("common");
    REQUIRE(!exps[0].pruned.empty());
    CHECK(exps[0].pruned.front() == spec);
    CHECK(exps[1].level == 0);
    REQUIRE(!exps[1].pruned.empty());
    CHECK(exps[1].pruned.front() == common);

    // out-of-vocabulary term: empty expansion set, no crash
    std::vector<std::string> oov = {"flibbertigibbet"};
    auto e2 = expand_query(oov, fix.corpus, &h, cfg, ecfg, smoothing);
    REQUIRE(e2.size() == 1);
    CHECK(e2[0].pruned.empty());

    // exact mode: singleton expansions
    auto exact = exact_expansions(q, fix.corpus);
    REQUIRE(exact.size() == 2);
    CHECK(exact[0].pruned == std::vector<TermId>{spec});
    CHECK(exact[1].pruned == std::vector<TermId>{common});
}
