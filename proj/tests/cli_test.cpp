// Drives the efind binary end to end through temp files. EFIND_BIN is
// injected by the build.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Sandbox {
    fs::path dir;
    Sandbox() {
        dir = fs::temp_directory_path() /
              ("efind_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }
    fs::path file(const std::string& name) const { return dir / name; }
};

int run_cmd(const std::string& args, const fs::path& out, const fs::path& err) {
    std::string cmd = std::string(EFIND_BIN) + " " + args + " >" + out.string() +
                      " 2>" + err.string();
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_fixture_corpus(const fs::path& p) {
    std::ofstream os(p);
    // two mini topics; "carol" dominates ranking (cited twice, top venue)
    os << R"({"id":"p1","title":"ranking methods","authors":["carol"],"venue":"kdd","cites":[],"n_citation":9})" << "\n";
    os << R"({"id":"p2","title":"ranking tricks","authors":["dave"],"venue":"kdd","cites":["p1"]})" << "\n";
    os << R"({"id":"p3","title":"ranking notes","authors":["erin","dave"],"venue":"www","cites":["p1"]})" << "\n";
    os << R"({"id":"p4","title":"cooking pasta","authors":["frank"],"venue":"food"})" << "\n";
}

} // namespace

TEST_CASE("ingest then rank then eval round trip") {
    Sandbox sb;
    auto corpus_jsonl = sb.file("corpus.jsonl");
    write_fixture_corpus(corpus_jsonl);

    auto out = sb.file("out.txt"), err = sb.file("err.txt");
    auto cache = sb.file("corpus.bin");

    int rc = run_cmd("ingest --input " + corpus_jsonl.string() + " --output " +
                         cache.string(), out, err);
    CHECK(rc == 0);
    CHECK(fs::exists(cache));
    CHECK(slurp(err).find("corpus:") != std::string::npos);   // load report

    // rank without expansion (no hierarchy): exact retrieval
    rc = run_cmd("rank --corpus " + cache.string() +
                     " --no-expansion --query-id q1 \"ranking\"", out, err);
    CHECK(rc == 0);
    auto run_text = slurp(out);
    CHECK(run_text.find("q1\tQ0\t") != std::string::npos);
    CHECK(slurp(err).find("iterations=") != std::string::npos);

    // the run parses and evaluates end to end
    auto run_file = sb.file("run.txt");
    std::ofstream(run_file) << run_text;
    auto qrels = sb.file("qrels.tsv");
    std::ofstream(qrels) << "q1\tcarol\t1\n";
    rc = run_cmd("eval --run " + run_file.string() + " --qrels " + qrels.string() +
                     " --per-query", out, err);
    CHECK(rc == 0);
    CHECK(slurp(out).find("query\tp@5") == 0);

    // determinism: identical bytes on a re-run
    auto out2 = sb.file("out2.txt");
    rc = run_cmd("rank --corpus " + cache.string() +
                     " --no-expansion --query-id q1 \"ranking\"", out2, err);
    CHECK(rc == 0);
    CHECK(slurp(out2) == run_text);
}

TEST_CASE("lm baseline ranks by the citation prior") {
    Sandbox sb;
    auto corpus_jsonl = sb.file("corpus.jsonl");
    write_fixture_corpus(corpus_jsonl);
    auto cache = sb.file("corpus.bin");
    auto out = sb.file("out.txt"), err = sb.file("err.txt");
    REQUIRE(run_cmd("ingest --input " + corpus_jsonl.string() + " --output " +
                        cache.string(), out, err) == 0);

    int rc = run_cmd("rank --corpus " + cache.string() +
                         " --baseline lm --query-id q1 \"ranking\"", out, err);
    CHECK(rc == 0);
    auto text = slurp(out);
    CHECK(text.find("carol") != std::string::npos);
    // carol's paper has by far the largest prior, so she leads the lm run
    CHECK(text.find("q1\tQ0\tcarol\t1") != std::string::npos);
}

TEST_CASE("usage and data errors map to exit codes") {
    Sandbox sb;
    auto out = sb.file("out.txt"), err = sb.file("err.txt");

    CHECK(run_cmd("frobnicate", out, err) == 1);                        // unknown command
    CHECK(run_cmd("ingest --input missing.jsonl --output x.bin", out, err) == 2);
    CHECK(run_cmd("rank --corpus nope.bin \"q\"", out, err) == 2);

    auto bad = sb.file("bad.jsonl");
    std::ofstream(bad) << "{not json}\n";
    CHECK(run_cmd("ingest --input " + bad.string() + " --output x.bin", out, err) == 2);

    auto ok = sb.file("ok.jsonl");
    write_fixture_corpus(ok);
    CHECK(run_cmd("ingest --input " + ok.string() + " --format xml --output x.bin",
                  out, err) == 2);
}

TEST_CASE("expand and sweep produce tab-separated tables") {
    Sandbox sb;
    auto corpus_jsonl = sb.file("corpus.jsonl");
    {
        std::ofstream os(corpus_jsonl);
        for (int i = 0; i < 30; ++i) {
            os << R"({"id":"r)" << i << R"(","title":"ranking methods r)" << (i % 5)
               << R"( study","authors":["a)" << (i % 3) << R"("],"venue":"kdd"})"
               << "\n";
        }
    }
    auto cache = sb.file("corpus.bin");
    auto out = sb.file("out.txt"), err = sb.file("err.txt");
    REQUIRE(run_cmd("ingest --input " + corpus_jsonl.string() + " --output " +
                        cache.string(), out, err) == 0);

    auto hierarchy = sb.file("hier.tsv");
    std::ofstream(hierarchy) << "study\tranking\n";

    int rc = run_cmd("expand --corpus " + cache.string() + " --hierarchy " +
                         hierarchy.string() +
                         " --epochs 1 --dim-base 8 --k 3 --query-id q1 \"ranking\"",
                     out, err);
    CHECK(rc == 0);
    auto expansion = slurp(out);
    CHECK(expansion.find("q1\tranking\t1.000000\t1") != std::string::npos);

    auto queries = sb.file("queries.tsv");
    std::ofstream(queries) << "q1\tranking\n";
    auto qrels = sb.file("qrels.tsv");
    std::ofstream(qrels) << "q1\ta0\t1\n";

    rc = run_cmd("sweep --corpus " + cache.string() + " --queries " +
                     queries.string() + " --qrels " + qrels.string() +
                     " --no-expansion --lambda pa --values 0,0.5,1,2", out, err);
    CHECK(rc == 0);
    std::istringstream rows(slurp(out));
    std::string line;
    int count = 0;
    while (std::getline(rows, line)) {
        CHECK(line.rfind("lambda_pa\t", 0) == 0);
        ++count;
    }
    CHECK(count == 4);
}

TEST_CASE("train-global writes a loadable vector file") {
    Sandbox sb;
    auto corpus_jsonl = sb.file("corpus.jsonl");
    write_fixture_corpus(corpus_jsonl);
    auto cache = sb.file("corpus.bin");
    auto out = sb.file("out.txt"), err = sb.file("err.txt");
    REQUIRE(run_cmd("ingest --input " + corpus_jsonl.string() + " --output " +
                        cache.string(), out, err) == 0);

    auto vec = sb.file("vectors.vec");
    int rc = run_cmd("train-global --corpus " + cache.string() + " --output " +
                         vec.string() + " --dim 8 --epochs 1", out, err);
    CHECK(rc == 0);
    std::ifstream is(vec);
    std::size_t vocab = 0, dim = 0;
    is >> vocab >> dim;
    CHECK(dim == 8);
    CHECK(vocab > 0);
}
