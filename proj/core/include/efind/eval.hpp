#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "efind/lm.hpp"

namespace efind {

/// Binary relevance judgments: query id -> relevant author ids.
struct Qrels {
    std::map<std::string, std::set<std::string>> relevant;

    /// TSV: query_id <TAB> author_id <TAB> relevance (0/1).
    static Qrels load(const std::string& path);
};

struct RunEntry {
    std::string candidate;
    double score = 0.0;
};

/// Ranked candidate lists per query, trec-run interchange format.
struct RunFile {
    std::map<std::string, std::vector<RunEntry>> runs;

    static RunFile load(const std::string& path);
};

/// "query_id Q0 candidate rank score tag" lines, at most `limit` per query.
void write_trec_run(std::ostream& os, const std::string& query_id,
                    std::span<const ScoredAuthor> ranking, const std::string& tag,
                    std::size_t limit = 1000);

double precision_at(std::span<const std::string> ranked,
                    const std::set<std::string>& rel, std::size_t n);

/// AP = sum_i P@i * R(c_i) / |rel|; relevant candidates never retrieved
/// contribute zero.
double average_precision(std::span<const std::string> ranked,
                         const std::set<std::string>& rel);

/// The denominator sums ideal gains over all n positions; with ideal_truncate
/// it is cut at |rel| (the conventional IDCG).
double ndcg_at(std::span<const std::string> ranked, const std::set<std::string>& rel,
               std::size_t n, bool ideal_truncate = false);

/// Binary preference: mean over relevant candidates of
/// 1 - min(#nonrelevant ranked above, |rel|) / |rel|; relevant candidates never
/// retrieved count every retrieved nonrelevant as ranked above them.
double bpref(std::span<const std::string> ranked, const std::set<std::string>& rel);

struct MetricsRow {
    double p5 = 0, p10 = 0, p20 = 0;
    double ndcg5 = 0, ndcg10 = 0, ndcg20 = 0;
    double ap = 0;
    double bpref = 0;
};

struct EvalOptions {
    bool per_query = false;
    bool ideal_truncate = false;
};

struct EvalResult {
    std::map<std::string, MetricsRow> per_query;   // intersection of run and qrels
    MetricsRow mean;                               // unweighted macro average
    std::vector<std::string> run_only;             // queries missing judgments
    std::vector<std::string> qrels_only;           // judged queries missing from the run
};

EvalResult evaluate(const RunFile& run, const Qrels& qrels,
                    const EvalOptions& options = {});

/// TSV with a header row; per-query rows when requested, then the "all" row.
/// Mismatched query sets are listed on `diag`.
void write_metrics(std::ostream& os, std::ostream& diag, const EvalResult& result,
                   const EvalOptions& options);

} // namespace efind
