#include "efind/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace efind {

Qrels Qrels::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot read qrels file: " + path);
    Qrels q;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string qid, author;
        int rel = 0;
        if (!(ss >> qid >> author >> rel))
            throw DataError("qrels line " + std::to_string(lineno) +
                            ": expected query_id author_id relevance");
        if (rel != 0 && rel != 1)
            throw DataError("qrels line " + std::to_string(lineno) +
                            ": relevance must be 0 or 1");
        if (rel == 1) q.relevant[qid].insert(author);
        else q.relevant.try_emplace(qid);   // judged query, possibly no positives yet
    }
    return q;
}

RunFile RunFile::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot read run file: " + path);
    RunFile r;
    std::string line;
    std::size_t lineno = 0;
    std::map<std::string, std::set<std::string>> seen;
    std::map<std::string, long> last_rank;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string qid, q0, cand, tag;
        long rank = 0;
        double score = 0.0;
        if (!(ss >> qid >> q0 >> cand >> rank >> score >> tag))
            throw DataError("run line " + std::to_string(lineno) +
                            ": expected trec-run format");
        if (!seen[qid].insert(cand).second)
            throw DataError("run line " + std::to_string(lineno) +
                            ": duplicate candidate " + cand + " for query " + qid);
        auto [it, first] = last_rank.emplace(qid, rank);
        if (!first) {
            if (rank <= it->second)
                throw DataError("run line " + std::to_string(lineno) +
                                ": ranks must be strictly increasing for query " + qid);
            it->second = rank;
        }
        r.runs[qid].push_back({cand, score});
    }
    return r;
}

void write_trec_run(std::ostream& os, const std::string& query_id,
                    std::span<const ScoredAuthor> ranking, const std::string& tag,
                    std::size_t limit) {
    char buf[64];
    std::size_t n = std::min(limit, ranking.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "%.10g", ranking[i].score);
        os << query_id << "\tQ0\t" << ranking[i].author_id << '\t' << (i + 1) << '\t'
           << buf << '\t' << tag << '\n';
    }
}

double precision_at(std::span<const std::string> ranked,
                    const std::set<std::string>& rel, std::size_t n) {
    if (n == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(n, ranked.size()); ++i)
        if (rel.count(ranked[i])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(n);
}

double average_precision(std::span<const std::string> ranked,
                         const std::set<std::string>& rel) {
    if (rel.empty()) return 0.0;
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (rel.count(ranked[i])) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(rel.size());
}

double ndcg_at(std::span<const std::string> ranked, const std::set<std::string>& rel,
               std::size_t n, bool ideal_truncate) {
    if (n == 0) return 0.0;
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(n, ranked.size()); ++i)
        if (rel.count(ranked[i]))
            dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    std::size_t ideal_n = ideal_truncate ? std::min(n, rel.size()) : n;
    double idcg = 0.0;
    for (std::size_t i = 0; i < ideal_n; ++i)
        idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

double bpref(std::span<const std::string> ranked, const std::set<std::string>& rel) {
    if (rel.empty() || ranked.empty()) return 0.0;
    const double r_n = static_cast<double>(rel.size());
    double sum = 0.0;
    std::size_t nonrel_above = 0;
    std::set<std::string> retrieved_rel;
    for (const auto& c : ranked) {
        if (rel.count(c)) {
            sum += 1.0 - std::min(static_cast<double>(nonrel_above), r_n) / r_n;
            retrieved_rel.insert(c);
        } else {
            ++nonrel_above;
        }
    }
    // relevant candidates never retrieved: every retrieved nonrelevant ranks
    // above them
    const double missing = r_n - static_cast<double>(retrieved_rel.size());
    sum += missing * (1.0 - std::min(static_cast<double>(nonrel_above), r_n) / r_n);
    return sum / r_n;
}

EvalResult evaluate(const RunFile& run, const Qrels& qrels, const EvalOptions& opt) {
    EvalResult res;
    for (const auto& [qid, entries] : run.runs)
        if (!qrels.relevant.count(qid)) res.run_only.push_back(qid);
    for (const auto& [qid, rel] : qrels.relevant)
        if (!run.runs.count(qid)) res.qrels_only.push_back(qid);

    MetricsRow total;
    std::size_t n = 0;
    for (const auto& [qid, rel] : qrels.relevant) {
        auto it = run.runs.find(qid);
        if (it == run.runs.end()) continue;
        std::vector<std::string> ranked;
        ranked.reserve(it->second.size());
        for (const auto& e : it->second) ranked.push_back(e.candidate);

        MetricsRow row;
        row.p5 = precision_at(ranked, rel, 5);
        row.p10 = precision_at(ranked, rel, 10);
        row.p20 = precision_at(ranked, rel, 20);
        row.ndcg5 = ndcg_at(ranked, rel, 5, opt.ideal_truncate);
        row.ndcg10 = ndcg_at(ranked, rel, 10, opt.ideal_truncate);
        row.ndcg20 = ndcg_at(ranked, rel, 20, opt.ideal_truncate);
        row.ap = average_precision(ranked, rel);
        row.bpref = bpref(ranked, rel);
        res.per_query.emplace(qid, row);

        total.p5 += row.p5; total.p10 += row.p10; total.p20 += row.p20;
        total.ndcg5 += row.ndcg5; total.ndcg10 += row.ndcg10; total.ndcg20 += row.ndcg20;
        total.ap += row.ap; total.bpref += row.bpref;
        ++n;
    }
    if (n > 0) {
        const double d = static_cast<double>(n);
        total.p5 /= d; total.p10 /= d; total.p20 /= d;
        total.ndcg5 /= d; total.ndcg10 /= d; total.ndcg20 /= d;
        total.ap /= d; total.bpref /= d;
    }
    res.mean = total;
    return res;
}

namespace {

void write_row(std::ostream& os, const std::string& qid, const MetricsRow& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f",
                  r.p5, r.p10, r.p20, r.ndcg5, r.ndcg10, r.ndcg20, r.ap, r.bpref);
    os << qid << '\t' << buf << '\n';
}

} // namespace

void write_metrics(std::ostream& os, std::ostream& diag, const EvalResult& result,
                   const EvalOptions& options) {
    for (const auto& q : result.run_only)
        diag << "eval: query " << q << " has no judgments, skipped\n";
    for (const auto& q : result.qrels_only)
        diag << "eval: judged query " << q << " missing from the run\n";

    os << "query\tp@5\tp@10\tp@20\tndcg@5\tndcg@10\tndcg@20\tap\tbpref\n";
    if (options.per_query)
        for (const auto& [qid, row] : result.per_query) write_row(os, qid, row);
    write_row(os, "all", result.mean);
}

} // namespace efind
