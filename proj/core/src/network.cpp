#include "efind/network.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace efind {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triples(std::size_t rows, std::size_t cols,
                                        std::vector<Triple> entries) {
    for (const auto& e : entries) {
        if (e.row >= rows || e.col >= cols)
            throw std::out_of_range("SparseMatrix: entry out of range");
        if (!(e.value >= 0.0) || !std::isfinite(e.value))
            throw std::invalid_argument("SparseMatrix: weights must be finite and >= 0");
    }
    std::sort(entries.begin(), entries.end(), [](const Triple& a, const Triple& b) {
        if (a.row != b.row) return a.row < b.row;
        return a.col < b.col;
    });

    SparseMatrix m(rows, cols);
    m.col_.reserve(entries.size());
    m.val_.reserve(entries.size());
    std::size_t r = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i > 0 && entries[i].row == entries[i - 1].row &&
            entries[i].col == entries[i - 1].col) {
            m.val_.back() += entries[i].value;
            continue;
        }
        while (r <= entries[i].row) m.row_ptr_[r++] = m.col_.size();
        m.col_.push_back(static_cast<std::uint32_t>(entries[i].col));
        m.val_.push_back(entries[i].value);
    }
    while (r <= rows) m.row_ptr_[r++] = m.col_.size();
    return m;
}

SparseMatrix SparseMatrix::transpose() const {
    std::vector<Triple> t;
    t.reserve(nnz());
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i)
            t.push_back({col_[i], r, val_[i]});
    return from_triples(cols_, rows_, std::move(t));
}

SparseMatrix SparseMatrix::multiply(const SparseMatrix& other) const {
    if (cols_ != other.rows_)
        throw std::invalid_argument("SparseMatrix::multiply: dimension mismatch");
    std::vector<double> acc(other.cols_, 0.0);
    std::vector<std::uint32_t> touched;
    std::vector<Triple> out;
    for (std::size_t r = 0; r < rows_; ++r) {
        touched.clear();
        for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) {
            const std::size_t k = col_[i];
            const double v = val_[i];
            for (std::size_t j = other.row_ptr_[k]; j < other.row_ptr_[k + 1]; ++j) {
                if (acc[other.col_[j]] == 0.0) touched.push_back(other.col_[j]);
                acc[other.col_[j]] += v * other.val_[j];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (auto c : touched) {
            if (acc[c] != 0.0) out.push_back({r, c, acc[c]});
            acc[c] = 0.0;
        }
    }
    return from_triples(rows_, other.cols_, std::move(out));
}

SparseMatrix SparseMatrix::row_normalized() const {
    SparseMatrix m = *this;
    for (std::size_t r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) s += val_[i];
        if (s <= 0.0) continue;
        for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) m.val_[i] /= s;
    }
    return m;
}

void SparseMatrix::zero_diagonal() {
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i)
            if (col_[i] == r) val_[i] = 0.0;
}

std::vector<double> SparseMatrix::left_multiply(std::span<const double> v) const {
    if (v.size() != rows_)
        throw std::invalid_argument("SparseMatrix::left_multiply: size mismatch");
    std::vector<double> out(cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        const double x = v[r];
        if (x == 0.0) continue;
        for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i)
            out[col_[i]] += x * val_[i];
    }
    return out;
}

double SparseMatrix::row_sum(std::size_t r) const {
    double s = 0.0;
    for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) s += val_[i];
    return s;
}

std::vector<Triple> SparseMatrix::entries() const {
    std::vector<Triple> out;
    out.reserve(nnz());
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i)
            if (val_[i] != 0.0) out.push_back({r, col_[i], val_[i]});
    return out;
}

std::vector<std::vector<double>> SparseMatrix::dense() const {
    std::vector<std::vector<double>> d(rows_, std::vector<double>(cols_, 0.0));
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i)
            d[r][col_[i]] += val_[i];
    return d;
}

SparseMatrix transition(const SparseMatrix& r) { return r.row_normalized(); }

std::vector<DocIndex> relevant_docs(std::span<const ExpansionSet> expansions,
                                    const Corpus& corpus) {
    if (expansions.empty()) return {};

    // disjunction within each term's expansion set (union of postings),
    // conjunction across query terms (intersection)
    std::vector<DocIndex> current;
    bool first = true;
    for (const auto& exp : expansions) {
        std::vector<DocIndex> docs;
        for (TermId t : exp.pruned) {
            auto p = corpus.postings(t);
            docs.insert(docs.end(), p.begin(), p.end());
        }
        std::sort(docs.begin(), docs.end());
        docs.erase(std::unique(docs.begin(), docs.end()), docs.end());

        if (first) {
            current = std::move(docs);
            first = false;
        } else {
            std::vector<DocIndex> inter;
            std::set_intersection(current.begin(), current.end(), docs.begin(),
                                  docs.end(), std::back_inserter(inter));
            current = std::move(inter);
        }
        if (current.empty()) break;
    }
    return current;
}

RelevanceNetwork derive_network(std::vector<DocIndex> papers,
                                std::vector<AuthorIndex> authors,
                                std::vector<VenueIndex> venues, SparseMatrix r_pp,
                                SparseMatrix r_ap, SparseMatrix r_vp,
                                const NetworkOptions& options) {
    RelevanceNetwork net;
    net.papers = std::move(papers);
    net.authors = std::move(authors);
    net.venues = std::move(venues);
    net.r_pp = std::move(r_pp);
    net.r_ap = std::move(r_ap);
    net.r_vp = std::move(r_vp);

    net.r_pa = net.r_ap.transpose();
    net.r_pv = net.r_vp.transpose();
    net.r_aa = net.r_ap.multiply(net.r_pa);
    if (!options.keep_self_coauthor) net.r_aa.zero_diagonal();
    net.r_vv = net.r_vp.multiply(net.r_pp).multiply(net.r_pv);
    return net;
}

RelevanceNetwork build_network(std::span<const DocIndex> dq, const Corpus& corpus,
                               const NetworkOptions& options) {
    if (dq.empty()) throw DataError("no relevant documents");

    std::vector<DocIndex> papers(dq.begin(), dq.end());
    std::sort(papers.begin(), papers.end());
    papers.erase(std::unique(papers.begin(), papers.end()), papers.end());

    std::vector<std::size_t> paper_pos(corpus.num_docs(), static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < papers.size(); ++i) paper_pos[papers[i]] = i;

    std::vector<AuthorIndex> authors;
    std::vector<VenueIndex> venues;
    for (DocIndex p : papers) {
        const auto& d = corpus.doc(p);
        authors.insert(authors.end(), d.authors.begin(), d.authors.end());
        if (d.venue) venues.push_back(*d.venue);
    }
    std::sort(authors.begin(), authors.end());
    authors.erase(std::unique(authors.begin(), authors.end()), authors.end());
    std::sort(venues.begin(), venues.end());
    venues.erase(std::unique(venues.begin(), venues.end()), venues.end());

    std::vector<std::size_t> author_pos(corpus.num_authors(),
                                        static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < authors.size(); ++i) author_pos[authors[i]] = i;
    std::vector<std::size_t> venue_pos(corpus.num_venues(),
                                       static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < venues.size(); ++i) venue_pos[venues[i]] = i;

    std::vector<Triple> pp, ap, vp;
    for (std::size_t i = 0; i < papers.size(); ++i) {
        const auto& d = corpus.doc(papers[i]);
        for (DocIndex cited : d.cites) {
            auto j = paper_pos[cited];
            if (j != static_cast<std::size_t>(-1)) pp.push_back({i, j, 1.0});
        }
        for (AuthorIndex a : d.authors) ap.push_back({author_pos[a], i, 1.0});
        if (d.venue) vp.push_back({venue_pos[*d.venue], i, 1.0});
    }

    auto r_pp = SparseMatrix::from_triples(papers.size(), papers.size(), std::move(pp));
    auto r_ap = SparseMatrix::from_triples(authors.size(), papers.size(), std::move(ap));
    auto r_vp = SparseMatrix::from_triples(venues.size(), papers.size(), std::move(vp));

    return derive_network(std::move(papers), std::move(authors), std::move(venues),
                          std::move(r_pp), std::move(r_ap), std::move(r_vp), options);
}

namespace {

void export_matrix(const std::filesystem::path& path, const SparseMatrix& m,
                   const std::vector<std::string>& row_ids,
                   const std::vector<std::string>& col_ids) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write network export: " + path.string());
    os.precision(17);
    for (const auto& e : m.entries())
        os << row_ids[e.row] << '\t' << col_ids[e.col] << '\t' << e.value << '\n';
}

} // namespace

void export_network(const RelevanceNetwork& net, const Corpus& corpus,
                    const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::filesystem::path base(dir);

    std::vector<std::string> pid, aid, vid;
    for (DocIndex p : net.papers) pid.push_back(corpus.doc(p).doc_id);
    for (AuthorIndex a : net.authors) aid.push_back(corpus.author_id(a));
    for (VenueIndex v : net.venues) vid.push_back(corpus.venue_id(v));

    auto write_ids = [&](const char* name, const std::vector<std::string>& ids) {
        std::ofstream os(base / name);
        for (std::size_t i = 0; i < ids.size(); ++i) os << i << '\t' << ids[i] << '\n';
    };
    write_ids("papers.tsv", pid);
    write_ids("authors.tsv", aid);
    write_ids("venues.tsv", vid);

    export_matrix(base / "r_pp.tsv", net.r_pp, pid, pid);
    export_matrix(base / "r_ap.tsv", net.r_ap, aid, pid);
    export_matrix(base / "r_vp.tsv", net.r_vp, vid, pid);
    export_matrix(base / "r_aa.tsv", net.r_aa, aid, aid);
    export_matrix(base / "r_vv.tsv", net.r_vv, vid, vid);
}

} // namespace efind
