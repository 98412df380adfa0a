#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "efind/corpus.hpp"
#include "efind/hierarchy.hpp"

namespace efind {

struct Triple {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Minimal CSR matrix with the handful of operations the ranking walk needs.
/// Rows are stored with strictly ascending, duplicate-free column indices, so
/// iteration order (and therefore floating-point summation order) is fixed.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols);

    /// Duplicated (row, col) entries are summed.
    static SparseMatrix from_triples(std::size_t rows, std::size_t cols,
                                     std::vector<Triple> entries);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return col_.size(); }

    SparseMatrix transpose() const;
    SparseMatrix multiply(const SparseMatrix& other) const;

    /// Each nonzero row divided by its row sum; zero rows stay zero.
    SparseMatrix row_normalized() const;

    void zero_diagonal();

    /// v * M for a row vector v of length rows(); ascending-index accumulation.
    std::vector<double> left_multiply(std::span<const double> v) const;

    double row_sum(std::size_t r) const;
    std::vector<Triple> entries() const;
    std::vector<std::vector<double>> dense() const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::uint32_t> col_;
    std::vector<double> val_;
};

struct NetworkOptions {
    bool keep_self_coauthor = false;   // keep the raw R_AP R_AP^T diagonal
};

/// Query-relevance subnetwork: induced papers plus their authors and venues,
/// base relations from the records and derived relations as sparse products.
struct RelevanceNetwork {
    std::vector<DocIndex> papers;      // sorted corpus doc indices
    std::vector<AuthorIndex> authors;  // sorted
    std::vector<VenueIndex> venues;    // sorted

    SparseMatrix r_pp;   // paper cites paper, both endpoints in D(q)
    SparseMatrix r_ap;   // author writes paper
    SparseMatrix r_vp;   // venue publishes paper
    SparseMatrix r_pa;   // R_AP^T
    SparseMatrix r_pv;   // R_VP^T
    SparseMatrix r_aa;   // R_AP R_AP^T (diagonal zeroed unless kept)
    SparseMatrix r_vv;   // R_VP R_PP R_VP^T
};

/// D(q): documents containing, for every query term, at least one member of
/// that term's pruned expansion set.
std::vector<DocIndex> relevant_docs(std::span<const ExpansionSet> expansions,
                                    const Corpus& corpus);

/// Assembles the derived relations from the base ones; fixture entry point.
RelevanceNetwork derive_network(std::vector<DocIndex> papers,
                                std::vector<AuthorIndex> authors,
                                std::vector<VenueIndex> venues, SparseMatrix r_pp,
                                SparseMatrix r_ap, SparseMatrix r_vp,
                                const NetworkOptions& options = {});

/// Extracts the induced subnetwork on D(q). Throws DataError on empty D(q).
RelevanceNetwork build_network(std::span<const DocIndex> dq, const Corpus& corpus,
                               const NetworkOptions& options = {});

/// Transition matrix D^-1 R (row-normalized).
SparseMatrix transition(const SparseMatrix& r);

/// Debug export: one TSV per matrix plus an index map per object type.
void export_network(const RelevanceNetwork& net, const Corpus& corpus,
                    const std::string& dir);

} // namespace efind
