#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace efind {

using TermId = std::uint32_t;
using DocIndex = std::uint32_t;
using AuthorIndex = std::uint32_t;
using VenueIndex = std::uint32_t;

/// Thrown for unreadable/malformed input data; the CLI maps it to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lowercases, splits on whitespace and strips punctuation from token edges.
/// Internal hyphens are kept whole, so pre-segmented phrase tokens like
/// "named-entity-recognition" pass through as single terms.
std::vector<std::string> tokenize(std::string_view text);

class Corpus;
struct DocumentRecord;
struct LoadReport;
Corpus build_corpus(std::vector<DocumentRecord> records, LoadReport* report);
Corpus load_corpus(const std::string& path);

class Vocabulary {
public:
    TermId add(std::string_view term);
    std::optional<TermId> find(std::string_view term) const;
    const std::string& term(TermId id) const { return terms_.at(id); }
    std::size_t size() const { return terms_.size(); }
    std::uint64_t total_count(TermId id) const { return total_count_.at(id); }
    std::uint64_t doc_frequency(TermId id) const { return doc_frequency_.at(id); }

private:
    friend Corpus build_corpus(std::vector<DocumentRecord>, LoadReport*);
    friend Corpus load_corpus(const std::string&);
    std::vector<std::string> terms_;
    std::unordered_map<std::string, TermId> index_;
    std::vector<std::uint64_t> total_count_;
    std::vector<std::uint64_t> doc_frequency_;
};

struct Document {
    std::string doc_id;
    std::vector<TermId> tokens;            // title then abstract, one flat stream
    std::vector<AuthorIndex> authors;      // non-empty, duplicate-free
    std::optional<VenueIndex> venue;
    int year = 0;
    std::vector<DocIndex> cites;           // edges kept only when the target is in the corpus
    std::uint32_t citation_count = 0;
};

/// Raw parsed record, before vocabulary/registry resolution. ingest() produces
/// these from the line-delimited input; test fixtures construct them directly.
struct DocumentRecord {
    std::string id;
    std::string title;
    std::string abstract;
    std::vector<std::string> authors;
    std::string venue;                       // empty = no venue
    int year = 0;
    std::vector<std::string> cites;
    std::optional<std::uint32_t> n_citation; // explicit count wins over in-degree
};

struct LoadReport {
    std::size_t records = 0;
    std::size_t dangling_citations = 0;
    std::size_t empty_documents = 0;
};

class Corpus {
public:
    const std::vector<Document>& docs() const { return docs_; }
    const Document& doc(DocIndex i) const { return docs_.at(i); }
    std::size_t num_docs() const { return docs_.size(); }

    const Vocabulary& vocabulary() const { return vocab_; }
    std::uint64_t total_tokens() const { return total_tokens_; }

    const std::string& author_id(AuthorIndex i) const { return authors_.at(i); }
    std::size_t num_authors() const { return authors_.size(); }
    std::optional<AuthorIndex> find_author(std::string_view id) const;

    const std::string& venue_id(VenueIndex i) const { return venues_.at(i); }
    std::size_t num_venues() const { return venues_.size(); }

    std::optional<DocIndex> find_doc(std::string_view doc_id) const;

    /// Corpus-wide unigram probability P_b(t); 0 for unknown terms.
    double background_prob(TermId t) const;
    double background_prob(std::string_view term) const;

    /// Within-document maximum-likelihood probability count(t,d)/|d|;
    /// 0 for absent terms and for empty documents.
    double term_doc_prob(TermId t, const Document& d) const;

    /// Documents containing the term at least once, ascending doc index.
    std::span<const DocIndex> postings(TermId t) const;

    /// Documents (co-)authored by the author, ascending doc index.
    std::span<const DocIndex> docs_by_author(AuthorIndex a) const;

private:
    friend Corpus build_corpus(std::vector<DocumentRecord>, LoadReport*);
    friend Corpus load_corpus(const std::string&);

    std::vector<Document> docs_;
    Vocabulary vocab_;
    std::vector<std::string> authors_;
    std::unordered_map<std::string, AuthorIndex> author_index_;
    std::vector<std::string> venues_;
    std::unordered_map<std::string, VenueIndex> venue_index_;
    std::unordered_map<std::string, DocIndex> doc_index_;
    std::uint64_t total_tokens_ = 0;
    std::vector<std::vector<DocIndex>> postings_;
    std::vector<std::vector<DocIndex>> author_docs_;

    void rebuild_indexes();
};

/// Assembles a Corpus from parsed records: tokenizes title+abstract, builds the
/// vocabulary and registries, resolves citation edges (dangling ones are
/// dropped and counted in the report) and fills citation counts.
inline Corpus build_corpus(std::vector<DocumentRecord> records) {
    return build_corpus(std::move(records), nullptr);
}

/// Loads a corpus file: UTF-8, one JSON record per line with keys
/// id/title/abstract/authors/venue/year/cites/n_citation. Unknown keys are
/// ignored; structurally invalid records abort with the offending line number.
Corpus ingest(const std::string& path, const std::string& format = "jsonl",
              LoadReport* report = nullptr);

/// Binary corpus cache.
void save_corpus(const Corpus& corpus, const std::string& path);

} // namespace efind
