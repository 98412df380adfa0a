#include "efind/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>

#include <json.hpp>

namespace efind {

namespace {

bool is_edge_punct(unsigned char c) {
    return std::ispunct(c) != 0;
}

} // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < n && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) {
            std::size_t b = i, e = j;
            while (b < e && is_edge_punct(static_cast<unsigned char>(text[b]))) ++b;
            while (e > b && is_edge_punct(static_cast<unsigned char>(text[e - 1]))) --e;
            if (e > b) {
                std::string tok;
                tok.reserve(e - b);
                for (std::size_t p = b; p < e; ++p)
                    tok.push_back(static_cast<char>(
                        std::tolower(static_cast<unsigned char>(text[p]))));
                out.push_back(std::move(tok));
            }
        }
        i = j;
    }
    return out;
}

TermId Vocabulary::add(std::string_view term) {
    auto it = index_.find(std::string(term));
    if (it != index_.end()) return it->second;
    auto id = static_cast<TermId>(terms_.size());
    terms_.emplace_back(term);
    index_.emplace(terms_.back(), id);
    total_count_.push_back(0);
    doc_frequency_.push_back(0);
    return id;
}

std::optional<TermId> Vocabulary::find(std::string_view term) const {
    auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<AuthorIndex> Corpus::find_author(std::string_view id) const {
    auto it = author_index_.find(std::string(id));
    if (it == author_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<DocIndex> Corpus::find_doc(std::string_view doc_id) const {
    auto it = doc_index_.find(std::string(doc_id));
    if (it == doc_index_.end()) return std::nullopt;
    return it->second;
}

double Corpus::background_prob(TermId t) const {
    if (t >= vocab_.size() || total_tokens_ == 0) return 0.0;
    return static_cast<double>(vocab_.total_count(t)) /
           static_cast<double>(total_tokens_);
}

double Corpus::background_prob(std::string_view term) const {
    auto t = vocab_.find(term);
    return t ? background_prob(*t) : 0.0;
}

double Corpus::term_doc_prob(TermId t, const Document& d) const {
    if (d.tokens.empty()) return 0.0;
    std::size_t c = 0;
    for (TermId tok : d.tokens)
        if (tok == t) ++c;
    return static_cast<double>(c) / static_cast<double>(d.tokens.size());
}

std::span<const DocIndex> Corpus::postings(TermId t) const {
    if (t >= postings_.size()) return {};
    return postings_[t];
}

std::span<const DocIndex> Corpus::docs_by_author(AuthorIndex a) const {
    if (a >= author_docs_.size()) return {};
    return author_docs_[a];
}

void Corpus::rebuild_indexes() {
    postings_.assign(vocab_.size(), {});
    author_docs_.assign(authors_.size(), {});
    for (DocIndex i = 0; i < docs_.size(); ++i) {
        const auto& d = docs_[i];
        TermId prev = static_cast<TermId>(-1);
        std::vector<TermId> seen(d.tokens.begin(), d.tokens.end());
        std::sort(seen.begin(), seen.end());
        for (TermId t : seen) {
            if (t != prev) postings_[t].push_back(i);
            prev = t;
        }
        for (AuthorIndex a : d.authors) author_docs_[a].push_back(i);
    }
}

Corpus build_corpus(std::vector<DocumentRecord> records, LoadReport* report) {
    if (records.empty()) throw DataError("empty corpus");

    LoadReport rep;
    Corpus c;
    c.docs_.reserve(records.size());

    // First pass: ids, so citation targets can be resolved in one sweep.
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].id.empty()) throw DataError("record missing doc_id");
        auto [it, inserted] =
            c.doc_index_.emplace(records[i].id, static_cast<DocIndex>(i));
        (void)it;
        if (!inserted) throw DataError("duplicate doc_id: " + records[i].id);
    }

    for (auto& r : records) {
        Document d;
        d.doc_id = r.id;
        d.year = r.year;

        auto toks = tokenize(r.title);
        auto abs_toks = tokenize(r.abstract);
        toks.insert(toks.end(), abs_toks.begin(), abs_toks.end());
        std::vector<TermId> seen_in_doc;
        for (auto& t : toks) {
            TermId id = c.vocab_.add(t);
            d.tokens.push_back(id);
            c.vocab_.total_count_[id] += 1;
            seen_in_doc.push_back(id);
        }
        std::sort(seen_in_doc.begin(), seen_in_doc.end());
        seen_in_doc.erase(std::unique(seen_in_doc.begin(), seen_in_doc.end()),
                          seen_in_doc.end());
        for (TermId id : seen_in_doc) c.vocab_.doc_frequency_[id] += 1;
        c.total_tokens_ += d.tokens.size();
        if (d.tokens.empty()) ++rep.empty_documents;

        if (r.authors.empty()) throw DataError("record " + r.id + " has no authors");
        for (auto& a : r.authors) {
            auto [it, inserted] =
                c.author_index_.emplace(a, static_cast<AuthorIndex>(c.authors_.size()));
            if (inserted) c.authors_.push_back(a);
            if (std::find(d.authors.begin(), d.authors.end(), it->second) ==
                d.authors.end())
                d.authors.push_back(it->second);
        }

        if (!r.venue.empty()) {
            auto [it, inserted] =
                c.venue_index_.emplace(r.venue, static_cast<VenueIndex>(c.venues_.size()));
            if (inserted) c.venues_.push_back(r.venue);
            d.venue = it->second;
        }

        for (auto& target : r.cites) {
            auto it = c.doc_index_.find(target);
            if (it == c.doc_index_.end()) {
                ++rep.dangling_citations;
            } else {
                d.cites.push_back(it->second);
            }
        }
        std::sort(d.cites.begin(), d.cites.end());
        d.cites.erase(std::unique(d.cites.begin(), d.cites.end()), d.cites.end());

        c.docs_.push_back(std::move(d));
        ++rep.records;
    }

    // Citation counts: explicit record value wins; otherwise in-degree over
    // the kept edge set. The explicit count may exceed the in-degree when the
    // citing papers fall outside the crawl.
    std::vector<std::uint32_t> indegree(c.docs_.size(), 0);
    for (const auto& d : c.docs_)
        for (DocIndex t : d.cites) ++indegree[t];
    for (std::size_t i = 0; i < c.docs_.size(); ++i)
        c.docs_[i].citation_count =
            records[i].n_citation ? *records[i].n_citation : indegree[i];

    c.rebuild_indexes();
    if (report) *report = rep;
    return c;
}

namespace {

DocumentRecord parse_record(const std::string& line, std::size_t lineno) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("line " + std::to_string(lineno) + ": invalid record: " + e.what());
    }
    if (!j.is_object())
        throw DataError("line " + std::to_string(lineno) + ": record is not an object");

    DocumentRecord r;
    try {
        if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty())
            throw DataError("missing doc_id");
        r.id = j["id"].get<std::string>();
        if (!j.contains("title") || !j["title"].is_string())
            throw DataError("missing title");
        r.title = j["title"].get<std::string>();
        if (j.contains("abstract") && j["abstract"].is_string())
            r.abstract = j["abstract"].get<std::string>();
        if (!j.contains("authors") || !j["authors"].is_array())
            throw DataError("missing authors");
        for (const auto& a : j["authors"]) r.authors.push_back(a.get<std::string>());
        if (r.authors.empty()) throw DataError("empty author list");
        if (j.contains("venue") && j["venue"].is_string())
            r.venue = j["venue"].get<std::string>();
        if (j.contains("year") && j["year"].is_number_integer())
            r.year = j["year"].get<int>();
        if (j.contains("cites") && j["cites"].is_array())
            for (const auto& t : j["cites"]) r.cites.push_back(t.get<std::string>());
        if (j.contains("n_citation") && j["n_citation"].is_number())
            r.n_citation = j["n_citation"].get<std::uint32_t>();
    } catch (const DataError& e) {
        throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw DataError("line " + std::to_string(lineno) + ": bad field: " + e.what());
    }
    return r;
}

} // namespace

Corpus ingest(const std::string& path, const std::string& format, LoadReport* report) {
    if (format != "jsonl")
        throw std::invalid_argument("unknown corpus format: " + format);
    std::ifstream in(path);
    if (!in) throw DataError("cannot read corpus file: " + path);

    std::vector<DocumentRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        records.push_back(parse_record(line, lineno));
    }
    LoadReport rep;
    Corpus c = build_corpus(std::move(records), &rep);
    if (report) *report = rep;
    std::cerr << "corpus: " << rep.records << " records, "
              << c.num_authors() << " authors, " << c.num_venues() << " venues, "
              << c.vocabulary().size() << " terms, " << c.total_tokens() << " tokens; "
              << rep.dangling_citations << " dangling citations dropped, "
              << rep.empty_documents << " empty documents\n";
    return c;
}

// ---------------------------------------------------------------------------
// Binary cache. Little-endian, length-prefixed strings; no cross-version
// compatibility promises beyond the magic/version check.

namespace {

constexpr char kMagic[4] = {'E', 'F', 'C', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw DataError("corpus cache truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_str(std::ostream& os, const std::string& s) {
    put_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_str(std::istream& is) {
    auto n = get_u64(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    if (!is) throw DataError("corpus cache truncated");
    return s;
}

template <typename T>
void put_vec_u32(std::ostream& os, const std::vector<T>& v) {
    put_u64(os, v.size());
    for (T x : v) put_u64(os, static_cast<std::uint64_t>(x));
}

template <typename T>
std::vector<T> get_vec_u32(std::istream& is) {
    auto n = get_u64(is);
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(get_u64(is));
    return v;
}

} // namespace

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write corpus cache: " + path);
    os.write(kMagic, 4);

    const auto& vocab = corpus.vocabulary();
    put_u64(os, vocab.size());
    for (TermId t = 0; t < vocab.size(); ++t) {
        put_str(os, vocab.term(t));
        put_u64(os, vocab.total_count(t));
        put_u64(os, vocab.doc_frequency(t));
    }
    put_u64(os, corpus.num_authors());
    for (AuthorIndex a = 0; a < corpus.num_authors(); ++a)
        put_str(os, corpus.author_id(a));
    put_u64(os, corpus.num_venues());
    for (VenueIndex v = 0; v < corpus.num_venues(); ++v)
        put_str(os, corpus.venue_id(v));

    put_u64(os, corpus.num_docs());
    for (const auto& d : corpus.docs()) {
        put_str(os, d.doc_id);
        put_vec_u32(os, d.tokens);
        put_vec_u32(os, d.authors);
        put_u64(os, d.venue ? *d.venue + 1 : 0);
        put_u64(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(d.year)));
        put_vec_u32(os, d.cites);
        put_u64(os, d.citation_count);
    }
    if (!os) throw DataError("failed writing corpus cache: " + path);
}

Corpus load_corpus(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot read corpus cache: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string_view(magic, 4) != std::string_view(kMagic, 4))
        throw DataError("not a corpus cache file: " + path);

    Corpus c;
    auto vn = get_u64(is);
    for (std::uint64_t i = 0; i < vn; ++i) {
        std::string term = get_str(is);
        TermId id = c.vocab_.add(term);
        c.vocab_.total_count_[id] = get_u64(is);
        c.vocab_.doc_frequency_[id] = get_u64(is);
    }
    auto an = get_u64(is);
    for (std::uint64_t i = 0; i < an; ++i) {
        std::string a = get_str(is);
        c.author_index_.emplace(a, static_cast<AuthorIndex>(c.authors_.size()));
        c.authors_.push_back(a);
    }
    auto ven = get_u64(is);
    for (std::uint64_t i = 0; i < ven; ++i) {
        std::string v = get_str(is);
        c.venue_index_.emplace(v, static_cast<VenueIndex>(c.venues_.size()));
        c.venues_.push_back(v);
    }
    auto dn = get_u64(is);
    for (std::uint64_t i = 0; i < dn; ++i) {
        Document d;
        d.doc_id = get_str(is);
        d.tokens = get_vec_u32<TermId>(is);
        d.authors = get_vec_u32<AuthorIndex>(is);
        auto v = get_u64(is);
        if (v) d.venue = static_cast<VenueIndex>(v - 1);
        d.year = static_cast<int>(static_cast<std::int64_t>(get_u64(is)));
        d.cites = get_vec_u32<DocIndex>(is);
        d.citation_count = static_cast<std::uint32_t>(get_u64(is));
        c.total_tokens_ += d.tokens.size();
        c.doc_index_.emplace(d.doc_id, static_cast<DocIndex>(c.docs_.size()));
        c.docs_.push_back(std::move(d));
    }
    c.rebuild_indexes();
    return c;
}

} // namespace efind
