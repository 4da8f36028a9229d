#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bibstat/errors.hpp"

namespace bibstat {

enum class DocType { article, other };

struct PaperRecord {
    std::string id;
    int year = 0;
    std::string field;
    std::vector<std::string> countries; // uppercased, sorted, unique
    std::string lang;                   // lowercased
    DocType doc_type = DocType::other;
    std::int64_t citation_count = 0;
};

struct CitationEdge {
    std::string citing_id;
    std::string cited_id;
};

struct LineError {
    std::size_t line = 0;
    std::string message;
};

struct IngestReport {
    std::size_t loaded = 0;
    std::vector<LineError> errors;
};

struct EdgeIngestReport {
    std::size_t stored = 0;
    std::size_t uncovered_refs = 0;
    std::size_t duplicates = 0;
    std::vector<LineError> errors;
};

struct ValidationReport {
    std::size_t papers = 0;
    std::size_t edges = 0;
    std::size_t uncovered_refs = 0;
    std::size_t duplicate_edges = 0;
    bool valid = true;
    std::vector<std::string> violations;
};

// Immutable after CorpusBuilder::validate(); safe for concurrent readers.
class Corpus {
public:
    const std::vector<PaperRecord>& papers() const { return papers_; }
    const std::vector<CitationEdge>& edges() const { return edges_; }
    int census_year() const { return census_year_; }
    std::size_t uncovered_refs() const { return uncovered_refs_; }
    std::size_t duplicate_edges() const { return duplicate_edges_; }

    const PaperRecord* find(std::string_view id) const;
    const PaperRecord& at(std::string_view id) const;

private:
    friend class CorpusBuilder;
    std::vector<PaperRecord> papers_; // sorted by id
    std::vector<CitationEdge> edges_; // sorted by (citing, cited)
    std::unordered_map<std::string_view, std::size_t> index_;
    int census_year_ = 0;
    std::size_t uncovered_refs_ = 0;
    std::size_t duplicate_edges_ = 0;
};

class CorpusBuilder {
public:
    // Throws DuplicateIdError; field-level problems go to the report.
    IngestReport ingest_papers(std::istream& input);
    // Requires papers first; unknown citing id is a hard error.
    EdgeIngestReport ingest_citations(std::istream& input);

    // Direct insertion for generated corpora (same invariants as ingest).
    void add_paper(PaperRecord record);
    void add_edge(std::string citing_id, std::string cited_id);
    void reserve(std::size_t papers, std::size_t edges);

    void set_census_year(int year) { census_year_ = year; }

    // Seals the corpus; any structural violation throws ValidationError.
    Corpus validate(ValidationReport* report = nullptr);

private:
    std::unordered_map<std::string, PaperRecord> papers_;
    std::vector<CitationEdge> edges_;
    std::unordered_map<std::string, std::size_t> edge_seen_;
    std::size_t uncovered_refs_ = 0;
    std::size_t duplicate_edges_ = 0;
    int census_year_ = 0;
    bool has_census_year_ = false;
};

// Re-checks every invariant of a sealed corpus; idempotent.
ValidationReport validate(const Corpus& corpus);

// Canonical serialization: papers sorted by id, edges by (citing, cited),
// fixed key order, one object per line. Round-trips bit-exactly.
void write_papers_jsonl(const Corpus& corpus, std::ostream& out);
void write_edges_jsonl(const Corpus& corpus, std::ostream& out);

Corpus read_corpus_dir(const std::string& dir);
void write_corpus_dir(const Corpus& corpus, const std::string& dir);

// FNV-1a 64-bit content hash, used for round-trip checks and manifests.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

} // namespace bibstat
