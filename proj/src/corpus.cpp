#include "bibstat/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bibstat {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string to_upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

std::string to_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

const char* kPaperKeys[] = {"id", "year", "field", "countries", "lang", "type", "cites"};

// Parses one papers-file line; returns an error message instead of a record
// when the line violates the schema.
std::string parse_paper_line(const std::string& line, PaperRecord& out) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        return std::string("invalid JSON: ") + e.what();
    }
    if (!j.is_object()) return "line is not a JSON object";
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : kPaperKeys)
            if (it.key() == k) known = true;
        if (!known) return "unexpected key \"" + it.key() + "\"";
    }
    for (const char* k : kPaperKeys)
        if (!j.contains(k)) return std::string("missing required field \"") + k + "\"";

    if (!j["id"].is_string() || j["id"].get<std::string>().empty())
        return "id must be a nonempty string";
    if (!j["year"].is_number_integer()) return "year must be an integer";
    if (!j["field"].is_string()) return "field must be a string";
    if (!j["lang"].is_string()) return "lang must be a string";
    if (!j["type"].is_string()) return "type must be a string";
    if (!j["cites"].is_number_integer()) return "cites must be an integer";
    if (j["cites"].get<std::int64_t>() < 0) return "cites must be nonnegative (citation_count >= 0)";
    if (!j["countries"].is_array()) return "countries must be an array";
    if (j["countries"].empty()) return "countries nonempty";

    const std::string type = j["type"].get<std::string>();
    if (type != "article" && type != "other")
        return "type must be \"article\" or \"other\"";

    out.id = j["id"].get<std::string>();
    out.year = j["year"].get<int>();
    out.field = j["field"].get<std::string>();
    out.lang = to_lower(j["lang"].get<std::string>());
    out.doc_type = type == "article" ? DocType::article : DocType::other;
    out.citation_count = j["cites"].get<std::int64_t>();

    out.countries.clear();
    for (const auto& c : j["countries"]) {
        if (!c.is_string() || c.get<std::string>().empty())
            return "countries entries must be nonempty strings";
        out.countries.push_back(to_upper(c.get<std::string>()));
    }
    std::sort(out.countries.begin(), out.countries.end());
    if (std::adjacent_find(out.countries.begin(), out.countries.end()) != out.countries.end())
        return "countries must not contain duplicates";
    return {};
}

std::string edge_key(std::string_view citing, std::string_view cited) {
    std::string k;
    k.reserve(citing.size() + cited.size() + 1);
    k.append(citing);
    k.push_back('\t');
    k.append(cited);
    return k;
}

void append_json_string(std::string& out, const std::string& s) {
    out += json(s).dump();
}

} // namespace

IngestReport CorpusBuilder::ingest_papers(std::istream& input) {
    IngestReport report;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(input, line)) {
        ++lineno;
        if (line.empty()) continue;
        PaperRecord rec;
        std::string err = parse_paper_line(line, rec);
        if (!err.empty()) {
            report.errors.push_back({lineno, err});
            continue;
        }
        if (papers_.count(rec.id))
            throw DuplicateIdError("duplicate paper id \"" + rec.id + "\" at line " +
                                   std::to_string(lineno));
        papers_.emplace(rec.id, std::move(rec));
        ++report.loaded;
    }
    return report;
}

EdgeIngestReport CorpusBuilder::ingest_citations(std::istream& input) {
    EdgeIngestReport report;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(input, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            report.errors.push_back({lineno, std::string("invalid JSON: ") + e.what()});
            continue;
        }
        if (!j.is_object() || !j.contains("citing") || !j.contains("cited") ||
            !j["citing"].is_string() || !j["cited"].is_string()) {
            report.errors.push_back({lineno, "edge must be {\"citing\": id, \"cited\": id}"});
            continue;
        }
        std::string citing = j["citing"].get<std::string>();
        std::string cited = j["cited"].get<std::string>();
        if (!papers_.count(citing))
            throw ValidationError("citing id \"" + citing + "\" at line " + std::to_string(lineno) +
                                  " is not a known paper");
        if (!papers_.count(cited)) {
            ++uncovered_refs_;
            ++report.uncovered_refs;
            continue;
        }
        auto [it, inserted] = edge_seen_.emplace(edge_key(citing, cited), edges_.size());
        if (!inserted) {
            ++duplicate_edges_;
            ++report.duplicates;
            continue;
        }
        edges_.push_back({std::move(citing), std::move(cited)});
        ++report.stored;
    }
    return report;
}

void CorpusBuilder::reserve(std::size_t papers, std::size_t edges) {
    papers_.reserve(papers);
    edges_.reserve(edges);
    edge_seen_.reserve(edges);
}

void CorpusBuilder::add_paper(PaperRecord record) {
    if (papers_.count(record.id))
        throw DuplicateIdError("duplicate paper id \"" + record.id + "\"");
    std::string id = record.id;
    papers_.emplace(std::move(id), std::move(record));
}

void CorpusBuilder::add_edge(std::string citing_id, std::string cited_id) {
    if (!papers_.count(citing_id))
        throw ValidationError("citing id \"" + citing_id + "\" is not a known paper");
    if (!papers_.count(cited_id)) {
        ++uncovered_refs_;
        return;
    }
    auto [it, inserted] = edge_seen_.emplace(edge_key(citing_id, cited_id), edges_.size());
    if (!inserted) {
        ++duplicate_edges_;
        return;
    }
    edges_.push_back({std::move(citing_id), std::move(cited_id)});
}

Corpus CorpusBuilder::validate(ValidationReport* report_out) {
    Corpus corpus;
    corpus.papers_.reserve(papers_.size());
    for (auto& [id, rec] : papers_) corpus.papers_.push_back(std::move(rec));
    std::sort(corpus.papers_.begin(), corpus.papers_.end(),
              [](const PaperRecord& a, const PaperRecord& b) { return a.id < b.id; });
    corpus.index_.reserve(corpus.papers_.size());
    for (std::size_t i = 0; i < corpus.papers_.size(); ++i)
        corpus.index_.emplace(corpus.papers_[i].id, i);

    corpus.edges_ = std::move(edges_);
    std::sort(corpus.edges_.begin(), corpus.edges_.end(),
              [](const CitationEdge& a, const CitationEdge& b) {
                  if (a.citing_id != b.citing_id) return a.citing_id < b.citing_id;
                  return a.cited_id < b.cited_id;
              });

    if (!has_census_year_) {
        int max_year = 0;
        for (const auto& p : corpus.papers_) max_year = std::max(max_year, p.year);
        census_year_ = max_year;
    }
    corpus.census_year_ = census_year_;
    corpus.uncovered_refs_ = uncovered_refs_;
    corpus.duplicate_edges_ = duplicate_edges_;

    ValidationReport report = bibstat::validate(corpus);
    if (report_out) *report_out = report;
    if (!report.valid) {
        std::string msg = "corpus validation failed:";
        for (const auto& v : report.violations) msg += "\n  " + v;
        throw ValidationError(msg);
    }

    papers_.clear();
    edge_seen_.clear();
    return corpus;
}

const PaperRecord* Corpus::find(std::string_view id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &papers_[it->second];
}

const PaperRecord& Corpus::at(std::string_view id) const {
    const PaperRecord* p = find(id);
    if (!p) throw KeyNotFoundError("unknown paper id \"" + std::string(id) + "\"");
    return *p;
}

ValidationReport validate(const Corpus& corpus) {
    ValidationReport report;
    report.papers = corpus.papers().size();
    report.edges = corpus.edges().size();
    report.uncovered_refs = corpus.uncovered_refs();
    report.duplicate_edges = corpus.duplicate_edges();

    auto violation = [&](std::string msg) {
        report.valid = false;
        report.violations.push_back(std::move(msg));
    };

    for (std::size_t i = 1; i < corpus.papers().size(); ++i)
        if (corpus.papers()[i - 1].id == corpus.papers()[i].id)
            violation("duplicate paper id \"" + corpus.papers()[i].id + "\"");
    for (const auto& p : corpus.papers()) {
        if (p.countries.empty()) violation("paper \"" + p.id + "\": countries nonempty");
        if (std::adjacent_find(p.countries.begin(), p.countries.end()) != p.countries.end())
            violation("paper \"" + p.id + "\": duplicate country codes");
        if (p.citation_count < 0) violation("paper \"" + p.id + "\": citation_count >= 0");
    }
    for (std::size_t i = 0; i < corpus.edges().size(); ++i) {
        const auto& e = corpus.edges()[i];
        if (e.citing_id == e.cited_id)
            violation("self-edge (" + e.citing_id + ", " + e.cited_id + ")");
        if (!corpus.find(e.citing_id))
            violation("edge citing id \"" + e.citing_id + "\" unresolved");
        if (!corpus.find(e.cited_id))
            violation("edge cited id \"" + e.cited_id + "\" unresolved");
        if (i > 0) {
            const auto& prev = corpus.edges()[i - 1];
            if (prev.citing_id == e.citing_id && prev.cited_id == e.cited_id)
                violation("duplicate edge (" + e.citing_id + ", " + e.cited_id + ")");
        }
    }
    return report;
}

void write_papers_jsonl(const Corpus& corpus, std::ostream& out) {
    std::string buf;
    for (const auto& p : corpus.papers()) {
        buf.clear();
        buf += "{\"id\":";
        append_json_string(buf, p.id);
        buf += ",\"year\":";
        buf += std::to_string(p.year);
        buf += ",\"field\":";
        append_json_string(buf, p.field);
        buf += ",\"countries\":[";
        for (std::size_t i = 0; i < p.countries.size(); ++i) {
            if (i) buf += ',';
            append_json_string(buf, p.countries[i]);
        }
        buf += "],\"lang\":";
        append_json_string(buf, p.lang);
        buf += ",\"type\":";
        buf += p.doc_type == DocType::article ? "\"article\"" : "\"other\"";
        buf += ",\"cites\":";
        buf += std::to_string(p.citation_count);
        buf += "}\n";
        out << buf;
    }
}

void write_edges_jsonl(const Corpus& corpus, std::ostream& out) {
    std::string buf;
    for (const auto& e : corpus.edges()) {
        buf.clear();
        buf += "{\"citing\":";
        append_json_string(buf, e.citing_id);
        buf += ",\"cited\":";
        append_json_string(buf, e.cited_id);
        buf += "}\n";
        out << buf;
    }
}

Corpus read_corpus_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path papers_path = fs::path(dir) / "papers.jsonl";
    const fs::path edges_path = fs::path(dir) / "edges.jsonl";
    const fs::path meta_path = fs::path(dir) / "meta.json";

    std::ifstream papers_in(papers_path);
    if (!papers_in) throw InvalidArgumentError("cannot open " + papers_path.string());
    std::ifstream edges_in(edges_path);
    if (!edges_in) throw InvalidArgumentError("cannot open " + edges_path.string());

    CorpusBuilder builder;
    IngestReport pr = builder.ingest_papers(papers_in);
    if (!pr.errors.empty())
        throw ValidationError("malformed line " + std::to_string(pr.errors.front().line) + " in " +
                              papers_path.string() + ": " + pr.errors.front().message);
    builder.ingest_citations(edges_in);

    std::ifstream meta_in(meta_path);
    if (meta_in) {
        json meta = json::parse(meta_in);
        if (meta.contains("census_year")) builder.set_census_year(meta["census_year"].get<int>());
    }
    return builder.validate();
}

void write_corpus_dir(const Corpus& corpus, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream out(fs::path(dir) / "papers.jsonl", std::ios::binary);
        write_papers_jsonl(corpus, out);
    }
    {
        std::ofstream out(fs::path(dir) / "edges.jsonl", std::ios::binary);
        write_edges_jsonl(corpus, out);
    }
    {
        ordered_json meta;
        meta["census_year"] = corpus.census_year();
        meta["papers"] = corpus.papers().size();
        meta["edges"] = corpus.edges().size();
        meta["uncovered_refs"] = corpus.uncovered_refs();
        meta["duplicate_edges"] = corpus.duplicate_edges();
        std::ofstream out(fs::path(dir) / "meta.json", std::ios::binary);
        out << meta.dump(2) << "\n";
    }
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view data) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(data);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

} // namespace bibstat
