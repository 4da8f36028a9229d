#include "bibstat/percentiles.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace bibstat {

PercentileTable hazen_percentiles(const Corpus& corpus) {
    // Ordered map keeps stratum processing deterministic.
    std::map<StratumKey, std::vector<const PaperRecord*>> strata;
    for (const auto& p : corpus.papers())
        strata[{p.field, p.year}].push_back(&p);

    PercentileTable table;
    table.entries_.reserve(corpus.papers().size());
    for (auto& [key, members] : strata) {
        std::sort(members.begin(), members.end(), [](const PaperRecord* a, const PaperRecord* b) {
            if (a->citation_count != b->citation_count)
                return a->citation_count < b->citation_count;
            return a->id < b->id;
        });
        const std::size_t n = members.size();
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && members[j + 1]->citation_count == members[i]->citation_count) ++j;
            // 1-based ranks i+1..j+1 share their average.
            const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            const double pct = hazen_value(avg_rank, n);
            for (std::size_t k = i; k <= j; ++k)
                table.entries_[members[k]->id] = {pct, pct >= kHighlyCitedPercentile};
            i = j + 1;
        }
        table.strata_[key] = n;
    }
    return table;
}

const PercentileEntry& PercentileTable::at(std::string_view paper_id) const {
    auto it = entries_.find(std::string(paper_id));
    if (it == entries_.end())
        throw KeyNotFoundError("no percentile for paper id \"" + std::string(paper_id) + "\"");
    return it->second;
}

std::size_t PercentileTable::stratum_size(const std::string& field, int year) const {
    auto it = strata_.find({field, year});
    if (it == strata_.end())
        throw KeyNotFoundError("no stratum (" + field + ", " + std::to_string(year) + ")");
    return it->second;
}

bool classify_highly_cited(const PercentileTable& table, std::string_view paper_id) {
    return table.at(paper_id).highly_cited;
}

FractionalCounts fractional_country_counts(const std::vector<const PaperRecord*>& papers) {
    FractionalCounts counts;
    for (const PaperRecord* p : papers) {
        if (p->countries.empty())
            throw InvalidArgumentError("paper \"" + p->id + "\" has no countries");
        const double share = 1.0 / static_cast<double>(p->countries.size());
        for (const auto& c : p->countries) counts.totals[c] += share;
    }
    return counts;
}

FractionalCounts fractional_country_counts(const std::vector<PaperRecord>& papers) {
    std::vector<const PaperRecord*> ptrs;
    ptrs.reserve(papers.size());
    for (const auto& p : papers) ptrs.push_back(&p);
    return fractional_country_counts(ptrs);
}

double FractionalCounts::sum() const {
    double s = 0.0;
    for (const auto& [country, total] : totals) s += total;
    return s;
}

void write_percentiles_tsv(const Corpus& corpus, const PercentileTable& table, std::ostream& out) {
    out << "paper_id\tfield\tyear\tpercentile\thighly_cited\n";
    char buf[64];
    for (const auto& p : corpus.papers()) {
        const PercentileEntry& e = table.at(p.id);
        std::snprintf(buf, sizeof(buf), "%.6f", e.percentile);
        out << p.id << '\t' << p.field << '\t' << p.year << '\t' << buf << '\t'
            << (e.highly_cited ? '1' : '0') << '\n';
    }
}

} // namespace bibstat
