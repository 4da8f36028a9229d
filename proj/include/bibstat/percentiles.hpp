#pragma once

// Field- and year-normalized citation percentiles. Within each
// (field, publication year) stratum papers are ranked ascending by
// citation count, tied counts share the average of their ranks, and the
// percentile is 100*(rank - 0.5)/n, so higher impact means a higher
// percentile and every stratum's percentiles average to exactly 50.
// A paper is highly cited when its percentile reaches 99, i.e. it sits
// in the top 1% of its stratum; tie groups cross that line as a unit.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bibstat/corpus.hpp"

namespace bibstat {

inline constexpr double kHighlyCitedPercentile = 99.0;

// Shared formula so generated fixtures and the engine agree bit-for-bit.
inline double hazen_value(double average_rank, std::size_t stratum_size) {
    return 100.0 * (average_rank - 0.5) / static_cast<double>(stratum_size);
}

struct PercentileEntry {
    double percentile = 0.0;
    bool highly_cited = false;
};

using StratumKey = std::pair<std::string, int>; // (field, year)

class PercentileTable {
public:
    const PercentileEntry& at(std::string_view paper_id) const;
    bool contains(std::string_view paper_id) const {
        return entries_.find(std::string(paper_id)) != entries_.end();
    }
    std::size_t stratum_size(const std::string& field, int year) const;

    const std::unordered_map<std::string, PercentileEntry>& entries() const { return entries_; }
    const std::map<StratumKey, std::size_t>& strata() const { return strata_; }

private:
    friend PercentileTable hazen_percentiles(const Corpus&);
    std::unordered_map<std::string, PercentileEntry> entries_;
    std::map<StratumKey, std::size_t> strata_;
};

PercentileTable hazen_percentiles(const Corpus& corpus);

bool classify_highly_cited(const PercentileTable& table, std::string_view paper_id);

struct FractionalCounts {
    std::map<std::string, double> totals;
    double sum() const;
};

// Each paper splits one unit of credit equally across its countries.
FractionalCounts fractional_country_counts(const std::vector<const PaperRecord*>& papers);
FractionalCounts fractional_country_counts(const std::vector<PaperRecord>& papers);

// Columns: paper_id, field, year, percentile (6 decimals), highly_cited (0/1).
void write_percentiles_tsv(const Corpus& corpus, const PercentileTable& table, std::ostream& out);

} // namespace bibstat
