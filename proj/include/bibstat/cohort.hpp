#pragma once

// Cited-reference analysis dataset for one focal country: citing articles
// are the country's journal articles from the chosen publication years,
// each kept reference becomes one observation row carrying covariates of
// both the citing and the cited side, clustered by citing article.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_set>
#include <vector>

#include "bibstat/corpus.hpp"
#include "bibstat/percentiles.hpp"

namespace bibstat {

struct CohortSpec {
    std::string focal_country;
    std::vector<int> citing_years{2004, 2009, 2014};
    int window_years = 3;
    std::vector<std::string> country_set;
    // Source of the english_paper covariate; the cited paper's language is
    // the default, the citing paper's language is available as a switch.
    bool english_from_citing = false;

    void validate() const; // throws InvalidArgumentError
};

struct ObservationRow {
    std::string cluster_id; // citing paper id
    std::string cited_id;
    std::uint8_t y = 0; // citing article highly cited
    int citing_year = 0;
    int citing_num_countries = 1;
    std::uint64_t country_mask = 0; // bit k = country_set[k] present on cited paper
    int years_back = 1;             // citing_year - cited_year, in [1, window]
    int cited_num_countries = 1;
    std::uint8_t english_paper = 0;
    double cited_percentile = 0.0;

    bool country_flag(std::size_t k) const { return (country_mask >> k) & 1ULL; }
};

struct RowBuildResult {
    std::vector<ObservationRow> rows;
    std::size_t dropped = 0;
};

struct CountryRank {
    std::string country;
    double per_year_total = 0.0; // fractional total / number of citing years
};

struct VariableStats {
    std::string name;
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double max = 0.0;
};

using RefPair = std::pair<const PaperRecord*, const PaperRecord*>; // (citing, cited)

// Articles of the focal country published in the citing years.
std::unordered_set<std::string> select_citing(const Corpus& corpus, const CohortSpec& spec);

// Keeps (citing, cited) edges whose cited side is an article published
// 1..window years before the citing article.
std::vector<RefPair> extract_window_refs(const Corpus& corpus,
                                         const std::unordered_set<std::string>& citing_set,
                                         const CohortSpec& spec);

// Fractional counts over the cited side of every pair (a paper cited m
// times contributes m times), averaged per citing year, ranked descending
// with lexicographic tie-breaks.
std::vector<CountryRank> top_referenced_countries(const std::vector<RefPair>& ref_pairs,
                                                  const CohortSpec& spec, std::size_t k);

// One row per kept pair, sorted by (cluster_id, cited_id); pairs whose
// cited paper has no percentile are dropped and counted.
RowBuildResult build_rows(const Corpus& corpus, const CohortSpec& spec,
                          const PercentileTable& table);

// Variable roster order: dependent, citing-level, country flags,
// years-back, cited-level, percentile.
std::vector<std::string> variable_names(const CohortSpec& spec);

std::vector<VariableStats> summary_stats(const std::vector<ObservationRow>& rows,
                                         const CohortSpec& spec);

// Header = variable names plus cluster_id; floats 6 decimals, binaries 0/1.
void write_rows_tsv(const std::vector<ObservationRow>& rows, const CohortSpec& spec,
                    std::ostream& out);

void write_ranking_tsv(const std::vector<CountryRank>& ranking, std::ostream& out);

void write_summary_tsv(const std::vector<VariableStats>& stats, std::ostream& out);

} // namespace bibstat
