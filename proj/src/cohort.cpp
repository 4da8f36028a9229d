#include "bibstat/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <unordered_map>

namespace bibstat {

void CohortSpec::validate() const {
    if (focal_country.empty()) throw InvalidArgumentError("focal_country must be set");
    if (citing_years.empty()) throw InvalidArgumentError("citing_years must be nonempty");
    for (std::size_t i = 1; i < citing_years.size(); ++i)
        if (citing_years[i] <= citing_years[i - 1])
            throw InvalidArgumentError("citing_years must be strictly increasing");
    // The years-back dummies cover differences of 2 and 3 only.
    if (window_years < 1 || window_years > 3)
        throw InvalidArgumentError("window_years must be in [1, 3]");
    if (country_set.empty()) throw InvalidArgumentError("country_set must be nonempty");
    if (country_set.size() > 64) throw InvalidArgumentError("country_set limited to 64 entries");
    std::vector<std::string> sorted = country_set;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw InvalidArgumentError("country_set must not contain duplicates");
}

std::unordered_set<std::string> select_citing(const Corpus& corpus, const CohortSpec& spec) {
    std::unordered_set<std::string> selected;
    for (const auto& p : corpus.papers()) {
        if (p.doc_type != DocType::article) continue;
        if (std::find(spec.citing_years.begin(), spec.citing_years.end(), p.year) ==
            spec.citing_years.end())
            continue;
        if (!std::binary_search(p.countries.begin(), p.countries.end(), spec.focal_country))
            continue;
        selected.insert(p.id);
    }
    return selected;
}

std::vector<RefPair> extract_window_refs(const Corpus& corpus,
                                         const std::unordered_set<std::string>& citing_set,
                                         const CohortSpec& spec) {
    std::vector<RefPair> pairs;
    for (const auto& e : corpus.edges()) {
        if (!citing_set.count(e.citing_id)) continue;
        const PaperRecord& citing = corpus.at(e.citing_id);
        const PaperRecord& cited = corpus.at(e.cited_id);
        if (cited.doc_type != DocType::article) continue;
        const int back = citing.year - cited.year;
        if (back < 1 || back > spec.window_years) continue;
        pairs.emplace_back(&citing, &cited);
    }
    return pairs;
}

std::vector<CountryRank> top_referenced_countries(const std::vector<RefPair>& ref_pairs,
                                                  const CohortSpec& spec, std::size_t k) {
    if (k == 0) throw InvalidArgumentError("top_referenced_countries: k must be positive");
    std::vector<const PaperRecord*> cited;
    cited.reserve(ref_pairs.size());
    for (const auto& [citing, ref] : ref_pairs) cited.push_back(ref);
    FractionalCounts counts = fractional_country_counts(cited);

    const double denom = static_cast<double>(spec.citing_years.size());
    std::vector<CountryRank> ranking;
    ranking.reserve(counts.totals.size());
    for (const auto& [country, total] : counts.totals)
        ranking.push_back({country, total / denom});
    std::sort(ranking.begin(), ranking.end(), [](const CountryRank& a, const CountryRank& b) {
        if (a.per_year_total != b.per_year_total) return a.per_year_total > b.per_year_total;
        return a.country < b.country;
    });
    if (ranking.size() > k) ranking.resize(k);
    return ranking;
}

RowBuildResult build_rows(const Corpus& corpus, const CohortSpec& spec,
                          const PercentileTable& table) {
    spec.validate();
    const auto citing_set = select_citing(corpus, spec);
    const auto pairs = extract_window_refs(corpus, citing_set, spec);

    RowBuildResult result;
    result.rows.reserve(pairs.size());
    for (const auto& [citing, cited] : pairs) {
        if (!table.contains(citing->id) || !table.contains(cited->id)) {
            ++result.dropped;
            continue;
        }
        ObservationRow row;
        row.cluster_id = citing->id;
        row.cited_id = cited->id;
        row.y = table.at(citing->id).highly_cited ? 1 : 0;
        row.citing_year = citing->year;
        row.citing_num_countries = static_cast<int>(citing->countries.size());
        for (std::size_t i = 0; i < spec.country_set.size(); ++i)
            if (std::binary_search(cited->countries.begin(), cited->countries.end(),
                                   spec.country_set[i]))
                row.country_mask |= 1ULL << i;
        row.years_back = citing->year - cited->year;
        row.cited_num_countries = static_cast<int>(cited->countries.size());
        const std::string& lang = spec.english_from_citing ? citing->lang : cited->lang;
        row.english_paper = lang == "en" ? 1 : 0;
        row.cited_percentile = table.at(cited->id).percentile;
        result.rows.push_back(std::move(row));
    }
    std::sort(result.rows.begin(), result.rows.end(),
              [](const ObservationRow& a, const ObservationRow& b) {
                  if (a.cluster_id != b.cluster_id) return a.cluster_id < b.cluster_id;
                  return a.cited_id < b.cited_id;
              });
    return result;
}

std::vector<std::string> variable_names(const CohortSpec& spec) {
    std::vector<std::string> names;
    names.push_back("highly_cited");
    for (std::size_t i = 1; i < spec.citing_years.size(); ++i)
        names.push_back("citing_year_" + std::to_string(spec.citing_years[i]));
    names.push_back("citing_num_countries");
    for (const auto& c : spec.country_set) names.push_back(c);
    for (int b = 2; b <= spec.window_years; ++b)
        names.push_back("years_back_" + std::to_string(b));
    names.push_back("cited_num_countries");
    names.push_back("english_paper");
    names.push_back("cited_percentile");
    return names;
}

namespace {

// Values in variable_names() order for one row.
void row_values(const ObservationRow& row, const CohortSpec& spec, std::vector<double>& out) {
    out.clear();
    out.push_back(row.y);
    for (std::size_t i = 1; i < spec.citing_years.size(); ++i)
        out.push_back(row.citing_year == spec.citing_years[i] ? 1.0 : 0.0);
    out.push_back(row.citing_num_countries);
    for (std::size_t i = 0; i < spec.country_set.size(); ++i)
        out.push_back(row.country_flag(i) ? 1.0 : 0.0);
    for (int b = 2; b <= spec.window_years; ++b)
        out.push_back(row.years_back == b ? 1.0 : 0.0);
    out.push_back(row.cited_num_countries);
    out.push_back(row.english_paper);
    out.push_back(row.cited_percentile);
}

} // namespace

std::vector<VariableStats> summary_stats(const std::vector<ObservationRow>& rows,
                                         const CohortSpec& spec) {
    if (rows.empty()) throw InvalidArgumentError("summary_stats: rows must be nonempty");
    const std::vector<std::string> names = variable_names(spec);
    const std::size_t k = names.size();
    const double n = static_cast<double>(rows.size());

    std::vector<double> sum(k, 0.0), sumsq(k, 0.0);
    std::vector<double> mn(k, std::numeric_limits<double>::infinity());
    std::vector<double> mx(k, -std::numeric_limits<double>::infinity());
    std::vector<double> vals;
    for (const auto& row : rows) {
        row_values(row, spec, vals);
        for (std::size_t i = 0; i < k; ++i) {
            sum[i] += vals[i];
            mn[i] = std::min(mn[i], vals[i]);
            mx[i] = std::max(mx[i], vals[i]);
        }
    }
    std::vector<double> mean(k);
    for (std::size_t i = 0; i < k; ++i) mean[i] = sum[i] / n;
    // Second pass keeps the sample variance numerically clean.
    for (const auto& row : rows) {
        row_values(row, spec, vals);
        for (std::size_t i = 0; i < k; ++i) {
            const double d = vals[i] - mean[i];
            sumsq[i] += d * d;
        }
    }

    std::vector<VariableStats> stats(k);
    for (std::size_t i = 0; i < k; ++i) {
        stats[i].name = names[i];
        stats[i].mean = mean[i];
        stats[i].sd = rows.size() > 1 ? std::sqrt(sumsq[i] / (n - 1.0)) : 0.0;
        stats[i].min = mn[i];
        stats[i].max = mx[i];
    }
    return stats;
}

void write_rows_tsv(const std::vector<ObservationRow>& rows, const CohortSpec& spec,
                    std::ostream& out) {
    const std::vector<std::string> names = variable_names(spec);
    for (std::size_t i = 0; i < names.size(); ++i) out << names[i] << '\t';
    out << "cluster_id\n";

    char buf[64];
    std::vector<double> vals;
    for (const auto& row : rows) {
        row_values(row, spec, vals);
        for (std::size_t i = 0; i < vals.size(); ++i) {
            // cited_percentile is the only non-integral column.
            if (i + 1 == vals.size()) {
                std::snprintf(buf, sizeof(buf), "%.6f", vals[i]);
                out << buf;
            } else {
                out << static_cast<long long>(vals[i]);
            }
            out << '\t';
        }
        out << row.cluster_id << '\n';
    }
}

void write_ranking_tsv(const std::vector<CountryRank>& ranking, std::ostream& out) {
    out << "rank\tcountry\tfractional_count\n";
    char buf[64];
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.2f", ranking[i].per_year_total);
        out << (i + 1) << '\t' << ranking[i].country << '\t' << buf << '\n';
    }
}

void write_summary_tsv(const std::vector<VariableStats>& stats, std::ostream& out) {
    out << "variable\tmean\tsd\tmin\tmax\n";
    char buf[256];
    for (const auto& s : stats) {
        std::snprintf(buf, sizeof(buf), "%.6f\t%.6f\t%.6f\t%.6f", s.mean, s.sd, s.min, s.max);
        out << s.name << '\t' << buf << '\n';
    }
}

} // namespace bibstat
