#include "bibstat/robustness.hpp"

#include <algorithm>

#include "bibstat/rng.hpp"

namespace bibstat {

namespace {

// First `count` elements of a seeded partial Fisher-Yates shuffle.
std::vector<std::string> draw_without_replacement(Rng& rng, std::vector<std::string> items,
                                                  std::size_t count) {
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count && !items.empty(); ++i) {
        const std::size_t pick = static_cast<std::size_t>(rng.bounded(items.size()));
        out.push_back(items[pick]);
        items.erase(items.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return out;
}

SweepConfigResult run_config(const Corpus& corpus, const CohortSpec& base,
                             const PercentileTable& table, std::string label,
                             std::vector<std::string> country_set,
                             std::vector<std::string> drawn) {
    CohortSpec spec = base;
    spec.country_set = std::move(country_set);

    SweepConfigResult result;
    result.label = std::move(label);
    result.country_set = spec.country_set;
    result.drawn = std::move(drawn);

    RowBuildResult rows = build_rows(corpus, spec, table);
    result.fit_a = fit_logistic(rows.rows, ModelSpec::from_cohort(spec, false));
    cluster_robust_covariance(result.fit_a, rows.rows);
    result.fit_b = fit_logistic(rows.rows, ModelSpec::from_cohort(spec, true));
    cluster_robust_covariance(result.fit_b, rows.rows);
    result.odds_a = odds_table(result.fit_a);
    result.odds_b = odds_table(result.fit_b);
    return result;
}

} // namespace

SweepResult robustness_sweep(const Corpus& corpus, const CohortSpec& spec,
                             const PercentileTable& table, std::uint64_t seed) {
    CohortSpec probe = spec;
    if (probe.country_set.empty()) probe.country_set = {"ZZ"}; // ranking does not use it
    const auto citing_set = select_citing(corpus, probe);
    const auto pairs = extract_window_refs(corpus, citing_set, probe);
    const auto ranking = top_referenced_countries(pairs, probe, 40);
    if (ranking.size() < 40)
        throw InsufficientCountriesError("robustness_sweep: need 40 ranked countries, found " +
                                         std::to_string(ranking.size()));

    SweepResult result;
    result.seed = seed;
    for (const auto& r : ranking) result.ranking.push_back(r.country);

    const std::vector<std::string> top5(result.ranking.begin(), result.ranking.begin() + 5);
    const std::vector<std::string> top10(result.ranking.begin(), result.ranking.begin() + 10);
    const std::vector<std::string> ranks_11_40(result.ranking.begin() + 10,
                                               result.ranking.begin() + 40);

    Rng rng = Rng::stream(seed, 0x0B0B5EEDULL);
    std::vector<std::string> draw5 = draw_without_replacement(rng, ranks_11_40, 5);
    std::vector<std::string> draw10 = draw_without_replacement(rng, ranks_11_40, 10);

    auto with_draw = [&](const std::vector<std::string>& base,
                         const std::vector<std::string>& extra) {
        std::vector<std::string> combined = base;
        combined.insert(combined.end(), extra.begin(), extra.end());
        return combined;
    };

    result.configs.push_back(run_config(corpus, spec, table, "5_countries", top5, {}));
    result.configs.push_back(
        run_config(corpus, spec, table, "15_countries", with_draw(top10, draw5), draw5));
    result.configs.push_back(
        run_config(corpus, spec, table, "20_countries", with_draw(top10, draw10), draw10));
    return result;
}

} // namespace bibstat
