#pragma once

// Seeded synthetic corpora with known ground truth. The generator plans
// everything first (structure, percentile ranks, outcome flags) and then
// materializes either observation rows or a full corpus from the same
// plan, so running the real pipeline over the generated corpus
// reproduces the generated rows row for row:
//
//   - cited papers receive distinct citation counts equal to their
//     planned rank inside an enlarged (field, year) stratum, padded with
//     inert filler papers, so their computed percentiles land exactly on
//     the planned grid values;
//   - citing articles are pushed above or below the top-1% line of their
//     own stratum according to the drawn outcome flag.
//
// singleton mode gives every citing article one reference and draws the
// outcome per row (an exact logistic model, for recovery tests);
// clustered mode draws several references per article and one shared
// outcome from the mean of the article's covariate rows (within-cluster
// dependence, for standard-error tests).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bibstat/cohort.hpp"
#include "bibstat/corpus.hpp"
#include "bibstat/logit.hpp"

namespace bibstat {

enum class SynthMode { singleton, clustered };

struct SynthConfig {
    std::size_t n_citing = 2000;
    double refs_per_citing = 1.0; // mean of 1 + Poisson(mean - 1)
    SynthMode mode = SynthMode::singleton;
    std::vector<int> citing_years{2004, 2009, 2014};
    std::vector<double> citing_year_weights{0.23, 0.31, 0.46};
    int window_years = 3;
    std::string field = "nat";
    std::string focal_country = "DE";
    std::vector<std::string> country_pool;  // defaults to a 45-country table
    std::vector<double> country_weights;    // citation-share weights
    std::vector<std::string> country_set;   // covariate countries, subset of pool
    std::vector<double> true_beta;          // design order, percentile included
    // Non-english rows anchor the english_paper coefficient; shares very
    // close to 1 quasi-separate small samples, so the default keeps a
    // usable margin and large-sample configs can push it higher.
    double english_share = 0.9;
    double percentile_alpha = 4.08; // Beta shape; defaults target mean ~80.3
    double percentile_beta = 1.0;
    double mean_citing_countries = 2.4;
    double mean_cited_countries = 1.9;

    SynthConfig();

    void validate() const; // throws InvalidArgumentError
    ModelSpec model_spec() const;
    CohortSpec cohort_spec() const;
};

struct SynthRows {
    std::vector<ObservationRow> rows;
    std::vector<double> true_beta;
    std::vector<std::string> design_columns;
};

SynthRows generate_rows(const SynthConfig& config, std::uint64_t seed);

Corpus generate_corpus(const SynthConfig& config, std::uint64_t seed);

SynthConfig synth_config_from_json(const std::string& text);
std::string synth_config_to_json(const SynthConfig& config);

// Ground-truth sidecar: seed, generator name, design columns, true beta.
void write_ground_truth(const SynthConfig& config, std::uint64_t seed, std::ostream& out);

} // namespace bibstat
