#pragma once

// Three-tier country-set robustness protocol: the five most referenced
// countries, then the top ten plus five random picks from ranks 11-40,
// then the top ten plus ten random picks, each fitted as paired models
// A and B. Draws are seeded and echoed into the result.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bibstat/cohort.hpp"
#include "bibstat/logit.hpp"
#include "bibstat/odds.hpp"

namespace bibstat {

struct SweepConfigResult {
    std::string label;
    std::vector<std::string> country_set;
    std::vector<std::string> drawn; // random picks, in draw order
    FitResult fit_a;
    FitResult fit_b;
    OddsTable odds_a;
    OddsTable odds_b;
};

struct SweepResult {
    std::uint64_t seed = 0;
    std::vector<std::string> ranking; // top 40 referenced countries
    std::vector<SweepConfigResult> configs;
};

SweepResult robustness_sweep(const Corpus& corpus, const CohortSpec& spec,
                             const PercentileTable& table, std::uint64_t seed);

} // namespace bibstat
