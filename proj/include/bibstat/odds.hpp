#pragma once

// Effect-size views of a fitted model: odds ratios with Wald confidence
// intervals on the cluster-robust scale, percentage change in odds per
// unit increase, significance stars, the A/B factor-change column, and
// predicted-probability grids for the figure data.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bibstat/logit.hpp"

namespace bibstat {

// Wald 95% critical value on the normal reference.
inline constexpr double kZCritical95 = 1.959964;

enum class InferenceRef {
    normal,    // z = 1.959964, p-values from the normal
    t_clusters // Student t with (clusters - 1) degrees of freedom
};

struct OddsRow {
    std::string name;
    double beta = 0.0;
    double se = 0.0;
    double odds_ratio = 1.0;
    double ci_low = 1.0;
    double ci_high = 1.0;
    double pct_change = 0.0;
    double p_value = 1.0;
    std::string stars; // "", *, **, ***
};

struct OddsTable {
    std::vector<OddsRow> rows; // covariates only, intercept omitted
};

OddsTable odds_table(const FitResult& fit, double delta = 1.0,
                     InferenceRef ref = InferenceRef::normal);

// pct_A / pct_B per shared covariate; empty when the signs differ or
// either percentage is numerically zero (those table cells stay blank).
std::vector<std::optional<double>> factor_change(const OddsTable& table_a,
                                                 const OddsTable& table_b);

struct CurvePoint {
    int citing_year = 0;
    int flag_value = 0;
    double probability = 0.0;
};

// Probabilities over (citing year x flag in {0,1}) with every other
// covariate held at its mean over the supplied rows.
std::vector<CurvePoint> prediction_curve(const FitResult& fit,
                                         const std::vector<ObservationRow>& rows,
                                         const std::string& flag_covariate);

// Table layout: one covariate per line, model A columns then model B
// columns then the factor-change column. Pass the same table twice to
// render a single model.
void write_odds_tsv(const OddsTable& table_a, const OddsTable& table_b, std::ostream& out);
void write_single_odds_tsv(const OddsTable& table, std::ostream& out);
void write_curve_tsv(const std::vector<CurvePoint>& curve, const std::string& flag_covariate,
                     std::ostream& out);

std::string format_fixed(double value, int decimals);

} // namespace bibstat
