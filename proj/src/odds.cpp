#include "bibstat/odds.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "bibstat/dist.hpp"

namespace bibstat {

namespace {

std::string stars_for(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

} // namespace

OddsTable odds_table(const FitResult& fit, double delta, InferenceRef ref) {
    if (!fit.converged) throw InvalidArgumentError("odds_table: fit did not converge");
    if (!fit.robust_cov)
        throw InvalidArgumentError("odds_table: robust covariance not computed");
    double crit = kZCritical95;
    if (ref == InferenceRef::t_clusters) {
        if (fit.n_clusters < 2)
            throw InvalidArgumentError("odds_table: t reference needs cluster count");
        crit = student_t_quantile(0.975, static_cast<double>(fit.n_clusters - 1));
    }

    OddsTable table;
    for (Eigen::Index i = 1; i < fit.beta.size(); ++i) {
        OddsRow row;
        row.name = fit.column_names[static_cast<std::size_t>(i)];
        row.beta = fit.beta(i);
        row.se = std::sqrt((*fit.robust_cov)(i, i));
        row.odds_ratio = std::exp(row.beta);
        row.ci_low = std::exp(row.beta - crit * row.se);
        row.ci_high = std::exp(row.beta + crit * row.se);
        row.pct_change = 100.0 * (std::exp(delta * row.beta) - 1.0);
        if (row.se > 0.0) {
            const double z = row.beta / row.se;
            row.p_value = ref == InferenceRef::t_clusters
                              ? two_sided_p_student_t(z, static_cast<double>(fit.n_clusters - 1))
                              : two_sided_p_normal(z);
        }
        row.stars = stars_for(row.p_value);
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::vector<std::optional<double>> factor_change(const OddsTable& table_a,
                                                 const OddsTable& table_b) {
    // Model A's covariates must lead model B's; B may add the percentile.
    if (table_b.rows.size() < table_a.rows.size())
        throw SpecMismatchError("factor_change: table B has fewer covariates than table A");
    for (std::size_t i = 0; i < table_a.rows.size(); ++i)
        if (table_a.rows[i].name != table_b.rows[i].name)
            throw SpecMismatchError("factor_change: covariate mismatch at \"" +
                                    table_a.rows[i].name + "\" vs \"" + table_b.rows[i].name +
                                    "\"");

    std::vector<std::optional<double>> factors;
    factors.reserve(table_a.rows.size());
    for (std::size_t i = 0; i < table_a.rows.size(); ++i) {
        const double a = table_a.rows[i].pct_change;
        const double b = table_b.rows[i].pct_change;
        if (std::fabs(a) < 1e-9 || std::fabs(b) < 1e-9 || (a > 0) != (b > 0)) {
            factors.push_back(std::nullopt);
        } else {
            factors.push_back(a / b);
        }
    }
    return factors;
}

std::vector<CurvePoint> prediction_curve(const FitResult& fit,
                                         const std::vector<ObservationRow>& rows,
                                         const std::string& flag_covariate) {
    const auto& names = fit.column_names;
    std::size_t flag_col = 0;
    bool found = false;
    for (std::size_t i = 1; i < names.size(); ++i)
        if (names[i] == flag_covariate) {
            flag_col = i;
            found = true;
            break;
        }
    if (!found)
        throw SpecMismatchError("prediction_curve: unknown covariate \"" + flag_covariate + "\"");

    Design design = build_design(rows, fit.spec);
    if (design.X.cols() != fit.beta.size())
        throw SpecMismatchError("prediction_curve: rows do not match the fit design");
    const Eigen::VectorXd means = design.X.colwise().mean();

    // Year dummy columns sit right after the intercept.
    const std::size_t n_year_dummies = fit.spec.citing_years.size() - 1;
    std::vector<CurvePoint> curve;
    for (std::size_t yi = 0; yi < fit.spec.citing_years.size(); ++yi) {
        for (int flag = 0; flag <= 1; ++flag) {
            Eigen::VectorXd x = means;
            x(0) = 1.0;
            for (std::size_t d = 0; d < n_year_dummies; ++d)
                x(static_cast<Eigen::Index>(1 + d)) = (yi == d + 1) ? 1.0 : 0.0;
            x(static_cast<Eigen::Index>(flag_col)) = flag;
            curve.push_back({fit.spec.citing_years[yi], flag, logistic(fit.beta.dot(x))});
        }
    }
    return curve;
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

namespace {

void write_odds_columns(const OddsRow& row, std::ostream& out) {
    out << format_fixed(row.odds_ratio, 2) << '\t' << format_fixed(row.ci_low, 2) << '\t'
        << format_fixed(row.ci_high, 2) << '\t' << format_fixed(row.pct_change, 1) << '\t'
        << row.stars;
}

} // namespace

void write_odds_tsv(const OddsTable& table_a, const OddsTable& table_b, std::ostream& out) {
    const auto factors = factor_change(table_a, table_b);
    out << "variable\tor_a\tci_low_a\tci_high_a\tpct_change_a\tstars_a"
           "\tor_b\tci_low_b\tci_high_b\tpct_change_b\tstars_b\tfactor_change\n";
    for (std::size_t i = 0; i < table_b.rows.size(); ++i) {
        out << table_b.rows[i].name << '\t';
        if (i < table_a.rows.size()) {
            write_odds_columns(table_a.rows[i], out);
        } else {
            out << "\t\t\t\t"; // model B only (the percentile row)
        }
        out << '\t';
        write_odds_columns(table_b.rows[i], out);
        out << '\t';
        if (i < factors.size() && factors[i]) out << format_fixed(*factors[i], 2);
        out << '\n';
    }
}

void write_single_odds_tsv(const OddsTable& table, std::ostream& out) {
    out << "variable\tor\tci_low\tci_high\tpct_change\tstars\n";
    for (const auto& row : table.rows) {
        out << row.name << '\t';
        write_odds_columns(row, out);
        out << '\n';
    }
}

void write_curve_tsv(const std::vector<CurvePoint>& curve, const std::string& flag_covariate,
                     std::ostream& out) {
    out << "citing_year\t" << flag_covariate << "\tprobability\n";
    for (const auto& pt : curve)
        out << pt.citing_year << '\t' << pt.flag_value << '\t'
            << format_fixed(pt.probability, 6) << '\n';
}

} // namespace bibstat
