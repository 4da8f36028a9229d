#include "bibstat/logit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "bibstat/dist.hpp"

namespace bibstat {

ModelSpec ModelSpec::from_cohort(const CohortSpec& spec, bool include_percentile) {
    ModelSpec m;
    m.citing_years = spec.citing_years;
    m.window_years = spec.window_years;
    m.country_set = spec.country_set;
    m.include_percentile = include_percentile;
    return m;
}

std::vector<std::string> ModelSpec::column_names() const {
    std::vector<std::string> names;
    names.push_back("intercept");
    for (std::size_t i = 1; i < citing_years.size(); ++i)
        names.push_back("citing_year_" + std::to_string(citing_years[i]));
    names.push_back("citing_num_countries");
    for (const auto& c : country_set) names.push_back(c);
    for (int b = 2; b <= window_years; ++b) names.push_back("years_back_" + std::to_string(b));
    names.push_back("cited_num_countries");
    names.push_back("english_paper");
    if (include_percentile) names.push_back("cited_percentile");
    return names;
}

std::size_t ModelSpec::dim() const {
    return 1 + (citing_years.size() - 1) + 1 + country_set.size() +
           static_cast<std::size_t>(window_years - 1) + 2 + (include_percentile ? 1 : 0);
}

Design build_design(const std::vector<ObservationRow>& rows, const ModelSpec& spec) {
    const std::size_t n = rows.size();
    const std::size_t k = spec.dim();
    Design design;
    design.column_names = spec.column_names();
    design.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    design.y.resize(static_cast<Eigen::Index>(n));

    for (std::size_t r = 0; r < n; ++r) {
        const ObservationRow& row = rows[r];
        const auto ri = static_cast<Eigen::Index>(r);
        Eigen::Index c = 0;
        design.X(ri, c++) = 1.0;
        for (std::size_t i = 1; i < spec.citing_years.size(); ++i)
            design.X(ri, c++) = row.citing_year == spec.citing_years[i] ? 1.0 : 0.0;
        design.X(ri, c++) = row.citing_num_countries;
        for (std::size_t i = 0; i < spec.country_set.size(); ++i)
            design.X(ri, c++) = row.country_flag(i) ? 1.0 : 0.0;
        for (int b = 2; b <= spec.window_years; ++b)
            design.X(ri, c++) = row.years_back == b ? 1.0 : 0.0;
        design.X(ri, c++) = row.cited_num_countries;
        design.X(ri, c++) = row.english_paper;
        if (spec.include_percentile) design.X(ri, c++) = row.cited_percentile;
        design.y(ri) = row.y;
    }
    return design;
}

namespace {

double log_likelihood_at(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = X * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        ll += y(i) * eta(i) - log1p_exp(eta(i));
    return ll;
}

void check_rank(const Eigen::MatrixXd& X, const std::vector<std::string>& names) {
    const Eigen::MatrixXd gram = X.transpose() * X;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();
    if (rank >= gram.cols()) return;
    std::vector<std::string> collinear;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = rank; i < gram.cols(); ++i)
        collinear.push_back(names[static_cast<std::size_t>(perm(i))]);
    std::string msg = "design matrix is rank deficient; collinear columns:";
    for (const auto& c : collinear) msg += " " + c;
    throw SingularDesignError(msg, std::move(collinear));
}

} // namespace

FitResult fit_logistic_design(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              std::vector<std::string> column_names, const FitOptions& options) {
    if (X.rows() < 2) throw InvalidArgumentError("fit_logistic: need at least 2 rows");
    if (X.rows() != y.size())
        throw SpecMismatchError("fit_logistic: X and y row counts differ");
    check_rank(X, column_names);

    const Eigen::Index k = X.cols();
    FitResult fit;
    fit.column_names = std::move(column_names);
    fit.n_obs = static_cast<std::size_t>(X.rows());
    fit.beta = Eigen::VectorXd::Zero(k);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    double ll = log_likelihood_at(X, y, beta);
    Eigen::VectorXd p(X.rows()), w(X.rows());

    // Stops on the score criterion: once a Newton step falls below the
    // beta-change tolerance the following score check passes, so both
    // criteria are covered and a converged fit always has a near-zero
    // gradient.
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        const Eigen::VectorXd eta = X * beta;
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            p(i) = logistic(eta(i));
            w(i) = std::max(p(i) * (1.0 - p(i)), 1e-10);
        }
        const Eigen::VectorXd score = X.transpose() * (y - p);
        fit.iterations = iter;
        fit.max_score = score.cwiseAbs().maxCoeff();
        if (fit.max_score < options.tolerance) {
            fit.converged = true;
            break;
        }

        const Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
        Eigen::VectorXd step = info.ldlt().solve(score);
        // Monotonicity check with rounding slack: near the optimum the
        // true gain of a polish step falls below the evaluation noise of
        // the likelihood sum, and rejecting those steps stalls the score.
        const double ll_slack = 1e-10 * (1.0 + std::fabs(ll));
        double new_ll = log_likelihood_at(X, y, beta + step);
        int halvings = 0;
        while (new_ll < ll - ll_slack && halvings < 40) {
            step *= 0.5;
            new_ll = log_likelihood_at(X, y, beta + step);
            ++halvings;
        }
        if (new_ll < ll - ll_slack) {
            fit.beta = beta;
            fit.log_likelihood = ll;
            throw NotConvergedError("fit_logistic: step halving failed to improve the likelihood",
                                    fit);
        }
        beta += step;
        ll = new_ll;
        // The likelihood is still improving, so runaway coefficients mean
        // separation rather than a numerical stall.
        if (beta.cwiseAbs().maxCoeff() > options.separation_bound) {
            fit.beta = beta;
            fit.log_likelihood = ll;
            throw SeparationError(
                "fit_logistic: coefficients diverging (likely complete or quasi-separation)");
        }
    }

    // Score and information at the accepted beta.
    const Eigen::VectorXd eta = X * beta;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        p(i) = logistic(eta(i));
        w(i) = std::max(p(i) * (1.0 - p(i)), 1e-10);
    }
    const Eigen::VectorXd score = X.transpose() * (y - p);
    fit.beta = beta;
    fit.log_likelihood = log_likelihood_at(X, y, beta);
    fit.max_score = score.cwiseAbs().maxCoeff();
    fit.converged = fit.max_score < options.tolerance;

    const Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
    const Eigen::MatrixXd naive = info.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    fit.naive_cov = 0.5 * (naive + naive.transpose());

    // A log-likelihood at zero means every outcome is predicted perfectly,
    // which no finite coefficient vector can do: the score underflowed
    // before the coefficients reached the divergence bound.
    if (fit.converged && fit.log_likelihood > -1e-3) {
        throw SeparationError(
            "fit_logistic: perfect fit reached (complete separation), coefficients unbounded");
    }

    if (!fit.converged) {
        // Name the most extreme coefficients; slowly drifting ones usually
        // mean a covariate pattern that predicts the outcome perfectly.
        std::vector<std::size_t> order(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::fabs(beta(static_cast<Eigen::Index>(a))) >
                   std::fabs(beta(static_cast<Eigen::Index>(b)));
        });
        std::string msg = "fit_logistic: no convergence after " +
                          std::to_string(options.max_iterations) + " iterations; largest |beta|:";
        for (std::size_t i = 0; i < order.size() && i < 3; ++i) {
            char entry[64];
            std::snprintf(entry, sizeof(entry), " %s=%.2f",
                          fit.column_names[order[i]].c_str(),
                          beta(static_cast<Eigen::Index>(order[i])));
            msg += entry;
        }
        throw NotConvergedError(msg, fit);
    }
    return fit;
}

FitResult fit_logistic(const std::vector<ObservationRow>& rows, const ModelSpec& spec,
                       const FitOptions& options) {
    Design design = build_design(rows, spec);
    FitResult fit = fit_logistic_design(design.X, design.y, design.column_names, options);
    fit.spec = spec;
    return fit;
}

Eigen::MatrixXd cluster_robust_covariance_design(FitResult& fit, const Eigen::MatrixXd& X,
                                                 const Eigen::VectorXd& y,
                                                 const std::vector<std::string>& cluster_ids,
                                                 bool small_sample_correction) {
    if (!fit.converged)
        throw InvalidArgumentError("cluster_robust_covariance: fit did not converge");
    if (static_cast<std::size_t>(X.rows()) != cluster_ids.size() ||
        static_cast<std::size_t>(X.rows()) != fit.n_obs)
        throw SpecMismatchError("cluster_robust_covariance: row count differs from the fit");

    const Eigen::Index k = X.cols();
    // Per-cluster score sums, clusters in first-appearance order.
    std::unordered_map<std::string_view, std::size_t> cluster_slot;
    std::vector<Eigen::VectorXd> cluster_scores;
    Eigen::VectorXd w(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        const double p = logistic(X.row(r) * fit.beta);
        w(r) = std::max(p * (1.0 - p), 1e-10);
        auto [it, inserted] =
            cluster_slot.emplace(cluster_ids[static_cast<std::size_t>(r)], cluster_scores.size());
        if (inserted) cluster_scores.push_back(Eigen::VectorXd::Zero(k));
        cluster_scores[it->second] += X.row(r).transpose() * (y(r) - p);
    }
    const std::size_t g = cluster_scores.size();
    if (g < 2) throw TooFewClustersError("cluster_robust_covariance: need at least 2 clusters");

    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (const auto& s : cluster_scores) meat += s * s.transpose();

    const Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
    const Eigen::MatrixXd bread = info.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd cov = bread * meat * bread;
    if (small_sample_correction) cov *= static_cast<double>(g) / static_cast<double>(g - 1);
    cov = 0.5 * (cov + cov.transpose());

    fit.n_clusters = g;
    fit.robust_cov = cov;
    return cov;
}

Eigen::MatrixXd cluster_robust_covariance(FitResult& fit, const std::vector<ObservationRow>& rows,
                                          bool small_sample_correction) {
    Design design = build_design(rows, fit.spec);
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (const auto& r : rows) ids.push_back(r.cluster_id);
    return cluster_robust_covariance_design(fit, design.X, design.y, ids,
                                            small_sample_correction);
}

double predict_probability(const FitResult& fit, const std::vector<double>& covariate_values) {
    if (covariate_values.size() + 1 != static_cast<std::size_t>(fit.beta.size()))
        throw SpecMismatchError("predict_probability: expected " +
                                std::to_string(fit.beta.size() - 1) + " covariates, got " +
                                std::to_string(covariate_values.size()));
    double eta = fit.beta(0);
    for (std::size_t i = 0; i < covariate_values.size(); ++i)
        eta += fit.beta(static_cast<Eigen::Index>(i + 1)) * covariate_values[i];
    return logistic(eta);
}

} // namespace bibstat
