#pragma once

// Maximum-likelihood logistic regression by Newton steps (IRLS) with a
// cluster sandwich covariance. Model A excludes the cited paper's
// percentile, model B includes it; everything else about the design is
// shared so the two fits pair up row by row.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bibstat/cohort.hpp"
#include "bibstat/errors.hpp"

namespace bibstat {

struct ModelSpec {
    std::vector<int> citing_years{2004, 2009, 2014};
    int window_years = 3;
    std::vector<std::string> country_set;
    bool include_percentile = false; // false = model A, true = model B

    static ModelSpec from_cohort(const CohortSpec& spec, bool include_percentile);

    // Column names, intercept first.
    std::vector<std::string> column_names() const;
    std::size_t dim() const;
};

struct Design {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> column_names;
};

Design build_design(const std::vector<ObservationRow>& rows, const ModelSpec& spec);

struct FitResult {
    ModelSpec spec;
    std::vector<std::string> column_names;
    Eigen::VectorXd beta;      // intercept first
    Eigen::MatrixXd naive_cov; // inverse observed information
    std::optional<Eigen::MatrixXd> robust_cov;
    std::size_t n_obs = 0;
    std::size_t n_clusters = 0;
    int iterations = 0;
    bool converged = false;
    double log_likelihood = 0.0;
    double max_score = 0.0; // max |gradient component| at the final beta
};

class NotConvergedError : public Error {
public:
    NotConvergedError(const std::string& msg, FitResult partial)
        : Error(msg), partial_state(std::move(partial)) {}
    FitResult partial_state;
};

struct FitOptions {
    double tolerance = 1e-8; // on max |beta change| and max |score|
    int max_iterations = 100;
    double separation_bound = 30.0; // any |beta| beyond this while improving
};

// Core fitter on an explicit design; the first column is the intercept.
FitResult fit_logistic_design(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              std::vector<std::string> column_names,
                              const FitOptions& options = {});

FitResult fit_logistic(const std::vector<ObservationRow>& rows, const ModelSpec& spec,
                       const FitOptions& options = {});

// Sandwich V = c * A^-1 (sum_g s_g s_g^T) A^-1 with per-cluster score sums
// and c = g/(g-1); never touches the coefficients. Stores the result on
// the fit and returns it.
Eigen::MatrixXd cluster_robust_covariance_design(FitResult& fit, const Eigen::MatrixXd& X,
                                                 const Eigen::VectorXd& y,
                                                 const std::vector<std::string>& cluster_ids,
                                                 bool small_sample_correction = true);

Eigen::MatrixXd cluster_robust_covariance(FitResult& fit, const std::vector<ObservationRow>& rows,
                                          bool small_sample_correction = true);

// sigma(beta^T x) for one covariate vector (without the intercept slot).
double predict_probability(const FitResult& fit, const std::vector<double>& covariate_values);

} // namespace bibstat
