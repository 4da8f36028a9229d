#include <doctest.h>

#include <cmath>
#include <cstring>

#include "bibstat/dist.hpp"
#include "bibstat/logit.hpp"
#include "bibstat/rng.hpp"
#include "bibstat/synth.hpp"

using namespace bibstat;

namespace {

struct SmallFit {
    FitResult fit;
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

SmallFit random_fit(std::uint64_t seed, Eigen::Index n = 60) {
    Rng rng(seed);
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = rng.normal();
        X(i, 2) = static_cast<double>(rng.bounded(2));
        y(i) = rng.bernoulli(logistic(-0.3 + 0.8 * X(i, 1) - 0.5 * X(i, 2))) ? 1.0 : 0.0;
    }
    SmallFit out;
    out.X = X;
    out.y = y;
    out.fit = fit_logistic_design(X, y, {"intercept", "x1", "x2"});
    return out;
}

} // namespace

TEST_CASE("singleton clusters with the correction off reduce to HC0") {
    SmallFit sf = random_fit(404);
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < sf.X.rows(); ++i) ids.push_back("row" + std::to_string(i));
    const Eigen::MatrixXd got =
        cluster_robust_covariance_design(sf.fit, sf.X, sf.y, ids, /*small_sample=*/false);

    // Independent HC0 route: bread * X' diag((y-p)^2) X * bread.
    Eigen::VectorXd p(sf.X.rows()), w(sf.X.rows());
    for (Eigen::Index i = 0; i < sf.X.rows(); ++i) {
        p(i) = logistic(sf.X.row(i) * sf.fit.beta);
        w(i) = p(i) * (1.0 - p(i));
    }
    const Eigen::MatrixXd info = sf.X.transpose() * w.asDiagonal() * sf.X;
    const Eigen::MatrixXd bread = info.inverse();
    Eigen::VectorXd r2 = (sf.y - p).array().square();
    const Eigen::MatrixXd hc0 = bread * (sf.X.transpose() * r2.asDiagonal() * sf.X) * bread;

    for (Eigen::Index a = 0; a < 3; ++a)
        for (Eigen::Index b = 0; b < 3; ++b)
            REQUIRE(got(a, b) == doctest::Approx(hc0(a, b)).epsilon(1e-10));
}

TEST_CASE("two-cluster sandwich matches the symbolic hand computation") {
    // Design: intercept + binary x. Groups: x=0 with successes 1/2,
    // x=1 with successes 3/4, so beta = (0, ln 3).
    // Cluster 1 = {(0,1), (1,1), (1,1)}, cluster 2 = {(0,0), (1,1), (1,0)}.
    // Residuals: +1/2, -1/2 at x=0; +1/4, -3/4 at x=1.
    // s1 = (1, 1/2), s2 = -s1, meat = [[2,1],[1,1/2]].
    // A = [[5/4,3/4],[3/4,3/4]], A^-1 = [[2,-2],[-2,10/3]].
    // A^-1 meat A^-1 = [[2,-2/3],[-2/3,2/9]]; c = 2 doubles it.
    Eigen::MatrixXd X(6, 2);
    Eigen::VectorXd y(6);
    const double xs[6] = {0, 1, 1, 0, 1, 1};
    const double ys[6] = {1, 1, 1, 0, 1, 0};
    std::vector<std::string> ids = {"g1", "g1", "g1", "g2", "g2", "g2"};
    for (int i = 0; i < 6; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = xs[i];
        y(i) = ys[i];
    }
    FitResult fit = fit_logistic_design(X, y, {"intercept", "x"});
    REQUIRE(fit.beta(0) == doctest::Approx(0.0).epsilon(1e-8));
    REQUIRE(fit.beta(1) == doctest::Approx(std::log(3.0)).epsilon(1e-8));

    const Eigen::MatrixXd cov = cluster_robust_covariance_design(fit, X, y, ids);
    CHECK(fit.n_clusters == 2);
    CHECK(cov(0, 0) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(cov(0, 1) == doctest::Approx(-4.0 / 3.0).epsilon(1e-10));
    CHECK(cov(1, 0) == doctest::Approx(-4.0 / 3.0).epsilon(1e-10));
    CHECK(cov(1, 1) == doctest::Approx(4.0 / 9.0).epsilon(1e-10));
}

TEST_CASE("the covariance step never touches the coefficients") {
    SynthConfig config;
    config.n_citing = 300;
    config.mode = SynthMode::clustered;
    config.refs_per_citing = 6.0;
    auto out = generate_rows(config, 21);
    FitResult fit = fit_logistic(out.rows, config.model_spec());
    std::vector<double> before(fit.beta.data(), fit.beta.data() + fit.beta.size());
    cluster_robust_covariance(fit, out.rows);
    CHECK(std::memcmp(before.data(), fit.beta.data(), before.size() * sizeof(double)) == 0);
}

TEST_CASE("covariances are symmetric positive semi-definite") {
    SmallFit sf = random_fit(11);
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < sf.X.rows(); ++i) ids.push_back("c" + std::to_string(i % 7));
    cluster_robust_covariance_design(sf.fit, sf.X, sf.y, ids);
    for (const Eigen::MatrixXd& m : {sf.fit.naive_cov, *sf.fit.robust_cov}) {
        CHECK((m - m.transpose()).cwiseAbs().maxCoeff() < 1e-14);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
    }
}

TEST_CASE("fewer than two clusters is rejected") {
    SmallFit sf = random_fit(3);
    std::vector<std::string> ids(static_cast<std::size_t>(sf.X.rows()), "only");
    CHECK_THROWS_AS(cluster_robust_covariance_design(sf.fit, sf.X, sf.y, ids),
                    TooFewClustersError);
}

TEST_CASE("clustered outcomes inflate the cluster-constant covariate's robust SE") {
    SynthConfig config;
    config.n_citing = 300;
    config.mode = SynthMode::clustered;
    config.refs_per_citing = 10.0;
    config.true_beta[0] = -2.0; // comfortable event rate for small fits

    const Eigen::Index col = 3; // citing_num_countries, constant within article
    int robust_larger = 0;
    const int runs = 100;
    for (int seed = 1; seed <= runs; ++seed) {
        auto out = generate_rows(config, static_cast<std::uint64_t>(seed));
        FitResult fit = fit_logistic(out.rows, config.model_spec());
        cluster_robust_covariance(fit, out.rows);
        const double naive = std::sqrt(fit.naive_cov(col, col));
        const double robust = std::sqrt((*fit.robust_cov)(col, col));
        if (robust > naive) ++robust_larger;
    }
    // Within-cluster dependence must show up in the corrected errors.
    CHECK(robust_larger >= 95);
}

TEST_CASE("95% intervals cover the truth in at least 90 of 100 seeded runs") {
    SynthConfig config;
    config.n_citing = 2500;
    config.true_beta[0] = -2.5;

    const std::vector<Eigen::Index> tracked = {0, 5, 18}; // intercept, DE flag, percentile
    std::vector<int> covered(tracked.size(), 0);
    const int runs = 100;
    for (int seed = 1; seed <= runs; ++seed) {
        auto out = generate_rows(config, static_cast<std::uint64_t>(seed));
        FitResult fit = fit_logistic(out.rows, config.model_spec());
        cluster_robust_covariance(fit, out.rows);
        for (std::size_t t = 0; t < tracked.size(); ++t) {
            const Eigen::Index j = tracked[t];
            const double se = std::sqrt((*fit.robust_cov)(j, j));
            const double lo = fit.beta(j) - 1.959964 * se;
            const double hi = fit.beta(j) + 1.959964 * se;
            if (lo <= config.true_beta[static_cast<std::size_t>(j)] &&
                config.true_beta[static_cast<std::size_t>(j)] <= hi)
                ++covered[t];
        }
    }
    for (std::size_t t = 0; t < tracked.size(); ++t) {
        INFO("coefficient index ", tracked[t], " covered ", covered[t], "/100");
        CHECK(covered[t] >= 90);
    }
}
