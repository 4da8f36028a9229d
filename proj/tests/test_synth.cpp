#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "bibstat/percentiles.hpp"
#include "bibstat/pipeline.hpp"
#include "bibstat/synth.hpp"

using namespace bibstat;

namespace {

std::string rows_fingerprint(const std::vector<ObservationRow>& rows) {
    std::ostringstream ss;
    for (const auto& r : rows) {
        ss << r.cluster_id << '|' << r.cited_id << '|' << int(r.y) << '|' << r.citing_year << '|'
           << r.citing_num_countries << '|' << r.country_mask << '|' << r.years_back << '|'
           << r.cited_num_countries << '|' << int(r.english_paper) << '|';
        ss.write(reinterpret_cast<const char*>(&r.cited_percentile), sizeof(double));
    }
    return ss.str();
}

} // namespace

TEST_CASE("same seed, same bytes; different seeds, different draws") {
    SynthConfig config;
    config.n_citing = 300;
    const std::string a = rows_fingerprint(generate_rows(config, 42).rows);
    const std::string b = rows_fingerprint(generate_rows(config, 42).rows);
    CHECK(a == b);

    std::set<std::uint64_t> hashes;
    for (std::uint64_t seed = 1; seed <= 100; ++seed)
        hashes.insert(fnv1a64(rows_fingerprint(generate_rows(config, seed).rows)));
    CHECK(hashes.size() == 100);
}

TEST_CASE("corpus generation is deterministic too") {
    SynthConfig config;
    config.n_citing = 200;
    std::ostringstream a, b;
    write_papers_jsonl(generate_corpus(config, 9), a);
    write_papers_jsonl(generate_corpus(config, 9), b);
    CHECK(a.str() == b.str());
}

TEST_CASE("pipeline closure: rebuilt rows equal generated rows bit for bit") {
    SynthConfig config;
    config.n_citing = 600;
    for (const SynthMode mode : {SynthMode::singleton, SynthMode::clustered}) {
        config.mode = mode;
        config.refs_per_citing = mode == SynthMode::clustered ? 5.0 : 1.0;
        for (const std::uint64_t seed : {1ULL, 77ULL}) {
            const SynthRows direct = generate_rows(config, seed);
            const Corpus corpus = generate_corpus(config, seed);
            const PercentileTable table = hazen_percentiles(corpus);
            const RowBuildResult rebuilt = build_rows(corpus, config.cohort_spec(), table);

            REQUIRE(rebuilt.dropped == 0);
            REQUIRE(rebuilt.rows.size() == direct.rows.size());
            CHECK(rows_fingerprint(rebuilt.rows) == rows_fingerprint(direct.rows));
        }
    }
}

TEST_CASE("zero-coefficient singleton rows have a balanced outcome") {
    SynthConfig config;
    config.n_citing = 100000;
    config.true_beta.assign(config.true_beta.size(), 0.0);
    auto out = generate_rows(config, 4);
    double mean = 0.0;
    for (const auto& r : out.rows) mean += r.y;
    mean /= static_cast<double>(out.rows.size());
    CHECK(mean == doctest::Approx(0.5).epsilon(0.02)); // +-0.01 absolute
}

TEST_CASE("configured marginals are hit within binomial tolerance") {
    SynthConfig config;
    config.n_citing = 20000;
    config.english_share = 0.997;
    auto out = generate_rows(config, 12);
    const double n = static_cast<double>(out.rows.size());

    double year2009 = 0, year2014 = 0, english = 0, citing_nc = 0, cited_nc = 0, pct = 0;
    for (const auto& r : out.rows) {
        year2009 += r.citing_year == 2009;
        year2014 += r.citing_year == 2014;
        english += r.english_paper;
        citing_nc += r.citing_num_countries;
        cited_nc += r.cited_num_countries;
        pct += r.cited_percentile;
    }
    auto within_3sigma = [&](double got, double p) {
        const double sigma = std::sqrt(p * (1.0 - p) / n);
        return std::fabs(got / n - p) <= 3.0 * sigma;
    };
    CHECK(within_3sigma(year2009, 0.31));
    CHECK(within_3sigma(year2014, 0.46));
    CHECK(within_3sigma(english, 0.997));
    CHECK(citing_nc / n == doctest::Approx(2.4).epsilon(0.03));
    CHECK(cited_nc / n == doctest::Approx(1.9).epsilon(0.03));
    // mean cited percentile within +-2 of the configured target ~80.3
    CHECK(std::fabs(pct / n - 80.3) < 2.0);
}

TEST_CASE("empty generator run produces a valid empty corpus") {
    SynthConfig config;
    config.n_citing = 0;
    Corpus corpus = generate_corpus(config, 1);
    CHECK(corpus.papers().empty());
    CHECK(corpus.edges().empty());
    CHECK(validate(corpus).valid);
    CHECK(generate_rows(config, 1).rows.empty());
}

TEST_CASE("config validation rejects inconsistent settings") {
    SynthConfig config;
    SUBCASE("refs mean below one") {
        config.refs_per_citing = 0.5;
        CHECK_THROWS_AS(config.validate(), InvalidArgumentError);
    }
    SUBCASE("true beta length must match the design") {
        config.true_beta.pop_back();
        CHECK_THROWS_AS(config.validate(), InvalidArgumentError);
    }
    SUBCASE("covariate country missing from the pool") {
        config.country_set.push_back("QQ");
        CHECK_THROWS_AS(config.validate(), InvalidArgumentError);
    }
    SUBCASE("citing years may not fall inside a cited window") {
        config.citing_years = {2004, 2006, 2014};
        config.citing_year_weights = {0.3, 0.3, 0.4};
        CHECK_THROWS_AS(config.validate(), InvalidArgumentError);
    }
    SUBCASE("weights must match years") {
        config.citing_year_weights.pop_back();
        CHECK_THROWS_AS(config.validate(), InvalidArgumentError);
    }
}

TEST_CASE("config JSON round-trips and rejects bad modes") {
    SynthConfig config;
    config.n_citing = 123;
    config.mode = SynthMode::clustered;
    config.refs_per_citing = 7.5;
    const std::string text = synth_config_to_json(config);
    SynthConfig back = synth_config_from_json(text);
    CHECK(back.n_citing == 123);
    CHECK(back.mode == SynthMode::clustered);
    CHECK(back.refs_per_citing == 7.5);
    CHECK(back.true_beta == config.true_beta);

    CHECK_THROWS_AS(synth_config_from_json(R"({"mode":"bogus"})"), InvalidArgumentError);
}

TEST_CASE("ground-truth sidecar names the generator and the design") {
    SynthConfig config;
    std::ostringstream out;
    write_ground_truth(config, 99, out);
    const std::string text = out.str();
    CHECK(text.find("\"splitmix64\"") != std::string::npos);
    CHECK(text.find("\"seed\": 99") != std::string::npos);
    CHECK(text.find("cited_percentile") != std::string::npos);
}

TEST_CASE("singleton recovery lands near a known coefficient") {
    SynthConfig config;
    config.n_citing = 50000;
    config.english_share = 0.98;
    config.percentile_alpha = 1.0;
    config.percentile_beta = 1.0;
    config.true_beta[0] = -7.2;
    config.true_beta[5] = std::log(0.89); // DE flag

    Corpus corpus = generate_corpus(config, 8);
    PercentileTable table = hazen_percentiles(corpus);
    auto rows = build_rows(corpus, config.cohort_spec(), table);
    REQUIRE(rows.rows.size() == 50000);
    FitResult fit = fit_logistic(rows.rows, config.model_spec());
    cluster_robust_covariance(fit, rows.rows);
    const double orr = std::exp(fit.beta(5));
    CHECK(orr > 0.84);
    CHECK(orr < 0.94);
}
