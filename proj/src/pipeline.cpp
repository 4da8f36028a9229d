#include "bibstat/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bibstat/percentiles.hpp"
#include "bibstat/rng.hpp"

namespace bibstat {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgumentError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a64_hex(ss.str());
}

void write_manifest(const RunManifest& manifest, const std::string& out_dir) {
    ordered_json j;
    j["tool"] = kToolVersion;
    j["command"] = manifest.command;
    if (!manifest.config_path.empty()) j["config"] = manifest.config_path;
    ordered_json inputs;
    for (const auto& [path, hash] : manifest.input_hashes) inputs[path] = hash;
    j["inputs"] = inputs;
    j["outputs"] = manifest.outputs;
    if (manifest.has_seed) {
        j["seed"] = manifest.seed;
        j["rng"] = kRngAlgorithm;
    }
    j["timestamp_utc"] = manifest.timestamp_utc;
    std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::binary);
    out << j.dump(2) << "\n";
}

namespace {

void json_matrix(ordered_json& j, const char* key, const Eigen::MatrixXd& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    j[key] = flat;
}

ordered_json fit_to_json(const FitResult& fit) {
    ordered_json j;
    j["columns"] = fit.column_names;
    std::vector<double> beta(fit.beta.data(), fit.beta.data() + fit.beta.size());
    j["beta"] = beta;
    json_matrix(j, "naive_cov", fit.naive_cov);
    if (fit.robust_cov) json_matrix(j, "robust_cov", *fit.robust_cov);
    j["n_obs"] = fit.n_obs;
    j["n_clusters"] = fit.n_clusters;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["log_likelihood"] = fit.log_likelihood;
    return j;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

} // namespace

AnalyzeResult run_analyze(const Corpus& corpus, CohortSpec spec, const AnalyzeOptions& options,
                          const std::string& out_dir) {
    fs::create_directories(out_dir);
    AnalyzeResult result;

    const PercentileTable table = hazen_percentiles(corpus);

    CohortSpec probe = spec;
    if (probe.country_set.empty()) probe.country_set = {"ZZ"}; // ranking ignores it
    const auto citing_set = select_citing(corpus, probe);
    if (citing_set.empty())
        throw InvalidArgumentError("empty cohort: no " + spec.focal_country +
                                   " articles in the citing years");
    const auto pairs = extract_window_refs(corpus, citing_set, probe);
    if (pairs.empty())
        throw InvalidArgumentError("empty cohort: no cited references inside the window");

    result.ranking = top_referenced_countries(
        pairs, probe, std::max<std::size_t>(options.ranking_top, 10));
    if (spec.country_set.empty()) {
        for (std::size_t i = 0; i < result.ranking.size() && i < 10; ++i)
            spec.country_set.push_back(result.ranking[i].country);
    }
    if (result.ranking.size() > options.ranking_top) result.ranking.resize(options.ranking_top);
    spec.validate();
    result.spec = spec;

    RowBuildResult rows = build_rows(corpus, spec, table);
    if (rows.rows.empty()) throw InvalidArgumentError("empty cohort: no observation rows");
    result.n_rows = rows.rows.size();
    result.dropped_rows = rows.dropped;

    const bool want_a = options.model == "A" || options.model == "both";
    const bool want_b = options.model == "B" || options.model == "both";
    if (!want_a && !want_b)
        throw InvalidArgumentError("model must be \"A\", \"B\", or \"both\"");

    FitResult fit_a, fit_b;
    OddsTable odds_a, odds_b;
    if (want_a) {
        fit_a = fit_logistic(rows.rows, ModelSpec::from_cohort(spec, false));
        cluster_robust_covariance(fit_a, rows.rows);
        odds_a = odds_table(fit_a);
    }
    if (want_b) {
        fit_b = fit_logistic(rows.rows, ModelSpec::from_cohort(spec, true));
        cluster_robust_covariance(fit_b, rows.rows);
        odds_b = odds_table(fit_b);
    }

    auto emit = [&](const std::string& name, auto&& writer) {
        std::ostringstream ss;
        writer(ss);
        write_text_file(fs::path(out_dir) / name, ss.str());
        result.outputs.push_back(name);
    };

    emit("country_ranking.tsv",
         [&](std::ostream& out) { write_ranking_tsv(result.ranking, out); });
    emit("summary_stats.tsv", [&](std::ostream& out) {
        write_summary_tsv(summary_stats(rows.rows, spec), out);
    });
    if (want_a && want_b) {
        emit("odds_table.tsv", [&](std::ostream& out) { write_odds_tsv(odds_a, odds_b, out); });
    } else {
        emit("odds_table.tsv", [&](std::ostream& out) {
            write_single_odds_tsv(want_a ? odds_a : odds_b, out);
        });
    }

    // Figure data from model A when available, as in the published curves.
    const FitResult& curve_fit = want_a ? fit_a : fit_b;
    std::string flag = spec.country_set.front();
    for (const auto& c : spec.country_set)
        if (c == spec.focal_country) flag = c;
    emit("prediction_curve.tsv", [&](std::ostream& out) {
        write_curve_tsv(prediction_curve(curve_fit, rows.rows, flag), flag, out);
    });

    emit("results.json", [&](std::ostream& out) {
        ordered_json j;
        j["focal_country"] = spec.focal_country;
        j["citing_years"] = spec.citing_years;
        j["window_years"] = spec.window_years;
        j["country_set"] = spec.country_set;
        j["n_rows"] = result.n_rows;
        j["dropped_rows"] = result.dropped_rows;
        j["flag_covariate"] = flag;
        if (want_a) j["model_a"] = fit_to_json(fit_a);
        if (want_b) j["model_b"] = fit_to_json(fit_b);
        out << j.dump(2) << "\n";
    });

    if (!options.dump_percentiles.empty()) {
        std::ostringstream ss;
        write_percentiles_tsv(corpus, table, ss);
        write_text_file(options.dump_percentiles, ss.str());
    }
    if (!options.dump_rows.empty()) {
        std::ostringstream ss;
        write_rows_tsv(rows.rows, spec, ss);
        write_text_file(options.dump_rows, ss.str());
    }
    return result;
}

RobustnessRunResult run_robustness(const Corpus& corpus, CohortSpec spec, std::uint64_t seed,
                                   const std::string& out_dir) {
    fs::create_directories(out_dir);
    const PercentileTable table = hazen_percentiles(corpus);
    RobustnessRunResult result;
    result.sweep = robustness_sweep(corpus, spec, table, seed);

    auto emit = [&](const std::string& name, const std::string& content) {
        write_text_file(fs::path(out_dir) / name, content);
        result.outputs.push_back(name);
    };

    ordered_json meta;
    meta["seed"] = seed;
    meta["rng"] = kRngAlgorithm;
    meta["ranking_top40"] = result.sweep.ranking;
    ordered_json fits;
    for (const auto& config : result.sweep.configs) {
        std::ostringstream ss;
        write_odds_tsv(config.odds_a, config.odds_b, ss);
        emit("odds_" + config.label + ".tsv", ss.str());

        ordered_json c;
        c["label"] = config.label;
        c["country_set"] = config.country_set;
        c["drawn"] = config.drawn;
        c["model_a"] = fit_to_json(config.fit_a);
        c["model_b"] = fit_to_json(config.fit_b);
        fits.push_back(std::move(c));
    }
    meta["configs"] = fits;
    emit("robustness.json", meta.dump(2) + "\n");
    return result;
}

std::vector<std::string> run_synth(const SynthConfig& config, std::uint64_t seed,
                                   const std::string& out_dir) {
    fs::create_directories(out_dir);
    const Corpus corpus = generate_corpus(config, seed);
    write_corpus_dir(corpus, out_dir);
    std::ofstream truth(fs::path(out_dir) / "ground_truth.json", std::ios::binary);
    write_ground_truth(config, seed, truth);
    return {"papers.jsonl", "edges.jsonl", "meta.json", "ground_truth.json"};
}

CohortSpec cohort_spec_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    CohortSpec spec;
    if (j.contains("focal_country")) spec.focal_country = j["focal_country"].get<std::string>();
    if (j.contains("citing_years")) spec.citing_years = j["citing_years"].get<std::vector<int>>();
    if (j.contains("window_years")) spec.window_years = j["window_years"].get<int>();
    if (j.contains("country_set"))
        spec.country_set = j["country_set"].get<std::vector<std::string>>();
    if (j.contains("english_from_citing"))
        spec.english_from_citing = j["english_from_citing"].get<bool>();
    return spec;
}

} // namespace bibstat
