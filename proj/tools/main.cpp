#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bibstat/percentiles.hpp"
#include "bibstat/pipeline.hpp"

namespace fs = std::filesystem;
using namespace bibstat;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgumentError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Corpus load_corpus(const std::string& corpus_dir, const std::string& papers_path,
                   const std::string& edges_path, RunManifest& manifest) {
    if (!corpus_dir.empty()) {
        manifest.input_hashes[corpus_dir + "/papers.jsonl"] =
            hash_file(corpus_dir + "/papers.jsonl");
        manifest.input_hashes[corpus_dir + "/edges.jsonl"] = hash_file(corpus_dir + "/edges.jsonl");
        return read_corpus_dir(corpus_dir);
    }
    if (papers_path.empty() || edges_path.empty())
        throw InvalidArgumentError("provide either --corpus or both --papers and --edges");
    manifest.input_hashes[papers_path] = hash_file(papers_path);
    manifest.input_hashes[edges_path] = hash_file(edges_path);
    CorpusBuilder builder;
    std::ifstream papers_in(papers_path);
    if (!papers_in) throw InvalidArgumentError("cannot open " + papers_path);
    IngestReport papers_report = builder.ingest_papers(papers_in);
    for (const auto& err : papers_report.errors)
        std::cerr << papers_path << ":" << err.line << ": skipped: " << err.message << "\n";
    std::ifstream edges_in(edges_path);
    if (!edges_in) throw InvalidArgumentError("cannot open " + edges_path);
    builder.ingest_citations(edges_in);
    return builder.validate();
}

CohortSpec load_cohort_spec(const std::string& config_path, const std::string& focal,
                            const std::vector<int>& years, int window,
                            bool english_from_citing) {
    CohortSpec spec;
    if (!config_path.empty()) spec = cohort_spec_from_json(read_file(config_path));
    if (!focal.empty()) spec.focal_country = focal;
    if (!years.empty()) spec.citing_years = years;
    if (window > 0) spec.window_years = window;
    if (english_from_citing) spec.english_from_citing = true;
    return spec;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"citation-impact analysis: field-normalized percentiles, cited-reference "
                 "cohorts, cluster-robust logistic models"};
    app.require_subcommand(1);

    std::string papers_path, edges_path, corpus_dir, config_path, out_dir;
    std::string model = "both";
    std::string focal;
    std::string dump_percentiles, dump_rows;
    std::vector<int> years;
    int window = 0;
    int census_year = 0;
    std::size_t countries_top = 10;
    std::uint64_t seed = 0;
    bool english_from_citing = false;

    std::function<int()> action;

    auto* ingest = app.add_subcommand("ingest", "Validate raw paper/edge files and persist the "
                                                "canonical corpus");
    ingest->add_option("--papers", papers_path, "papers JSON-lines file")->required();
    ingest->add_option("--edges", edges_path, "edges JSON-lines file")->required();
    ingest->add_option("--out", out_dir, "output corpus directory")->required();
    ingest->add_option("--census-year", census_year, "latest counted citation year");
    ingest->callback([&] {
        action = [&]() -> int {
            RunManifest manifest;
            manifest.command = "ingest";
            manifest.timestamp_utc = utc_timestamp();
            manifest.input_hashes[papers_path] = hash_file(papers_path);
            manifest.input_hashes[edges_path] = hash_file(edges_path);

            CorpusBuilder builder;
            std::ifstream papers_in(papers_path);
            if (!papers_in) throw InvalidArgumentError("cannot open " + papers_path);
            IngestReport papers_report = builder.ingest_papers(papers_in);
            for (const auto& err : papers_report.errors)
                std::cerr << papers_path << ":" << err.line << ": skipped: " << err.message
                          << "\n";
            std::ifstream edges_in(edges_path);
            if (!edges_in) throw InvalidArgumentError("cannot open " + edges_path);
            EdgeIngestReport edges_report = builder.ingest_citations(edges_in);
            if (census_year > 0) builder.set_census_year(census_year);

            ValidationReport report;
            Corpus corpus = builder.validate(&report);
            write_corpus_dir(corpus, out_dir);
            manifest.outputs = {"papers.jsonl", "edges.jsonl", "meta.json"};
            write_manifest(manifest, out_dir);

            std::cout << "papers: " << report.papers << " (skipped "
                      << papers_report.errors.size() << ")\n"
                      << "edges: " << report.edges << " (uncovered " << report.uncovered_refs
                      << ", duplicates " << report.duplicate_edges << ")\n"
                      << "corpus written to " << out_dir << "\n";
            return 0;
        };
    });

    auto* analyze = app.add_subcommand("analyze", "Build the cohort and fit models A/B, "
                                                  "emitting ranking, stats, odds and curve data");
    analyze->add_option("--corpus", corpus_dir, "corpus directory from ingest/synth");
    analyze->add_option("--papers", papers_path, "papers JSON-lines file");
    analyze->add_option("--edges", edges_path, "edges JSON-lines file");
    analyze->add_option("--config", config_path, "cohort configuration JSON");
    analyze->add_option("--out", out_dir, "output directory")->required();
    analyze->add_option("--model", model, "A, B, or both")->default_val("both");
    analyze->add_option("--focal", focal, "focal country code");
    analyze->add_option("--years", years, "citing years")->delimiter(',');
    analyze->add_option("--window", window, "cited-reference window in years");
    analyze->add_option("--countries-top", countries_top, "countries in the ranking table");
    analyze->add_option("--dump-percentiles", dump_percentiles, "write the percentile table TSV");
    analyze->add_option("--dump-rows", dump_rows, "write the observation rows TSV");
    analyze->add_flag("--english-from-citing", english_from_citing,
                      "derive english_paper from the citing side");
    analyze->callback([&] {
        action = [&]() -> int {
            RunManifest manifest;
            manifest.command = "analyze";
            manifest.config_path = config_path;
            manifest.timestamp_utc = utc_timestamp();
            if (!config_path.empty())
                manifest.input_hashes[config_path] = hash_file(config_path);
            Corpus corpus = load_corpus(corpus_dir, papers_path, edges_path, manifest);
            CohortSpec spec =
                load_cohort_spec(config_path, focal, years, window, english_from_citing);

            AnalyzeOptions options;
            options.ranking_top = countries_top;
            options.model = model;
            options.dump_percentiles = dump_percentiles;
            options.dump_rows = dump_rows;
            AnalyzeResult result = run_analyze(corpus, spec, options, out_dir);
            manifest.outputs = result.outputs;
            write_manifest(manifest, out_dir);
            std::cout << "rows: " << result.n_rows << " (dropped " << result.dropped_rows
                      << ")\nartifacts written to " << out_dir << "\n";
            return 0;
        };
    });

    auto* robustness = app.add_subcommand("robustness", "Run the 5/15/20-country sweep with "
                                                        "seeded draws from ranks 11-40");
    robustness->add_option("--corpus", corpus_dir, "corpus directory from ingest/synth");
    robustness->add_option("--papers", papers_path, "papers JSON-lines file");
    robustness->add_option("--edges", edges_path, "edges JSON-lines file");
    robustness->add_option("--config", config_path, "cohort configuration JSON");
    robustness->add_option("--out", out_dir, "output directory")->required();
    robustness->add_option("--seed", seed, "seed for the country draws")->required();
    robustness->add_option("--focal", focal, "focal country code");
    robustness->add_option("--years", years, "citing years")->delimiter(',');
    robustness->add_option("--window", window, "cited-reference window in years");
    robustness->callback([&] {
        action = [&]() -> int {
            RunManifest manifest;
            manifest.command = "robustness";
            manifest.config_path = config_path;
            manifest.has_seed = true;
            manifest.seed = seed;
            manifest.timestamp_utc = utc_timestamp();
            if (!config_path.empty())
                manifest.input_hashes[config_path] = hash_file(config_path);
            Corpus corpus = load_corpus(corpus_dir, papers_path, edges_path, manifest);
            CohortSpec spec = load_cohort_spec(config_path, focal, years, window, false);

            RobustnessRunResult result = run_robustness(corpus, spec, seed, out_dir);
            manifest.outputs = result.outputs;
            write_manifest(manifest, out_dir);
            std::cout << "configurations:";
            for (const auto& config : result.sweep.configs) std::cout << " " << config.label;
            std::cout << "\nartifacts written to " << out_dir << "\n";
            return 0;
        };
    });

    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus with a "
                                              "ground-truth sidecar");
    synth->add_option("--config", config_path, "generator configuration JSON");
    synth->add_option("--out", out_dir, "output corpus directory")->required();
    synth->add_option("--seed", seed, "generator seed")->required();
    synth->callback([&] {
        action = [&]() -> int {
            RunManifest manifest;
            manifest.command = "synth";
            manifest.config_path = config_path;
            manifest.has_seed = true;
            manifest.seed = seed;
            manifest.timestamp_utc = utc_timestamp();
            SynthConfig config;
            if (!config_path.empty()) {
                manifest.input_hashes[config_path] = hash_file(config_path);
                config = synth_config_from_json(read_file(config_path));
            } else {
                config.validate();
            }
            manifest.outputs = run_synth(config, seed, out_dir);
            write_manifest(manifest, out_dir);
            std::cout << "synthetic corpus written to " << out_dir << "\n";
            return 0;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return action();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
