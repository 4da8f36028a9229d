#pragma once

// End-to-end drivers behind the command-line front end: each run writes
// its table and figure-data artifacts plus a manifest into one output
// directory. Data artifacts are deterministic functions of the inputs;
// the manifest additionally records the wall-clock timestamp.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bibstat/cohort.hpp"
#include "bibstat/corpus.hpp"
#include "bibstat/logit.hpp"
#include "bibstat/odds.hpp"
#include "bibstat/robustness.hpp"
#include "bibstat/synth.hpp"

namespace bibstat {

inline constexpr const char* kToolVersion = "bibstat 0.1.0";

struct RunManifest {
    std::string command;
    std::string config_path;
    std::map<std::string, std::string> input_hashes; // path -> fnv1a64
    std::vector<std::string> outputs;
    bool has_seed = false;
    std::uint64_t seed = 0;
    std::string timestamp_utc;
};

void write_manifest(const RunManifest& manifest, const std::string& out_dir);
std::string utc_timestamp();
std::string hash_file(const std::string& path);

struct AnalyzeOptions {
    std::size_t ranking_top = 10;
    std::string model = "both"; // "A", "B", or "both"
    std::string dump_percentiles; // optional extra artifact paths
    std::string dump_rows;
};

struct AnalyzeResult {
    std::vector<CountryRank> ranking;
    CohortSpec spec; // with the derived country set filled in
    std::size_t n_rows = 0;
    std::size_t dropped_rows = 0;
    std::vector<std::string> outputs;
};

// Ingest -> percentiles -> cohort -> fits -> tables. An empty cohort or
// an empty row set is an error. When spec.country_set is empty the top
// ten referenced countries are used, mirroring the published tables.
AnalyzeResult run_analyze(const Corpus& corpus, CohortSpec spec, const AnalyzeOptions& options,
                          const std::string& out_dir);

struct RobustnessRunResult {
    SweepResult sweep;
    std::vector<std::string> outputs;
};

RobustnessRunResult run_robustness(const Corpus& corpus, CohortSpec spec, std::uint64_t seed,
                                   const std::string& out_dir);

std::vector<std::string> run_synth(const SynthConfig& config, std::uint64_t seed,
                                   const std::string& out_dir);

// Cohort configuration document: focal_country, citing_years,
// window_years, country_set (optional), english_from_citing (optional).
CohortSpec cohort_spec_from_json(const std::string& text);

} // namespace bibstat
