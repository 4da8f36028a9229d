#include "bibstat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "bibstat/dist.hpp"
#include "bibstat/percentiles.hpp"
#include "bibstat/rng.hpp"

namespace bibstat {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

struct PoolEntry {
    const char* code;
    double weight;
};

constexpr PoolEntry kDefaultPool[] = {
    {"US", 30.0}, {"DE", 25.0}, {"UK", 9.0},  {"FR", 7.5},  {"JP", 6.5},  {"CN", 6.0},
    {"IT", 4.5},  {"CA", 4.2},  {"CH", 3.6},  {"NL", 3.4},  {"ES", 3.0},  {"AU", 2.8},
    {"SE", 2.2},  {"KR", 2.0},  {"IN", 1.8},  {"BR", 1.6},  {"RU", 1.5},  {"PL", 1.3},
    {"BE", 1.25}, {"AT", 1.2},  {"DK", 1.15}, {"FI", 1.1},  {"NO", 1.05}, {"IL", 1.0},
    {"TR", 0.95}, {"GR", 0.9},  {"PT", 0.85}, {"CZ", 0.8},  {"HU", 0.78}, {"IE", 0.75},
    {"NZ", 0.72}, {"ZA", 0.7},  {"SG", 0.68}, {"MX", 0.65}, {"AR", 0.62}, {"HK", 0.62},
    {"CL", 0.6},  {"TH", 0.58}, {"MY", 0.55}, {"EG", 0.52}, {"SA", 0.5},  {"UA", 0.48},
    {"RO", 0.46}, {"SK", 0.44}, {"SI", 0.42},
};

std::vector<double> default_true_beta() {
    return {
        -7.0,               // intercept
        std::log(1.15),     // citing_year_2009
        std::log(1.47),     // citing_year_2014
        std::log(1.12),     // citing_num_countries
        std::log(1.52),     // US
        std::log(0.89),     // DE
        std::log(1.37),     // UK
        std::log(1.16),     // FR
        std::log(1.10),     // JP
        std::log(1.23),     // CN
        std::log(1.17),     // IT
        std::log(1.33),     // CA
        std::log(1.03),     // CH
        std::log(1.20),     // NL
        std::log(0.91),     // years_back_2
        std::log(0.78),     // years_back_3
        std::log(0.92),     // cited_num_countries
        std::log(2.17),     // english_paper
        std::log(1.038),    // cited_percentile
    };
}

struct PlannedRef {
    int back = 1;
    int cited_year = 0;
    std::vector<std::string> countries; // sorted
    bool english = true;
    double pct_target = 50.0;
    std::size_t slot = 0;
    std::int64_t citation_count = 0;
    double percentile = 0.0;
};

struct PlannedArticle {
    int year = 0;
    std::vector<std::string> countries; // sorted, contains the focal country
    bool highly_cited = false;
    std::vector<PlannedRef> refs;
};

struct CitedStratum {
    std::vector<bool> used; // 1-based ranks taken by planned cited papers
};

struct CitingStratum {
    std::size_t n = 0;                 // stratum size including filler
    std::vector<std::size_t> articles; // indices into plan.articles
    std::size_t flagged = 0;
};

struct SynthPlan {
    std::vector<PlannedArticle> articles;
    std::map<int, CitedStratum> cited_strata;   // by publication year
    std::map<int, CitingStratum> citing_strata; // by citing year
};

int draw_categorical(Rng& rng, const std::vector<double>& weights, double total) {
    double u = rng.next_double() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        u -= weights[i];
        if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

std::vector<std::string> weighted_sample_without_replacement(Rng& rng,
                                                             const std::vector<std::string>& items,
                                                             const std::vector<double>& weights,
                                                             std::size_t count,
                                                             const std::string& exclude) {
    std::vector<std::size_t> idx;
    double total = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i] == exclude) continue;
        idx.push_back(i);
        total += weights[i];
    }
    count = std::min(count, idx.size());
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t draw = 0; draw < count; ++draw) {
        double u = rng.next_double() * total;
        std::size_t pick = idx.size() - 1;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            u -= weights[idx[j]];
            if (u < 0.0) {
                pick = j;
                break;
            }
        }
        out.push_back(items[idx[pick]]);
        total -= weights[idx[pick]];
        idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return out;
}

// Stratum ranks per planned paper so the snapped grid keeps the target
// distribution: the peak density of the Beta shape bounds the local
// demand per rank.
std::size_t stratum_expand_factor(double alpha, double beta_param) {
    double fmax = 1.0;
    const double log_norm =
        std::lgamma(alpha + beta_param) - std::lgamma(alpha) - std::lgamma(beta_param);
    for (int i = 1; i < 1000; ++i) {
        const double x = i / 1000.0;
        const double logf =
            log_norm + (alpha - 1.0) * std::log(x) + (beta_param - 1.0) * std::log1p(-x);
        fmax = std::max(fmax, std::exp(logf));
    }
    return static_cast<std::size_t>(std::clamp(std::ceil(fmax * 1.2), 2.0, 12.0));
}

std::string citing_id(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "C%09zu", i + 1);
    return buf;
}

std::string cited_id(std::size_t slot) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "R%09zu", slot + 1);
    return buf;
}

ObservationRow make_row(const SynthConfig& config, const PlannedArticle& article,
                        const PlannedRef& ref, const std::string& cluster,
                        const std::string& cited) {
    ObservationRow row;
    row.cluster_id = cluster;
    row.cited_id = cited;
    row.y = article.highly_cited ? 1 : 0;
    row.citing_year = article.year;
    row.citing_num_countries = static_cast<int>(article.countries.size());
    for (std::size_t k = 0; k < config.country_set.size(); ++k)
        if (std::binary_search(ref.countries.begin(), ref.countries.end(),
                               config.country_set[k]))
            row.country_mask |= 1ULL << k;
    row.years_back = ref.back;
    row.cited_num_countries = static_cast<int>(ref.countries.size());
    row.english_paper = ref.english ? 1 : 0;
    row.cited_percentile = ref.percentile;
    return row;
}

SynthPlan plan_synth(const SynthConfig& config, std::uint64_t seed) {
    config.validate();
    SynthPlan plan;
    plan.articles.resize(config.n_citing);

    double year_weight_total = 0.0;
    for (double w : config.citing_year_weights) year_weight_total += w;

    // Structure: one stream per article, so generation order is free.
    for (std::size_t i = 0; i < config.n_citing; ++i) {
        Rng rng = Rng::stream(seed, i + 1);
        PlannedArticle& article = plan.articles[i];
        article.year =
            config.citing_years[static_cast<std::size_t>(
                draw_categorical(rng, config.citing_year_weights, year_weight_total))];
        const std::size_t extra =
            static_cast<std::size_t>(rng.poisson(config.mean_citing_countries - 1.0));
        article.countries = weighted_sample_without_replacement(
            rng, config.country_pool, config.country_weights, extra, config.focal_country);
        article.countries.push_back(config.focal_country);
        std::sort(article.countries.begin(), article.countries.end());

        const std::size_t m =
            config.mode == SynthMode::singleton
                ? 1
                : 1 + static_cast<std::size_t>(rng.poisson(config.refs_per_citing - 1.0));
        article.refs.resize(m);
        for (auto& ref : article.refs) {
            ref.back = 1 + static_cast<int>(rng.bounded(
                               static_cast<std::uint64_t>(config.window_years)));
            ref.cited_year = article.year - ref.back;
            const std::size_t cited_n =
                1 + static_cast<std::size_t>(rng.poisson(config.mean_cited_countries - 1.0));
            ref.countries = weighted_sample_without_replacement(
                rng, config.country_pool, config.country_weights, cited_n, "");
            std::sort(ref.countries.begin(), ref.countries.end());
            ref.english = rng.bernoulli(config.english_share);
            ref.pct_target = 100.0 * rng.beta(config.percentile_alpha, config.percentile_beta);
        }
    }

    // Percentile ranks per cited stratum: planned papers take distinct
    // ranks of a stratum sized to the peak of the target density, so the
    // snapped grid percentiles keep the configured distribution; filler
    // papers occupy the remaining ranks.
    std::map<int, std::vector<PlannedRef*>> by_year;
    std::size_t slot_counter = 0;
    for (auto& article : plan.articles)
        for (auto& ref : article.refs) {
            ref.slot = slot_counter++;
            by_year[ref.cited_year].push_back(&ref);
        }
    const std::size_t expand =
        stratum_expand_factor(config.percentile_alpha, config.percentile_beta);
    for (auto& [year, slots] : by_year) {
        const std::size_t q = slots.size();
        const std::size_t n = std::max(q * expand, q + 8);
        CitedStratum stratum;
        stratum.used.assign(n + 1, false);
        for (PlannedRef* ref : slots) {
            const double ideal = ref->pct_target / 100.0 * static_cast<double>(n) + 0.5;
            auto want = static_cast<std::ptrdiff_t>(std::llround(ideal));
            want = std::clamp<std::ptrdiff_t>(want, 1, static_cast<std::ptrdiff_t>(n));
            std::ptrdiff_t rank = 0;
            for (std::ptrdiff_t offset = 0;; ++offset) {
                const std::ptrdiff_t up = want + offset;
                const std::ptrdiff_t down = want - offset;
                if (up <= static_cast<std::ptrdiff_t>(n) &&
                    !stratum.used[static_cast<std::size_t>(up)]) {
                    rank = up;
                    break;
                }
                if (offset > 0 && down >= 1 && !stratum.used[static_cast<std::size_t>(down)]) {
                    rank = down;
                    break;
                }
            }
            stratum.used[static_cast<std::size_t>(rank)] = true;
            ref->citation_count = static_cast<std::int64_t>(rank);
            ref->percentile = hazen_value(static_cast<double>(rank), n);
        }
        plan.cited_strata.emplace(year, std::move(stratum));
    }

    // Outcomes: article-level Bernoulli from the design row(s); separate
    // streams keep them independent of the structure draws.
    const ModelSpec model = config.model_spec();
    Eigen::VectorXd beta(static_cast<Eigen::Index>(config.true_beta.size()));
    for (std::size_t i = 0; i < config.true_beta.size(); ++i)
        beta(static_cast<Eigen::Index>(i)) = config.true_beta[i];
    std::vector<ObservationRow> article_rows;
    for (std::size_t i = 0; i < config.n_citing; ++i) {
        PlannedArticle& article = plan.articles[i];
        article_rows.clear();
        for (const auto& ref : article.refs)
            article_rows.push_back(make_row(config, article, ref, "", ""));
        const Design design = build_design(article_rows, model);
        const Eigen::VectorXd mean_x = design.X.colwise().mean();
        const double p = logistic(beta.dot(mean_x));
        Rng rng = Rng::stream(seed, (1ULL << 32) + i + 1);
        article.highly_cited = rng.bernoulli(p);
    }

    // Citing strata: flagged articles must land in the top 1%, the rest
    // below it; filler sized so both sides have room.
    for (std::size_t i = 0; i < plan.articles.size(); ++i) {
        CitingStratum& stratum = plan.citing_strata[plan.articles[i].year];
        stratum.articles.push_back(i);
        if (plan.articles[i].highly_cited) ++stratum.flagged;
    }
    // Flagged articles share one top tie group (average rank at the
    // midpoint), so the stratum needs about 50 papers per flag for the
    // group to clear the top-1% line; everyone else ties at the bottom.
    for (auto& [year, stratum] : plan.citing_strata) {
        const std::size_t m = stratum.articles.size();
        stratum.n = std::max(m, 50 * stratum.flagged + 8);
    }
    return plan;
}

} // namespace

SynthConfig::SynthConfig() {
    for (const auto& entry : kDefaultPool) {
        country_pool.emplace_back(entry.code);
        country_weights.push_back(entry.weight);
    }
    country_set = {"US", "DE", "UK", "FR", "JP", "CN", "IT", "CA", "CH", "NL"};
    true_beta = default_true_beta();
}

ModelSpec SynthConfig::model_spec() const {
    ModelSpec spec;
    spec.citing_years = citing_years;
    spec.window_years = window_years;
    spec.country_set = country_set;
    spec.include_percentile = true;
    return spec;
}

CohortSpec SynthConfig::cohort_spec() const {
    CohortSpec spec;
    spec.focal_country = focal_country;
    spec.citing_years = citing_years;
    spec.window_years = window_years;
    spec.country_set = country_set;
    return spec;
}

void SynthConfig::validate() const {
    if (refs_per_citing < 1.0)
        throw InvalidArgumentError("synth: refs_per_citing must be >= 1");
    if (citing_years.empty()) throw InvalidArgumentError("synth: citing_years must be nonempty");
    for (std::size_t i = 1; i < citing_years.size(); ++i)
        if (citing_years[i] <= citing_years[i - 1])
            throw InvalidArgumentError("synth: citing_years must be strictly increasing");
    if (citing_year_weights.size() != citing_years.size())
        throw InvalidArgumentError("synth: citing_year_weights must match citing_years");
    for (double w : citing_year_weights)
        if (w <= 0.0) throw InvalidArgumentError("synth: year weights must be positive");
    if (window_years < 1 || window_years > 3)
        throw InvalidArgumentError("synth: window_years must be in [1, 3]");
    if (focal_country.empty()) throw InvalidArgumentError("synth: focal_country must be set");
    if (country_pool.empty()) throw InvalidArgumentError("synth: country_pool must be nonempty");
    if (country_weights.size() != country_pool.size())
        throw InvalidArgumentError("synth: country_weights must match country_pool");
    for (double w : country_weights)
        if (w <= 0.0) throw InvalidArgumentError("synth: country weights must be positive");
    {
        std::unordered_set<std::string> seen(country_pool.begin(), country_pool.end());
        if (seen.size() != country_pool.size())
            throw InvalidArgumentError("synth: country_pool must not contain duplicates");
        for (const auto& c : country_set)
            if (!seen.count(c))
                throw InvalidArgumentError("synth: country_set entry \"" + c +
                                           "\" missing from country_pool");
    }
    if (country_set.empty() || country_set.size() > 64)
        throw InvalidArgumentError("synth: country_set must have 1..64 entries");
    if (english_share < 0.0 || english_share > 1.0)
        throw InvalidArgumentError("synth: english_share must be in [0, 1]");
    if (percentile_alpha <= 0.0 || percentile_beta <= 0.0)
        throw InvalidArgumentError("synth: percentile shape parameters must be positive");
    if (mean_citing_countries < 1.0 || mean_cited_countries < 1.0)
        throw InvalidArgumentError("synth: mean country counts must be >= 1");
    if (true_beta.size() != model_spec().dim())
        throw InvalidArgumentError("synth: true_beta must have " +
                                   std::to_string(model_spec().dim()) + " entries, got " +
                                   std::to_string(true_beta.size()));
    // Percentile ranks and outcome flags are both encoded through citation
    // counts, so a year cannot serve as citing and cited at once.
    std::unordered_set<int> citing_set(citing_years.begin(), citing_years.end());
    for (int year : citing_years)
        for (int back = 1; back <= window_years; ++back)
            if (citing_set.count(year - back))
                throw InvalidArgumentError(
                    "synth: citing year " + std::to_string(year - back) +
                    " falls inside the cited-reference window of " + std::to_string(year));
}

SynthRows generate_rows(const SynthConfig& config, std::uint64_t seed) {
    const SynthPlan plan = plan_synth(config, seed);
    SynthRows out;
    out.true_beta = config.true_beta;
    out.design_columns = config.model_spec().column_names();
    for (std::size_t i = 0; i < plan.articles.size(); ++i) {
        const PlannedArticle& article = plan.articles[i];
        const std::string cluster = citing_id(i);
        for (const auto& ref : article.refs)
            out.rows.push_back(make_row(config, article, ref, cluster, cited_id(ref.slot)));
    }
    return out;
}

Corpus generate_corpus(const SynthConfig& config, std::uint64_t seed) {
    const SynthPlan plan = plan_synth(config, seed);
    CorpusBuilder builder;
    {
        std::size_t total = 0, edges = 0;
        for (const auto& [year, stratum] : plan.cited_strata)
            total += stratum.used.size() - 1;
        for (const auto& [year, stratum] : plan.citing_strata) total += stratum.n;
        for (const auto& article : plan.articles) edges += article.refs.size();
        builder.reserve(total, edges);
    }

    auto add_filler = [&](char prefix, std::size_t& counter, int year, std::int64_t count) {
        PaperRecord rec;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%c%09zu", prefix, ++counter);
        rec.id = buf;
        rec.year = year;
        rec.field = config.field;
        rec.countries = {"ZZ"};
        rec.lang = "xx";
        rec.doc_type = DocType::other;
        rec.citation_count = count;
        builder.add_paper(std::move(rec));
    };

    // Cited papers carry their planned counts; filler runs complete each
    // stratum without ever entering the cohort.
    std::size_t filler_counter = 0;
    for (std::size_t i = 0; i < plan.articles.size(); ++i) {
        for (const auto& ref : plan.articles[i].refs) {
            PaperRecord rec;
            rec.id = cited_id(ref.slot);
            rec.year = ref.cited_year;
            rec.field = config.field;
            rec.countries = ref.countries;
            rec.lang = ref.english ? "en" : "de";
            rec.doc_type = DocType::article;
            rec.citation_count = ref.citation_count;
            builder.add_paper(std::move(rec));
        }
    }
    for (const auto& [year, stratum] : plan.cited_strata)
        for (std::size_t rank = 1; rank < stratum.used.size(); ++rank)
            if (!stratum.used[rank])
                add_filler('F', filler_counter, year, static_cast<std::int64_t>(rank));

    // Citing articles tie at count 0 (unflagged) or count 2 (flagged) with
    // the filler band between them.
    std::size_t citing_filler_counter = 0;
    for (const auto& [year, stratum] : plan.citing_strata) {
        for (std::size_t idx : stratum.articles) {
            const PlannedArticle& article = plan.articles[idx];
            PaperRecord rec;
            rec.id = citing_id(idx);
            rec.year = year;
            rec.field = config.field;
            rec.countries = article.countries;
            rec.lang = "en";
            rec.doc_type = DocType::article;
            rec.citation_count = article.highly_cited ? 2 : 0;
            builder.add_paper(std::move(rec));
        }
        for (std::size_t c = stratum.articles.size(); c < stratum.n; ++c)
            add_filler('G', citing_filler_counter, year, 1);
    }

    for (std::size_t i = 0; i < plan.articles.size(); ++i)
        for (const auto& ref : plan.articles[i].refs)
            builder.add_edge(citing_id(i), cited_id(ref.slot));

    int max_year = 0;
    for (int y : config.citing_years) max_year = std::max(max_year, y);
    builder.set_census_year(max_year + 2);
    return builder.validate();
}

SynthConfig synth_config_from_json(const std::string& text) {
    json j = json::parse(text);
    SynthConfig config;
    if (j.contains("n_citing")) config.n_citing = j["n_citing"].get<std::size_t>();
    if (j.contains("refs_per_citing")) config.refs_per_citing = j["refs_per_citing"].get<double>();
    if (j.contains("mode")) {
        const std::string mode = j["mode"].get<std::string>();
        if (mode == "singleton")
            config.mode = SynthMode::singleton;
        else if (mode == "clustered")
            config.mode = SynthMode::clustered;
        else
            throw InvalidArgumentError("synth: mode must be \"singleton\" or \"clustered\"");
    }
    if (j.contains("citing_years")) config.citing_years = j["citing_years"].get<std::vector<int>>();
    if (j.contains("citing_year_weights"))
        config.citing_year_weights = j["citing_year_weights"].get<std::vector<double>>();
    else if (j.contains("citing_years"))
        config.citing_year_weights.assign(config.citing_years.size(), 1.0);
    if (j.contains("window_years")) config.window_years = j["window_years"].get<int>();
    if (j.contains("field")) config.field = j["field"].get<std::string>();
    if (j.contains("focal_country")) config.focal_country = j["focal_country"].get<std::string>();
    if (j.contains("country_pool"))
        config.country_pool = j["country_pool"].get<std::vector<std::string>>();
    if (j.contains("country_weights"))
        config.country_weights = j["country_weights"].get<std::vector<double>>();
    if (j.contains("country_set"))
        config.country_set = j["country_set"].get<std::vector<std::string>>();
    if (j.contains("true_beta")) config.true_beta = j["true_beta"].get<std::vector<double>>();
    if (j.contains("english_share")) config.english_share = j["english_share"].get<double>();
    if (j.contains("percentile_alpha"))
        config.percentile_alpha = j["percentile_alpha"].get<double>();
    if (j.contains("percentile_beta")) config.percentile_beta = j["percentile_beta"].get<double>();
    if (j.contains("mean_citing_countries"))
        config.mean_citing_countries = j["mean_citing_countries"].get<double>();
    if (j.contains("mean_cited_countries"))
        config.mean_cited_countries = j["mean_cited_countries"].get<double>();
    config.validate();
    return config;
}

std::string synth_config_to_json(const SynthConfig& config) {
    ordered_json j;
    j["n_citing"] = config.n_citing;
    j["refs_per_citing"] = config.refs_per_citing;
    j["mode"] = config.mode == SynthMode::singleton ? "singleton" : "clustered";
    j["citing_years"] = config.citing_years;
    j["citing_year_weights"] = config.citing_year_weights;
    j["window_years"] = config.window_years;
    j["field"] = config.field;
    j["focal_country"] = config.focal_country;
    j["country_pool"] = config.country_pool;
    j["country_weights"] = config.country_weights;
    j["country_set"] = config.country_set;
    j["true_beta"] = config.true_beta;
    j["english_share"] = config.english_share;
    j["percentile_alpha"] = config.percentile_alpha;
    j["percentile_beta"] = config.percentile_beta;
    j["mean_citing_countries"] = config.mean_citing_countries;
    j["mean_cited_countries"] = config.mean_cited_countries;
    return j.dump(2);
}

void write_ground_truth(const SynthConfig& config, std::uint64_t seed, std::ostream& out) {
    ordered_json j;
    j["rng"] = kRngAlgorithm;
    j["seed"] = seed;
    j["design_columns"] = config.model_spec().column_names();
    ordered_json named;
    const auto names = config.model_spec().column_names();
    for (std::size_t i = 0; i < names.size(); ++i) named[names[i]] = config.true_beta[i];
    j["true_beta"] = named;
    j["config"] = json::parse(synth_config_to_json(config));
    out << j.dump(2) << "\n";
}

} // namespace bibstat
