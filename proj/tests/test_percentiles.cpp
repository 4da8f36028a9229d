#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "bibstat/percentiles.hpp"
#include "bibstat/rng.hpp"

using namespace bibstat;

namespace {

Corpus corpus_from_counts(const std::vector<std::int64_t>& counts, const std::string& field = "nat",
                          int year = 2004) {
    CorpusBuilder builder;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        PaperRecord rec;
        rec.id = "P" + std::to_string(1000 + i);
        rec.year = year;
        rec.field = field;
        rec.countries = {"DE"};
        rec.lang = "en";
        rec.doc_type = DocType::article;
        rec.citation_count = counts[i];
        builder.add_paper(std::move(rec));
    }
    return builder.validate();
}

// Independent oracle: enumerate every ordering consistent with ascending
// citation counts (all tie-breaks), average each paper's Hazen value.
std::vector<double> brute_force_percentiles(const std::vector<std::int64_t>& counts) {
    const std::size_t n = counts.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> sum(n, 0.0);
    std::size_t consistent = 0;
    do {
        bool ok = true;
        for (std::size_t i = 1; i < n && ok; ++i)
            if (counts[perm[i - 1]] > counts[perm[i]]) ok = false;
        if (!ok) continue;
        ++consistent;
        for (std::size_t pos = 0; pos < n; ++pos)
            sum[perm[pos]] += 100.0 * (static_cast<double>(pos + 1) - 0.5) / static_cast<double>(n);
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (double& s : sum) s /= static_cast<double>(consistent);
    return sum;
}

} // namespace

TEST_CASE("single-paper stratum sits at the 50th percentile") {
    Corpus corpus = corpus_from_counts({17});
    PercentileTable table = hazen_percentiles(corpus);
    CHECK(table.at("P1000").percentile == doctest::Approx(50.0).epsilon(1e-12));
    CHECK_FALSE(table.at("P1000").highly_cited);
}

TEST_CASE("tie-averaged stratum [3, 7, 7, 10]") {
    Corpus corpus = corpus_from_counts({3, 7, 7, 10});
    PercentileTable table = hazen_percentiles(corpus);
    CHECK(table.at("P1000").percentile == doctest::Approx(12.5));
    CHECK(table.at("P1001").percentile == doctest::Approx(50.0));
    CHECK(table.at("P1002").percentile == doctest::Approx(50.0));
    CHECK(table.at("P1003").percentile == doctest::Approx(87.5));
    const double mean = (12.5 + 50.0 + 50.0 + 87.5) / 4.0;
    CHECK(mean == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("top-1% flags in a 200-paper stratum with distinct counts") {
    std::vector<std::int64_t> counts(200);
    std::iota(counts.begin(), counts.end(), 1);
    Corpus corpus = corpus_from_counts(counts);
    PercentileTable table = hazen_percentiles(corpus);
    // counts ascending, so the last ids hold the top ranks
    CHECK(table.at("P1199").percentile == doctest::Approx(99.75));
    CHECK(table.at("P1198").percentile == doctest::Approx(99.25));
    CHECK(table.at("P1197").percentile == doctest::Approx(98.75));
    CHECK(classify_highly_cited(table, "P1199"));
    CHECK(classify_highly_cited(table, "P1198"));
    CHECK_FALSE(classify_highly_cited(table, "P1197"));
}

TEST_CASE("classify_highly_cited is a pure lookup; unknown id throws") {
    Corpus corpus = corpus_from_counts({1, 2});
    PercentileTable table = hazen_percentiles(corpus);
    CHECK_FALSE(classify_highly_cited(table, "P1000"));
    CHECK_THROWS_AS(classify_highly_cited(table, "NOPE"), KeyNotFoundError);
    CHECK_THROWS_AS(table.stratum_size("nat", 1999), KeyNotFoundError);
    CHECK(table.stratum_size("nat", 2004) == 2);
}

TEST_CASE("a tie group straddling the threshold moves as a unit") {
    // 200 papers, the top two share a count: average rank 199.5 -> 99.5.
    std::vector<std::int64_t> counts(200);
    std::iota(counts.begin(), counts.end(), 1);
    counts[199] = counts[198];
    Corpus corpus = corpus_from_counts(counts);
    PercentileTable table = hazen_percentiles(corpus);
    CHECK(table.at("P1198").percentile == doctest::Approx(99.5));
    CHECK(table.at("P1199").percentile == doctest::Approx(99.5));
    CHECK(classify_highly_cited(table, "P1198") == classify_highly_cited(table, "P1199"));

    // A five-way tie at ranks 196-200 averages to 198 -> 98.75: the whole
    // group stays out even though its top members would clear 99 alone.
    std::vector<std::int64_t> low(200);
    std::iota(low.begin(), low.end(), 1);
    for (std::size_t i = 196; i < 200; ++i) low[i] = low[195];
    Corpus corpus2 = corpus_from_counts(low);
    PercentileTable table2 = hazen_percentiles(corpus2);
    for (std::size_t i = 195; i < 200; ++i) {
        CHECK(table2.at("P" + std::to_string(1000 + i)).percentile == doctest::Approx(98.75));
        CHECK_FALSE(classify_highly_cited(table2, "P" + std::to_string(1000 + i)));
    }
}

TEST_CASE("strata are keyed by field and year jointly") {
    CorpusBuilder builder;
    auto add = [&](const std::string& id, const std::string& field, int year, std::int64_t cites) {
        PaperRecord rec;
        rec.id = id;
        rec.year = year;
        rec.field = field;
        rec.countries = {"DE"};
        rec.lang = "en";
        rec.doc_type = DocType::article;
        rec.citation_count = cites;
        builder.add_paper(std::move(rec));
    };
    add("A", "nat", 2004, 100);
    add("B", "nat", 2005, 0);
    add("C", "soc", 2004, 0);
    Corpus corpus = builder.validate();
    PercentileTable table = hazen_percentiles(corpus);
    // Each paper alone in its stratum.
    CHECK(table.at("A").percentile == doctest::Approx(50.0));
    CHECK(table.at("B").percentile == doctest::Approx(50.0));
    CHECK(table.at("C").percentile == doctest::Approx(50.0));
}

TEST_CASE("mean-50, monotonicity, brute-force match on random strata") {
    Rng rng(20240917);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.bounded(8);
        std::vector<std::int64_t> counts(n);
        for (auto& c : counts) c = static_cast<std::int64_t>(rng.bounded(5)); // dense ties
        Corpus corpus = corpus_from_counts(counts);
        PercentileTable table = hazen_percentiles(corpus);

        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            mean += table.at("P" + std::to_string(1000 + i)).percentile;
        mean /= static_cast<double>(n);
        REQUIRE(mean == doctest::Approx(50.0).epsilon(1e-9));

        const std::vector<double> oracle = brute_force_percentiles(counts);
        for (std::size_t i = 0; i < n; ++i) {
            const double got = table.at("P" + std::to_string(1000 + i)).percentile;
            REQUIRE(got == doctest::Approx(oracle[i]).epsilon(1e-9));
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double pi = table.at("P" + std::to_string(1000 + i)).percentile;
                const double pj = table.at("P" + std::to_string(1000 + j)).percentile;
                if (counts[i] > counts[j]) REQUIRE(pi > pj);
                if (counts[i] == counts[j]) REQUIRE(pi == pj);
            }
    }
}

TEST_CASE("input order never matters") {
    Rng rng(8);
    std::vector<std::int64_t> counts(40);
    for (auto& c : counts) c = static_cast<std::int64_t>(rng.bounded(10));

    CorpusBuilder forward, backward;
    for (std::size_t pass = 0; pass < 2; ++pass) {
        CorpusBuilder& builder = pass == 0 ? forward : backward;
        std::vector<std::size_t> order(counts.size());
        std::iota(order.begin(), order.end(), 0);
        if (pass == 1) std::reverse(order.begin(), order.end());
        for (std::size_t i : order) {
            PaperRecord rec;
            rec.id = "P" + std::to_string(1000 + i);
            rec.year = 2004;
            rec.field = "nat";
            rec.countries = {"DE"};
            rec.lang = "en";
            rec.doc_type = DocType::article;
            rec.citation_count = counts[i];
            builder.add_paper(std::move(rec));
        }
    }
    PercentileTable a = hazen_percentiles(forward.validate());
    PercentileTable b = hazen_percentiles(backward.validate());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const std::string id = "P" + std::to_string(1000 + i);
        CHECK(a.at(id).percentile == b.at(id).percentile);
    }
}

TEST_CASE("fractional counting splits one unit across countries") {
    PaperRecord three;
    three.id = "T";
    three.countries = {"DE", "FR", "US"};
    PaperRecord one;
    one.id = "O";
    one.countries = {"DE"};
    PaperRecord two;
    two.id = "W";
    two.countries = {"DE", "US"};

    SUBCASE("three-way split is exactly one third each") {
        FractionalCounts counts = fractional_country_counts(std::vector<PaperRecord>{three});
        CHECK(counts.totals.at("DE") == 1.0 / 3.0);
        CHECK(counts.totals.at("FR") == 1.0 / 3.0);
        CHECK(counts.totals.at("US") == 1.0 / 3.0);
    }
    SUBCASE("single country takes the whole unit") {
        FractionalCounts counts = fractional_country_counts(std::vector<PaperRecord>{one});
        CHECK(counts.totals.at("DE") == 1.0);
    }
    SUBCASE("hand-summed two-paper case") {
        FractionalCounts counts = fractional_country_counts(std::vector<PaperRecord>{two, one});
        CHECK(counts.totals.at("DE") == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(counts.totals.at("US") == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(counts.sum() == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("fractional conservation over random papers") {
    Rng rng(99);
    const char* pool[] = {"US", "DE", "UK", "FR", "JP", "CN", "IT", "CA", "CH", "NL", "ES"};
    std::vector<PaperRecord> papers(10000);
    for (std::size_t i = 0; i < papers.size(); ++i) {
        papers[i].id = "P" + std::to_string(i);
        const std::size_t k = 1 + rng.bounded(5);
        for (std::size_t j = 0; j < k; ++j) {
            const std::string c = pool[rng.bounded(11)];
            if (std::find(papers[i].countries.begin(), papers[i].countries.end(), c) ==
                papers[i].countries.end())
                papers[i].countries.push_back(c);
        }
    }
    FractionalCounts counts = fractional_country_counts(papers);
    CHECK(counts.sum() ==
          doctest::Approx(static_cast<double>(papers.size())).epsilon(1e-12));
}

TEST_CASE("percentile TSV dump schema") {
    Corpus corpus = corpus_from_counts({3, 7, 7, 10});
    PercentileTable table = hazen_percentiles(corpus);
    std::ostringstream out;
    write_percentiles_tsv(corpus, table, out);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "paper_id\tfield\tyear\tpercentile\thighly_cited");
    std::string line;
    std::getline(in, line);
    CHECK(line == "P1000\tnat\t2004\t12.500000\t0");
}
