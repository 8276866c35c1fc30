#include "claimscore/portfolio.hpp"
#include "claimscore/portfolio_io.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace claimscore;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "claimscore_test_io";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("record validation") {
    PolicyRecord rec = test_util::record("c1", "alpha", 2015, 1.0, 0, 0.0, "a");
    CHECK_NOTHROW(rec.validate());
    rec.exposure = 0.0;
    CHECK_THROWS_AS(rec.validate(), std::invalid_argument);
    rec.exposure = 1.0;
    rec.claim_total = 10.0;  // positive total with zero count
    CHECK_THROWS_AS(rec.validate(), std::invalid_argument);
}

TEST_CASE("aggregation merges same-year spells with identical covariates") {
    Portfolio raw;
    raw.schema = test_util::two_product_schema();
    raw.records.push_back(test_util::record("c1", "alpha", 2015, 0.5, 1, 100.0, "a"));
    raw.records.push_back(test_util::record("c1", "alpha", 2015, 0.5, 1, 200.0, "a"));

    const Portfolio merged = aggregate_policy_years(raw);
    REQUIRE(merged.records.size() == 1);
    CHECK(merged.records[0].exposure == doctest::Approx(1.0));
    CHECK(merged.records[0].claim_count == 2);
    CHECK(merged.records[0].claim_total == doctest::Approx(300.0));
}

TEST_CASE("spells with differing covariates stay separate") {
    Portfolio raw;
    raw.schema = test_util::two_product_schema();
    raw.records.push_back(test_util::record("c1", "alpha", 2015, 0.4, 0, 0.0, "a"));
    raw.records.push_back(test_util::record("c1", "alpha", 2015, 0.6, 1, 50.0, "b"));

    const Portfolio merged = aggregate_policy_years(raw);
    REQUIRE(merged.records.size() == 2);
    CHECK(merged.records[0].spell == 0);
    CHECK(merged.records[1].spell == 1);
}

TEST_CASE("aggregation is idempotent and conserves totals") {
    Portfolio raw = test_util::two_product_portfolio();
    raw.records.push_back(test_util::record("c1", "alpha", 2015, 0.25, 1, 60.0, "a"));

    auto totals = [](const Portfolio& p) {
        double exposure = 0.0, total = 0.0;
        long counts = 0;
        for (const auto& r : p.records) {
            exposure += r.exposure;
            counts += r.claim_count;
            total += r.claim_total;
        }
        return std::tuple{exposure, counts, total};
    };

    const Portfolio once = aggregate_policy_years(raw);
    const Portfolio twice = aggregate_policy_years(once);
    CHECK(totals(raw) == totals(once));
    CHECK(once.records.size() == twice.records.size());
    for (std::size_t i = 0; i < once.records.size(); ++i) {
        CHECK(once.records[i].customer_id == twice.records[i].customer_id);
        CHECK(once.records[i].exposure == doctest::Approx(twice.records[i].exposure));
    }
}

TEST_CASE("overlap report on a single customer with one product") {
    Portfolio p;
    p.schema = test_util::two_product_schema();
    p.records.push_back(test_util::record("c1", "alpha", 2015, 1.0, 0, 0.0, "a"));
    const OverlapReport report = overlap_report(p);
    CHECK(report.rows[0].holders_by_count[0] == 1);
    CHECK(report.rows[0].total_holders == 1);
    CHECK(report.rows[1].total_holders == 0);
}

TEST_CASE("overlap report cross-claim counts on a two-customer fixture") {
    Portfolio p;
    p.schema = test_util::two_product_schema();
    // Both customers hold both products; c1 claims on both (2 alpha claims),
    // c2 claims on neither.
    p.records.push_back(test_util::record("c1", "alpha", 2015, 1.0, 2, 100.0, "a"));
    p.records.push_back(test_util::record("c1", "beta", 2015, 1.0, 1, 50.0, "a"));
    p.records.push_back(test_util::record("c2", "alpha", 2015, 1.0, 0, 0.0, "a"));
    p.records.push_back(test_util::record("c2", "beta", 2015, 1.0, 0, 0.0, "a"));

    const OverlapReport report = overlap_report(p);
    const OverlapRow& alpha = report.rows[0];
    CHECK(alpha.holders_by_count[1] == 2);
    CHECK(alpha.claims_by_count[1] == 2);
    // c1's alpha claims count as claims-with-another-product-claim.
    CHECK(alpha.with_other_claim_by_count[1] == 2);
    CHECK(alpha.total_claims == 2);

    // Holder shares per row sum to 100%.
    for (const auto& row : report.rows) {
        if (row.total_holders == 0) continue;
        double share = 0.0;
        for (const long holders : row.holders_by_count)
            share += 100.0 * holders / row.total_holders;
        CHECK(share == doctest::Approx(100.0).epsilon(1e-4));
    }
}

TEST_CASE("train/test split takes the last calendar year") {
    const Portfolio p = test_util::two_product_portfolio();
    const TrainTestSplit split = train_test_split(p);
    CHECK(split.test_year == 2017);
    CHECK(split.train.records.size() + split.test.records.size() == p.records.size());
    for (const auto& r : split.test.records) CHECK(r.calendar_year == 2017);
    for (const auto& r : split.train.records) CHECK(r.calendar_year < 2017);

    Portfolio single_year;
    single_year.schema = p.schema;
    single_year.records.push_back(test_util::record("c1", "alpha", 2015, 1.0, 0, 0.0, "a"));
    CHECK_THROWS_AS(train_test_split(single_year), std::invalid_argument);
}

TEST_CASE("records CSV round trip") {
    const fs::path dir = temp_dir();
    const Portfolio original = test_util::two_product_portfolio();
    save_csv(original, dir / "records.csv");
    save_schema(original.schema, dir / "schema.json");

    const Schema schema = load_schema(dir / "schema.json");
    const Portfolio loaded = load_csv(dir / "records.csv", schema);
    REQUIRE(loaded.records.size() == original.records.size());
    for (std::size_t i = 0; i < loaded.records.size(); ++i) {
        CHECK(loaded.records[i].customer_id == original.records[i].customer_id);
        CHECK(loaded.records[i].product == original.records[i].product);
        CHECK(loaded.records[i].calendar_year == original.records[i].calendar_year);
        CHECK(loaded.records[i].exposure == doctest::Approx(original.records[i].exposure));
        CHECK(loaded.records[i].claim_count == original.records[i].claim_count);
        CHECK(loaded.records[i].claim_total ==
              doctest::Approx(original.records[i].claim_total));
        CHECK(loaded.records[i].covariates == original.records[i].covariates);
    }
}

TEST_CASE("CSV validation names the offending row") {
    const fs::path dir = temp_dir();
    const Schema schema = test_util::two_product_schema();
    {
        std::ofstream out(dir / "bad.csv");
        out << "customer_id,product,calendar_year,exposure,claim_count,claim_total,group\n";
        out << "c1,alpha,2015,1.0,0,0,a\n";
        out << "c2,alpha,2015,0,0,0,a\n";  // zero exposure on row 3
    }
    CHECK_THROWS_WITH_AS(load_csv(dir / "bad.csv", schema),
                         doctest::Contains("bad.csv:3"), std::runtime_error);

    {
        std::ofstream out(dir / "empty.csv");
        out << "customer_id,product,calendar_year,exposure,claim_count,claim_total,group\n";
    }
    CHECK(load_csv(dir / "empty.csv", schema).records.empty());

    {
        std::ofstream out(dir / "missing_cov.csv");
        out << "customer_id,product,calendar_year,exposure,claim_count,claim_total,group\n";
        out << "c1,alpha,2015,1.0,0,0,\n";  // empty required covariate
    }
    CHECK_THROWS_WITH_AS(load_csv(dir / "missing_cov.csv", schema),
                         doctest::Contains("missing covariate"), std::runtime_error);
}

TEST_CASE("history CSV round trip") {
    const fs::path dir = temp_dir();
    HistoryMap history;
    history[{"c1", "alpha"}] = {{2009, 1.0, 0}, {2010, 0.5, 2}};
    history[{"c2", "beta"}] = {{2011, 1.0, 1}};
    save_history(history, dir / "history.csv");
    const HistoryMap loaded = load_history(dir / "history.csv");
    REQUIRE(loaded.size() == 2);
    const auto& c1 = loaded.at({"c1", "alpha"});
    REQUIRE(c1.size() == 2);
    CHECK(c1[1].claims == 2);
    CHECK(c1[1].exposure == doctest::Approx(0.5));
}
