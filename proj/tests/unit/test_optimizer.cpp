#include "claimscore/optimizer.hpp"

#include "claimscore/simulate.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace claimscore;

namespace {

// Portfolio whose frequencies are genuinely driven by a claim score with
// known parameters, strongly separating risk.
SimulationOutput score_driven_portfolio(std::uint64_t seed, const ClaimScoreConfig& truth,
                                        int customers = 2500) {
    SimulationConfig cfg;
    cfg.seed = seed;
    cfg.num_customers = customers;
    cfg.num_years = 5;
    cfg.history_years = 4;
    cfg.history_prob = 0.7;
    cfg.frailty = false;
    cfg.bundling_prob = 0.3;
    cfg.true_score = TrueScoreDynamics{truth, -0.55};
    cfg.products = {
        {"alpha", 0.9, -1.2, {0.4, 0.8}, 0.05, false, 400.0, 2.0},
        {"beta", 0.6, -1.4, {0.3, 0.6}, -0.05, false, 300.0, 2.0},
    };
    return simulate(cfg);
}

Portfolio claim_free_portfolio(int customers, int years) {
    Portfolio p;
    p.schema = test_util::two_product_schema();
    for (int c = 0; c < customers; ++c)
        for (int y = 0; y < years; ++y)
            p.records.push_back(test_util::record("c" + std::to_string(c), "alpha", 2012 + y,
                                                  1.0, 0, 0.0, "a"));
    return p;
}

}  // namespace

TEST_CASE("grid enumeration counts and order") {
    CHECK(enumerate_grid({3, 3}).size() == 2);   // psi in {1,2}, l0 = 2
    CHECK(enumerate_grid({4, 4}).size() == 6);   // psi in {1,2,3}, l0 in {2,3}
    CHECK(enumerate_grid({3, 5}).size() == 2 + 6 + 12);

    const auto full = enumerate_grid({});
    CHECK(full.size() == 4048);  // sum of (s-1)(s-2) over the default range

    // Lexicographic (s, psi, l0) order.
    for (std::size_t i = 1; i < full.size(); ++i) {
        const auto& a = full[i - 1];
        const auto& b = full[i];
        CHECK(std::tie(a.max_level, a.jump, a.entry_level) <
              std::tie(b.max_level, b.jump, b.entry_level));
    }
    for (const auto& cfg : full) CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("feasibility on a claim-free portfolio") {
    const Portfolio p = claim_free_portfolio(50, 4);
    // Scores only climb from the entry level, so level 1 is never reached.
    CHECK_FALSE(feasible({1, 3, 2}, p, "alpha", 1e-4));
    // A zero threshold makes the constraint vacuous.
    CHECK(feasible({1, 3, 2}, p, "alpha", 0.0));
}

TEST_CASE("feasibility requires every level to carry exposure") {
    const ClaimScoreConfig truth{2, 4, 2};
    const SimulationOutput sim = score_driven_portfolio(41, truth, 1200);
    const Portfolio agg = aggregate_policy_years(sim.portfolio);
    // A mixed-claims portfolio populates small grids but not huge ones.
    CHECK(feasible({1, 3, 2}, agg, "alpha", 1e-4, &sim.history));
    CHECK_FALSE(feasible({1, 25, 2}, agg, "alpha", 1e-4, &sim.history));
}

TEST_CASE("feasibility monotonicity on claim-free data") {
    const Portfolio p = claim_free_portfolio(40, 3);
    for (int psi : {1, 2}) {
        for (int s = 3; s <= 8; ++s) {
            if (psi > s - 1) continue;
            // Infeasible because the sub-entry levels are unreachable; the
            // same failure persists for every larger ceiling.
            CHECK_FALSE(feasible({psi, s, 2}, p, "alpha", 1e-4));
        }
    }
}

TEST_CASE("single-period portfolio concentrates at the entry level") {
    Portfolio p;
    p.schema = test_util::two_product_schema();
    for (int c = 0; c < 20; ++c)
        p.records.push_back(
            test_util::record("c" + std::to_string(c), "alpha", 2015, 1.0, 0, 0.0, "a"));
    CHECK_FALSE(feasible({1, 3, 2}, p, "alpha", 1e-4));
}

TEST_CASE("grid search recovers strong score dynamics and beats the static benchmark") {
    const ClaimScoreConfig truth{2, 4, 2};
    const SimulationOutput sim = score_driven_portfolio(42, truth);
    const Portfolio agg = aggregate_policy_years(sim.portfolio);
    const TrainTestSplit split = train_test_split(agg);

    const ModelSpec bench_spec = spec_from_abbreviation("GLM-PG", "alpha", {});
    const ScoreMap no_scores;
    const ModelPair benchmark = fit_model_pair(agg, split.train, bench_spec, no_scores);

    const ModelSpec tmpl = spec_from_abbreviation("GAM-PG-One", "alpha",
                                                  {{"alpha", ClaimScoreConfig{2, 5, 2}}});
    const GridSpec grid{3, 8};
    const SearchResult result = optimize_claim_score(split.train, split.test, tmpl, benchmark,
                                                     grid, 2, &sim.history);

    CHECK(result.evaluations.size() == enumerate_grid(grid).size());
    CHECK(std::abs(result.best_config.max_level - truth.max_level) <= 2);
    // The static benchmark against itself scores zero; the tuned dynamic
    // model must discriminate strictly better.
    CHECK(result.best_gini > 0.0);

    // The winner matches the evaluation log maximum.
    double log_max = -1e300;
    for (const auto& eval : result.evaluations)
        if (eval.feasible && !std::isnan(eval.gini)) log_max = std::max(log_max, eval.gini);
    CHECK(result.best_gini == doctest::Approx(log_max));
}

TEST_CASE("search results are identical across worker counts") {
    const ClaimScoreConfig truth{1, 4, 3};
    const SimulationOutput sim = score_driven_portfolio(43, truth, 1200);
    const Portfolio agg = aggregate_policy_years(sim.portfolio);
    const TrainTestSplit split = train_test_split(agg);

    const ModelPair benchmark = fit_model_pair(
        agg, split.train, spec_from_abbreviation("GLM-PG", "alpha", {}), ScoreMap());
    const ModelSpec tmpl = spec_from_abbreviation("GAM-PG-One", "alpha",
                                                  {{"alpha", ClaimScoreConfig{2, 5, 2}}});
    const GridSpec grid{3, 6};

    const SearchResult a = optimize_claim_score(split.train, split.test, tmpl, benchmark, grid,
                                                1, &sim.history);
    const SearchResult b = optimize_claim_score(split.train, split.test, tmpl, benchmark, grid,
                                                8, &sim.history);
    REQUIRE(a.evaluations.size() == b.evaluations.size());
    CHECK(a.best_config.jump == b.best_config.jump);
    CHECK(a.best_config.max_level == b.best_config.max_level);
    CHECK(a.best_config.entry_level == b.best_config.entry_level);
    CHECK(a.best_gini == b.best_gini);  // bit-exact
    for (std::size_t i = 0; i < a.evaluations.size(); ++i) {
        CHECK(a.evaluations[i].feasible == b.evaluations[i].feasible);
        if (!std::isnan(a.evaluations[i].gini))
            CHECK(a.evaluations[i].gini == b.evaluations[i].gini);
    }
}

TEST_CASE("fully infeasible grids raise an infeasibility report") {
    Portfolio p = claim_free_portfolio(60, 4);
    // A few claims so severity models are fittable; the low levels still
    // carry almost no exposure.
    for (int c = 0; c < 5; ++c) {
        auto& rec = p.records[static_cast<std::size_t>(c) * 4];  // year 2012
        rec.claim_count = 1;
        rec.claim_total = 120.0;
    }
    Portfolio train = p;
    Portfolio test;
    test.schema = p.schema;
    for (auto it = train.records.begin(); it != train.records.end();) {
        if (it->calendar_year == 2015) {
            test.records.push_back(*it);
            it = train.records.erase(it);
        } else {
            ++it;
        }
    }

    const ModelPair benchmark = fit_model_pair(
        p, train, spec_from_abbreviation("GLM-PG", "alpha", {}), ScoreMap());
    const ModelSpec tmpl = spec_from_abbreviation("GAM-PG-One", "alpha",
                                                  {{"alpha", ClaimScoreConfig{2, 5, 2}}});
    const GridSpec strict{3, 4, 0.25};  // a quarter of all exposure per level
    CHECK_THROWS_WITH_AS(
        optimize_claim_score(train, test, tmpl, benchmark, strict, 1, nullptr),
        doctest::Contains("failing at level"), InfeasibleGridError);
}
