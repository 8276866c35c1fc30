#include "claimscore/model.hpp"

#include "claimscore/simulate.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace claimscore;

namespace {

std::map<std::string, ClaimScoreConfig> default_configs() {
    return {{"alpha", {2, 5, 2}}, {"beta", {2, 5, 2}}};
}

// A small but fit-friendly two-product portfolio from the simulator.
Portfolio sim_portfolio(std::uint64_t seed, bool frailty = true) {
    SimulationConfig cfg;
    cfg.seed = seed;
    cfg.num_customers = 1500;
    cfg.num_years = 4;
    cfg.history_years = 0;
    cfg.frailty = frailty;
    cfg.frailty_variance = 1.2;
    cfg.bundling_prob = 0.4;
    cfg.products = {
        {"alpha", 0.8, -1.2, {0.5, 0.9}, 0.1, false, 500.0, 2.0},
        {"beta", 0.7, -1.0, {0.4, 0.8}, -0.1, false, 300.0, 2.0},
    };
    return aggregate_policy_years(simulate(cfg).portfolio);
}

}  // namespace

TEST_CASE("predict_mean applies offset and coefficients") {
    FittedModel fit;
    fit.coefficients = Eigen::VectorXd::Zero(3);
    fit.coefficients[0] = 0.7;
    Eigen::VectorXd row = Eigen::VectorXd::Zero(3);
    row[0] = 1.0;
    CHECK(predict_mean(fit, row) == doctest::Approx(std::exp(0.7)));
    // A log(2) offset doubles the prediction.
    CHECK(predict_mean(fit, row, std::log(2.0)) == doctest::Approx(2.0 * std::exp(0.7)));
    Eigen::VectorXd bad = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(predict_mean(fit, bad), std::invalid_argument);
}

TEST_CASE("intercept-only frequency prediction equals the sample claim rate") {
    const Portfolio p = sim_portfolio(21, false);
    ModelSpec spec = spec_from_abbreviation("GLM-PG", "alpha", {});
    DesignBuilder builder(p, spec);
    const ScoreMap scores;
    DesignMatrix d = builder.frequency_design(p, scores);
    // Drop the covariates: keep the intercept only.
    d.x.conservativeResize(d.rows(), 1);
    d.terms = {"Constant"};
    const FittedModel fit = fit_pirls(d, Family::poisson());

    double exposure = 0.0, claims = 0.0;
    for (const auto& rec : p.records)
        if (rec.product == "alpha") {
            exposure += rec.exposure;
            claims += rec.claim_count;
        }
    CHECK(std::exp(fit.coefficients[0]) == doctest::Approx(claims / exposure).epsilon(1e-8));
}

TEST_CASE("relativity equals one at the entry level and unrolls linear slopes") {
    const Portfolio p = sim_portfolio(22);
    const auto cfgs =
        std::map<std::string, ClaimScoreConfig>{{"alpha", {2, 5, 2}}, {"beta", {2, 5, 2}}};
    const ScoreMap scores = ScoreMap::compute(p, cfgs);

    for (const char* abbrev : {"GAM-PG-One", "GLM-PG-One", "GAM-PG-Multi", "GAM-PG-Multi-PL"}) {
        const ModelSpec spec = spec_from_abbreviation(abbrev, "alpha", cfgs);
        const ModelPair pair = fit_model_pair(p, p, spec, scores);
        CHECK(std::fabs(std::log(relativity(pair.frequency, "alpha", 2.0))) < 1e-10);
        CHECK(relativity(pair.frequency, "alpha", 1.0) > 0.0);
        CHECK_THROWS_AS(relativity(pair.frequency, "alpha", 0.5), std::domain_error);
        CHECK_THROWS_AS(relativity(pair.frequency, "alpha", 5.5), std::domain_error);
    }

    // Linear-in-score: relativity(l) = exp(slope * (l - l0)).
    const ModelSpec linear_spec = spec_from_abbreviation("GLM-PG-One", "alpha", cfgs);
    const ModelPair linear = fit_model_pair(p, p, linear_spec, scores);
    const double slope = linear.frequency.coefficients.tail(1)[0];
    for (double level : {1.0, 3.0, 4.5})
        CHECK(relativity(linear.frequency, "alpha", level) ==
              doctest::Approx(std::exp(slope * (level - 2.0))).epsilon(1e-12));

    // Zero coefficients: relativity one everywhere.
    FittedModel zeroed = linear.frequency;
    zeroed.coefficients.setZero();
    for (double level : {1.0, 2.0, 5.0})
        CHECK(relativity(zeroed, "alpha", level) == doctest::Approx(1.0));

    // A product without a score block has no effect.
    CHECK(relativity(linear.frequency, "beta", 3.0) == doctest::Approx(1.0));
}

TEST_CASE("premium is the frequency-severity product") {
    FittedModel freq;
    freq.family = Family::poisson();
    freq.coefficients = Eigen::VectorXd::Constant(1, std::log(0.1));
    FittedModel sev;
    sev.family = Family::gamma();
    sev.coefficients = Eigen::VectorXd::Constant(1, std::log(1000.0));
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    CHECK(premium(freq, one, sev, one) == doctest::Approx(100.0).epsilon(1e-12));

    FittedModel tiny = freq;
    tiny.coefficients[0] = std::log(1e-300);
    CHECK(premium(tiny, one, sev, one) == doctest::Approx(0.0));

    CHECK_THROWS_AS(premium(sev, one, freq, one), std::invalid_argument);
}

TEST_CASE("mean premium is close to the generative expected loss") {
    const Portfolio p = sim_portfolio(23, false);
    const ModelSpec spec = spec_from_abbreviation("GLM-PG", "alpha", {});
    const ScoreMap scores;
    const ModelPair pair = fit_model_pair(p, p, spec, scores);
    const PremiumTable table = premium_table(pair, p, p, scores);

    // With an exhaustive model class the mean premium tracks the mean loss.
    const double mean_premium = table.premiums.mean();
    const double mean_loss = table.losses.mean();
    const double se = std::sqrt((table.losses.array() - mean_loss).square().sum()) /
                      table.losses.size();
    CHECK(std::fabs(mean_premium - mean_loss) < 2.0 * se + 0.05 * mean_loss);
}

TEST_CASE("lr_test on identical fits is zero with p = 1") {
    const Portfolio p = sim_portfolio(24);
    const ModelSpec spec = spec_from_abbreviation("GLM-PG", "alpha", {});
    const ScoreMap scores;
    const ModelPair pair = fit_model_pair(p, p, spec, scores);
    const LrTestResult same = lr_test(pair.frequency, pair.frequency);
    CHECK(same.statistic == doctest::Approx(0.0));
    CHECK(same.dof == 0);
    CHECK(same.p_value == doctest::Approx(1.0));
}

TEST_CASE("lr_test degrees of freedom match the model structure") {
    const Portfolio p = sim_portfolio(25);
    const auto cfgs = default_configs();
    const ScoreMap scores = ScoreMap::compute(p, cfgs);

    const ModelPair static_fit =
        fit_model_pair(p, p, spec_from_abbreviation("GLM-PG", "alpha", {}), scores);
    const ModelPair one_gam =
        fit_model_pair(p, p, spec_from_abbreviation("GAM-PG-One", "alpha", cfgs), scores);
    const ModelPair one_glm =
        fit_model_pair(p, p, spec_from_abbreviation("GLM-PG-One", "alpha", cfgs), scores);
    const ModelPair multi_gam =
        fit_model_pair(p, p, spec_from_abbreviation("GAM-PG-Multi", "alpha", cfgs), scores);

    // One-product GAM vs static: k - 1 = 3 when k = 4; GLM adds one slope.
    CHECK(lr_test(static_fit.frequency, one_gam.frequency).dof == 3);
    CHECK(lr_test(static_fit.frequency, one_glm.frequency).dof == 1);
    // Multi vs one-product with C = 2 products: (C - 1)(k - 1) = 3.
    CHECK(lr_test(one_gam.frequency, multi_gam.frequency).dof == 3);

    // Non-nested pairs are rejected.
    CHECK_THROWS_AS(lr_test(one_glm.frequency, multi_gam.frequency), std::invalid_argument);

    // The alternative's log-likelihood dominates the null's.
    CHECK(one_gam.frequency.loglik >= static_fit.frequency.loglik - 1e-8);
    CHECK(multi_gam.frequency.loglik >= one_gam.frequency.loglik - 1e-8);
}

TEST_CASE("doubling exposure with proportional counts leaves coefficients unchanged") {
    const Portfolio p = sim_portfolio(26, false);
    ModelSpec spec = spec_from_abbreviation("GLM-PG", "alpha", {});
    DesignBuilder builder(p, spec);
    const ScoreMap scores;
    DesignMatrix d = builder.frequency_design(p, scores);
    d.x.conservativeResize(d.rows(), 1);
    d.terms = {"Constant"};
    const FittedModel base = fit_pirls(d, Family::poisson());

    DesignMatrix doubled = d;
    doubled.offset = d.offset.array() + std::log(2.0);
    doubled.exposure = 2.0 * d.exposure;
    doubled.response = 2.0 * d.response;
    const FittedModel refit = fit_pirls(doubled, Family::poisson());

    CHECK(refit.coefficients[0] == doctest::Approx(base.coefficients[0]).epsilon(1e-8));
    // Expected counts double through the offset at unchanged coefficients.
    CHECK(std::exp(doubled.offset[0] + refit.coefficients[0]) ==
          doctest::Approx(2.0 * std::exp(d.offset[0] + base.coefficients[0])).epsilon(1e-6));
}

TEST_CASE("a multi-product fit with score terms dropped reproduces the static fit") {
    const Portfolio p = sim_portfolio(27);
    const auto cfgs = default_configs();
    const ScoreMap scores = ScoreMap::compute(p, cfgs);

    const ModelSpec multi_spec = spec_from_abbreviation("GAM-PG-Multi", "alpha", cfgs);
    DesignBuilder multi_builder(p, multi_spec);
    DesignMatrix multi = multi_builder.frequency_design(p, scores);

    // Forcing the score coefficients to zero means fitting the covariate
    // block alone.
    const int covariate_cols = multi.score_blocks.front().col_start;
    DesignMatrix restricted = multi;
    restricted.x = multi.x.leftCols(covariate_cols).eval();
    restricted.terms.assign(multi.terms.begin(), multi.terms.begin() + covariate_cols);
    restricted.score_blocks.clear();
    restricted.penalties.clear();
    const FittedModel forced_zero = fit_pirls(restricted, Family::poisson());

    const ModelSpec static_spec = spec_from_abbreviation("GLM-PG", "alpha", {});
    DesignBuilder static_builder(p, static_spec);
    const FittedModel static_fit =
        fit_pirls(static_builder.frequency_design(p, scores), Family::poisson());

    REQUIRE(static_fit.coefficients.size() == forced_zero.coefficients.size());
    CHECK((static_fit.coefficients - forced_zero.coefficients).lpNorm<Eigen::Infinity>() <
          1e-8);
}
