#pragma once

// Reproducible synthetic multi-product portfolio generator. Ownership is
// sampled with a bundling factor that creates cross-product overlap, claim
// counts come from a log-link frequency process with an optional shared
// gamma frailty (so past claims genuinely predict future claims), and
// severities from Gamma or Inverse-Gaussian claim-size draws. All output is
// a pure function of the config; customers use independent RNG substreams.

#include "claimscore/claim_score.hpp"
#include "claimscore/portfolio.hpp"
#include "claimscore/portfolio_io.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace claimscore {

struct SimProductConfig {
    std::string name;
    double ownership_prob = 0.5;
    double frequency_intercept = -2.0;          // log claims rate at reference levels
    std::vector<double> riskclass_effects = {};  // per non-reference category
    double age_effect = 0.0;                     // per standardized age unit
    bool severity_inverse_gaussian = false;
    double severity_mean = 1000.0;
    double severity_shape = 2.0;  // Gamma shape / IG shape parameter per claim
};

// True bonus-malus dynamics: the generating rate is multiplied by
// exp(slope * (level - entry_level)) with the level evolving per the config.
struct TrueScoreDynamics {
    ClaimScoreConfig config;
    double log_relativity_slope = -0.2;
};

struct SimulationConfig {
    std::uint64_t seed = 1;
    int num_customers = 1000;
    int first_year = 2012;
    int num_years = 5;
    int history_years = 0;        // pre-sample years per customer with history
    double history_prob = 0.5;    // share of owners with pre-sample history
    double bundling_prob = 0.3;   // bundlers get boosted ownership everywhere
    double bundling_boost = 0.35;
    bool frailty = false;
    double frailty_variance = 1.0;
    std::optional<TrueScoreDynamics> true_score;
    std::vector<SimProductConfig> products;

    // Four-product portfolio with overlap, covariate effects and moderately
    // skewed severities; the usual starting point for tests and the CLI.
    static SimulationConfig example(std::uint64_t seed);
};

struct SimulationOutput {
    Portfolio portfolio;  // already aggregated, one record per customer-product-year
    HistoryMap history;
};

SimulationOutput simulate(const SimulationConfig& config);

}  // namespace claimscore
