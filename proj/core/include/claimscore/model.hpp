#pragma once

// Model-level operations on fitted frequency/severity pairs: mean
// prediction, claim-score relativities, risk premia and nested
// likelihood-ratio tests.

#include "claimscore/design.hpp"
#include "claimscore/fitter.hpp"

#include <Eigen/Dense>

namespace claimscore {

// A fitted frequency/severity pair for one spec on one product.
struct ModelPair {
    ModelSpec spec;
    FittedModel frequency;
    FittedModel severity;
};

// exp(offset + x' delta) for a single design row.
double predict_mean(const FittedModel& fit, const Eigen::VectorXd& row, double offset = 0.0);

// Multiplicative claim-score relativity exp(f_j(level)) for the given
// product; exactly 1 at the entry level by construction.
double relativity(const FittedModel& fit, const std::string& product, double level);

// Risk premium per unit exposure: expected frequency times expected
// severity under frequency/severity independence.
double premium(const FittedModel& frequency_fit, const Eigen::VectorXd& frequency_row,
               const FittedModel& severity_fit, const Eigen::VectorXd& severity_row);

struct LrTestResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

// 2 (loglik_alt - loglik_null) against the chi-squared tail; requires the
// null model's terms to nest inside the alternative's on the same data.
LrTestResult lr_test(const FittedModel& null_fit, const FittedModel& alt_fit);

// Fits the frequency and severity models of a spec on `fit_data`, with
// categorical codings taken from `reference` (normally the full portfolio,
// so train and test rows share columns).
ModelPair fit_model_pair(const Portfolio& reference, const Portfolio& fit_data,
                         const ModelSpec& spec, const ScoreMap& scores,
                         const FitSettings& settings = {});

// Expected loss per record of the spec's product in `data`: exposure times
// predicted frequency rate times predicted severity. Returns one value per
// matching record along with the record indices and observed losses.
struct PremiumTable {
    std::vector<std::size_t> record_rows;
    Eigen::VectorXd premiums;
    Eigen::VectorXd losses;
};

PremiumTable premium_table(const ModelPair& pair, const Portfolio& reference,
                           const Portfolio& data, const ScoreMap& scores);

}  // namespace claimscore
