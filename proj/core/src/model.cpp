#include "claimscore/model.hpp"

#include "claimscore/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace claimscore {

double predict_mean(const FittedModel& fit, const Eigen::VectorXd& row, double offset) {
    if (row.size() != fit.coefficients.size())
        throw std::invalid_argument("predict_mean: row dimension mismatch");
    return std::exp(offset + row.dot(fit.coefficients));
}

double relativity(const FittedModel& fit, const std::string& product, double level) {
    const ScoreBlockInfo* block = nullptr;
    for (const auto& b : fit.score_blocks)
        if (b.product == product) block = &b;
    if (!block) return 1.0;  // no score effect for this product: f == 0

    if (level < 1.0 || level > static_cast<double>(block->config.max_level))
        throw std::domain_error("relativity: level outside [1, max_level]");
    const Eigen::VectorXd gamma =
        fit.coefficients.segment(block->col_start, block->num_cols);
    if (block->effect == ScoreEffect::LinearInScore)
        return std::exp(gamma[0] * (level - block->config.entry_level));
    return std::exp(block->basis->evaluate(level).dot(gamma));
}

double premium(const FittedModel& frequency_fit, const Eigen::VectorXd& frequency_row,
               const FittedModel& severity_fit, const Eigen::VectorXd& severity_row) {
    if (!frequency_fit.family.is_count() || severity_fit.family.is_count())
        throw std::invalid_argument(
            "premium: needs a count frequency fit and a severity fit");
    return predict_mean(frequency_fit, frequency_row) *
           predict_mean(severity_fit, severity_row);
}

LrTestResult lr_test(const FittedModel& null_fit, const FittedModel& alt_fit) {
    if (null_fit.num_observations != alt_fit.num_observations)
        throw std::invalid_argument("lr_test: models were fitted on different data");
    if (null_fit.family.kind() != alt_fit.family.kind())
        throw std::invalid_argument("lr_test: models use different families");
    for (const auto& term : null_fit.terms)
        if (std::find(alt_fit.terms.begin(), alt_fit.terms.end(), term) == alt_fit.terms.end())
            throw std::invalid_argument("lr_test: null model is not nested (term '" + term +
                                        "' missing from the alternative)");

    LrTestResult result;
    result.dof =
        static_cast<int>(alt_fit.coefficients.size() - null_fit.coefficients.size());
    if (result.dof < 0) throw std::invalid_argument("lr_test: alternative has fewer terms");
    result.statistic = std::max(0.0, 2.0 * (alt_fit.loglik - null_fit.loglik));
    result.p_value = result.dof == 0
                         ? 1.0
                         : stats::chi_squared_upper_tail(result.statistic, result.dof);
    return result;
}

ModelPair fit_model_pair(const Portfolio& reference, const Portfolio& fit_data,
                         const ModelSpec& spec, const ScoreMap& scores,
                         const FitSettings& settings) {
    DesignBuilder builder(reference, spec);
    ModelPair pair;
    pair.spec = builder.spec();
    pair.frequency =
        fit_pirls(builder.frequency_design(fit_data, scores), spec.frequency_family, settings);
    pair.severity = fit_pirls(builder.severity_design(fit_data), spec.severity_family, settings);
    return pair;
}

PremiumTable premium_table(const ModelPair& pair, const Portfolio& reference,
                           const Portfolio& data, const ScoreMap& scores) {
    DesignBuilder builder(reference, pair.spec);
    const DesignMatrix freq = builder.frequency_design(data, scores);
    const auto sev_cols = pair.severity.coefficients.size();
    if (sev_cols > freq.cols())
        throw std::invalid_argument("premium_table: incompatible severity fit");

    PremiumTable table;
    table.record_rows = freq.record_rows;
    table.premiums.resize(freq.rows());
    table.losses.resize(freq.rows());
    for (Eigen::Index r = 0; r < freq.rows(); ++r) {
        // Expected count (offset carries the exposure) times expected severity.
        const double expected_count =
            predict_mean(pair.frequency, freq.x.row(r).transpose(), freq.offset[r]);
        const double expected_severity =
            predict_mean(pair.severity, freq.x.row(r).head(sev_cols).transpose());
        table.premiums[r] = expected_count * expected_severity;
        table.losses[r] = data.records[freq.record_rows[r]].claim_total;
    }
    return table;
}

}  // namespace claimscore
