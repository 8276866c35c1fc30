#pragma once

// Constrained grid search over the claim-score parameters (jump, max level,
// entry level) per product: every feasible config refits the frequency
// model on the training years and is scored by the out-of-sample ratio Gini
// index against a static benchmark. Evaluations are independent tasks; the
// reduction is deterministic regardless of worker count.

#include "claimscore/claim_score.hpp"
#include "claimscore/gini.hpp"
#include "claimscore/model.hpp"
#include "claimscore/portfolio.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace claimscore {

struct GridSpec {
    int s_min = 3;
    int s_max = 24;  // jump in {1..s-1}, entry level in {2..s-1}
    double min_exposure_share = 1e-4;
};

// All (jump, max_level, entry_level) triples in lexicographic
// (s, jump, entry) order.
std::vector<ClaimScoreConfig> enumerate_grid(const GridSpec& grid);

// True iff every integer score level 1..s collects at least
// min_exposure_share of the product's training exposure, with realized
// scores binned by rounding half-up.
bool feasible(const ClaimScoreConfig& config, const Portfolio& train,
              const std::string& product, double min_exposure_share,
              const HistoryMap* history = nullptr);

struct GridEvaluation {
    ClaimScoreConfig config;
    bool feasible = false;
    double gini = 0.0;     // NaN when infeasible or the fit failed
    double gini_se = 0.0;
    int fit_iterations = 0;
    double loglik = 0.0;
};

struct SearchResult {
    ClaimScoreConfig best_config;
    double best_gini = 0.0;
    std::vector<GridEvaluation> evaluations;  // one per enumerated config
};

class InfeasibleGridError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// spec_template fixes the product, families, structure and score effect;
// each grid config is substituted for the product's score config. The
// benchmark pair must be fitted on the training years. Throws
// InfeasibleGridError when no config passes the exposure constraint.
SearchResult optimize_claim_score(const Portfolio& train, const Portfolio& test,
                                  const ModelSpec& spec_template, const ModelPair& benchmark,
                                  const GridSpec& grid, int jobs = 1,
                                  const HistoryMap* history = nullptr,
                                  const FitSettings& settings = {});

}  // namespace claimscore
