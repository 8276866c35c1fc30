#pragma once

// Bonus-malus claim score: a bounded level that rises by the claim-free
// exposure and drops by jump * claims / exposure, clamped to [1, max_level].
// The level entering a period is the covariate used to price that period.

#include <vector>

namespace claimscore {

struct ClaimScoreConfig {
    int jump = 1;         // drop per claim, scaled by 1/exposure
    int max_level = 3;    // ceiling s; floor is fixed at 1
    int entry_level = 2;  // initial level for policyholders without history

    void validate() const;
};

struct ScoreState {
    double level = 0.0;
};

// One observed period for a customer-product pair, already aggregated to
// calendar years.
struct PeriodExperience {
    int year = 0;
    double exposure = 0.0;
    int claims = 0;
};

// Applies one period: min(max(level + e * 1{N=0} - jump * N / e, 1), s).
ScoreState step(ScoreState state, double exposure, int claims, const ClaimScoreConfig& cfg);

// Score entering each period: element t prices period t and depends only on
// experience before it; element 0 equals initial. periods must be strictly
// increasing in year. Returns periods.size() + 1 levels (the last is the
// state after the final period).
std::vector<double> trajectory(const std::vector<PeriodExperience>& periods,
                               const ClaimScoreConfig& cfg,
                               ScoreState initial);

// Runs the score over pre-sample claims history starting from the entry
// level and returns the final state; an empty history yields the entry
// level.
ScoreState initialize_from_history(const std::vector<PeriodExperience>& history,
                                   const ClaimScoreConfig& cfg);

}  // namespace claimscore
