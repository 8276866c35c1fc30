#include "claimscore/claim_score.hpp"

#include <algorithm>
#include <stdexcept>

namespace claimscore {

void ClaimScoreConfig::validate() const {
    if (max_level < 3)
        throw std::invalid_argument("ClaimScoreConfig: max_level must be at least 3");
    if (jump < 1 || jump > max_level - 1)
        throw std::invalid_argument("ClaimScoreConfig: jump must lie in [1, max_level - 1]");
    if (entry_level < 2 || entry_level > max_level - 1)
        throw std::invalid_argument("ClaimScoreConfig: entry_level must lie in [2, max_level - 1]");
}

ScoreState step(ScoreState state, double exposure, int claims, const ClaimScoreConfig& cfg) {
    if (!(exposure > 0.0)) throw std::domain_error("step: exposure must be positive");
    if (claims < 0) throw std::domain_error("step: claims must be nonnegative");
    const double bonus = claims == 0 ? exposure : 0.0;
    const double malus = cfg.jump * static_cast<double>(claims) / exposure;
    const double next = state.level + bonus - malus;
    return {std::clamp(next, 1.0, static_cast<double>(cfg.max_level))};
}

std::vector<double> trajectory(const std::vector<PeriodExperience>& periods,
                               const ClaimScoreConfig& cfg,
                               ScoreState initial) {
    for (std::size_t i = 1; i < periods.size(); ++i)
        if (periods[i].year <= periods[i - 1].year)
            throw std::invalid_argument("trajectory: periods must be strictly increasing in year");
    std::vector<double> entering;
    entering.reserve(periods.size() + 1);
    ScoreState state = initial;
    entering.push_back(state.level);
    for (const auto& p : periods) {
        state = step(state, p.exposure, p.claims, cfg);
        entering.push_back(state.level);
    }
    return entering;
}

ScoreState initialize_from_history(const std::vector<PeriodExperience>& history,
                                   const ClaimScoreConfig& cfg) {
    const auto levels = trajectory(history, cfg, {static_cast<double>(cfg.entry_level)});
    return {levels.back()};
}

}  // namespace claimscore
