#include "claimscore/optimizer.hpp"

#include "claimscore/design.hpp"
#include "claimscore/fitter.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace claimscore {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Integer bucket of a realized score: round half-up, clamped to [1, s].
int score_bucket(double level, int max_level) {
    const int bucket = static_cast<int>(std::floor(level + 0.5));
    return std::clamp(bucket, 1, max_level);
}

// Exposure share of the worst level; feasible iff it reaches the threshold.
double worst_level_share(const ClaimScoreConfig& config, const Portfolio& train,
                         const std::string& product, const HistoryMap* history,
                         int* worst_level = nullptr) {
    const ScoreMap scores = ScoreMap::compute(train, {{product, config}}, history);
    std::vector<double> exposure(static_cast<std::size_t>(config.max_level) + 1, 0.0);
    double total = 0.0;
    for (const auto& rec : train.records) {
        if (rec.product != product) continue;
        const double level = scores.entering(rec.customer_id, product, rec.calendar_year);
        exposure[static_cast<std::size_t>(score_bucket(level, config.max_level))] +=
            rec.exposure;
        total += rec.exposure;
    }
    if (total <= 0.0) throw std::invalid_argument("feasible: no training exposure for product");
    double worst = std::numeric_limits<double>::infinity();
    for (int level = 1; level <= config.max_level; ++level) {
        const double share = exposure[static_cast<std::size_t>(level)] / total;
        if (share < worst) {
            worst = share;
            if (worst_level) *worst_level = level;
        }
    }
    return worst;
}

}  // namespace

std::vector<ClaimScoreConfig> enumerate_grid(const GridSpec& grid) {
    if (grid.s_min < 3 || grid.s_max < grid.s_min)
        throw std::invalid_argument("enumerate_grid: invalid max-level range");
    std::vector<ClaimScoreConfig> configs;
    for (int s = grid.s_min; s <= grid.s_max; ++s)
        for (int psi = 1; psi <= s - 1; ++psi)
            for (int entry = 2; entry <= s - 1; ++entry)
                configs.push_back({psi, s, entry});
    return configs;
}

bool feasible(const ClaimScoreConfig& config, const Portfolio& train,
              const std::string& product, double min_exposure_share,
              const HistoryMap* history) {
    config.validate();
    if (min_exposure_share <= 0.0) return true;
    return worst_level_share(config, train, product, history) >= min_exposure_share;
}

SearchResult optimize_claim_score(const Portfolio& train, const Portfolio& test,
                                  const ModelSpec& spec_template, const ModelPair& benchmark,
                                  const GridSpec& grid, int jobs, const HistoryMap* history,
                                  const FitSettings& settings) {
    if (spec_template.structure == ModelStructure::Static)
        throw std::invalid_argument("optimize_claim_score: template must carry a score effect");
    const std::string& product = spec_template.product;

    // Trajectories for test rows use the full observation span; the score
    // entering the test year depends only on earlier claims.
    Portfolio full;
    full.schema = train.schema;
    full.records = train.records;
    full.records.insert(full.records.end(), test.records.begin(), test.records.end());

    // Benchmark premia and the shared severity fit do not depend on the
    // grid config.
    const ScoreMap no_scores;
    const PremiumTable bench_table = premium_table(benchmark, full, test, no_scores);
    ModelSpec severity_spec = spec_template;
    severity_spec.structure = ModelStructure::Static;
    severity_spec.score_effect = ScoreEffect::None;
    severity_spec.score_configs.clear();
    DesignBuilder severity_builder(full, severity_spec);
    const FittedModel severity_fit =
        fit_pirls(severity_builder.severity_design(train), spec_template.severity_family,
                  settings);

    const auto configs = enumerate_grid(grid);
    std::vector<GridEvaluation> evaluations(configs.size());

    auto evaluate = [&](std::size_t i) {
        GridEvaluation eval;
        eval.config = configs[i];
        eval.gini = kNaN;
        eval.gini_se = kNaN;
        eval.loglik = kNaN;
        eval.feasible =
            feasible(configs[i], train, product, grid.min_exposure_share, history);
        if (!eval.feasible) {
            evaluations[i] = std::move(eval);
            return;
        }
        try {
            ModelSpec spec = spec_template;
            spec.score_configs[product] = configs[i];
            if (spec.structure == ModelStructure::MultiProduct) {
                // Other products keep the template's configs.
                for (const auto& p : train.schema.products)
                    if (!spec.score_configs.count(p.name))
                        throw std::invalid_argument(
                            "optimize_claim_score: multi-product template needs configs "
                            "for all products");
            }
            const ScoreMap scores = ScoreMap::compute(full, spec.score_configs, history);
            DesignBuilder builder(full, spec);
            const FittedModel freq =
                fit_pirls(builder.frequency_design(train, scores), spec.frequency_family,
                          settings);

            ModelPair pair{spec, freq, severity_fit};
            const PremiumTable alt_table = premium_table(pair, full, test, scores);
            const Eigen::VectorXd rel =
                relativities(alt_table.premiums, bench_table.premiums);
            const GiniResult gini = gini_compare(bench_table.premiums, bench_table.losses, rel);

            eval.gini = gini.gini;
            eval.gini_se = gini.std_error;
            eval.fit_iterations = freq.diagnostics.iterations;
            eval.loglik = freq.loglik;
        } catch (const ConvergenceError&) {
            // Recorded as a feasible config without a usable Gini.
        } catch (const RankError&) {
        }
        evaluations[i] = std::move(eval);
    };

    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < configs.size(); ++i) evaluate(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= configs.size()) return;
                    evaluate(i);
                }
            });
        for (auto& t : pool) t.join();
    }

    // Deterministic reduction in enumeration order: strictly higher Gini
    // wins, so earlier (smaller s, jump, entry) configs win ties.
    SearchResult result;
    bool found = false;
    for (const auto& eval : evaluations) {
        if (!eval.feasible || std::isnan(eval.gini)) continue;
        if (!found || eval.gini > result.best_gini) {
            result.best_config = eval.config;
            result.best_gini = eval.gini;
            found = true;
        }
    }
    result.evaluations = std::move(evaluations);

    if (!found) {
        // Report the near-miss: the config whose worst level came closest
        // to the exposure threshold.
        double best_share = -1.0;
        ClaimScoreConfig best_config{};
        int failing_level = 0;
        for (const auto& config : configs) {
            int level = 0;
            const double share = worst_level_share(config, train, product, history, &level);
            if (share > best_share) {
                best_share = share;
                best_config = config;
                failing_level = level;
            }
        }
        std::ostringstream msg;
        msg << "optimize_claim_score: no feasible configuration for product '" << product
            << "'; closest was (psi=" << best_config.jump << ", s=" << best_config.max_level
            << ", l0=" << best_config.entry_level << ") failing at level " << failing_level
            << " with exposure share " << best_share << " < " << grid.min_exposure_share;
        throw InfeasibleGridError(msg.str());
    }
    return result;
}

}  // namespace claimscore
