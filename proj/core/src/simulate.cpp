#include "claimscore/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace claimscore {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Hand-rolled samplers keep the output independent of the standard
// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        // Box-Muller; one value per call keeps draw order obvious.
        const double u1 = std::max(uniform(), 1e-300);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 30.0) {
            // Knuth product method.
            const double limit = std::exp(-mean);
            int n = -1;
            double prod = 1.0;
            do {
                prod *= uniform();
                ++n;
            } while (prod > limit);
            return n;
        }
        // Normal approximation for large means (not hit by realistic configs).
        return std::max(0, static_cast<int>(std::lround(mean + std::sqrt(mean) * normal())));
    }

    double gamma(double shape, double scale) {
        if (shape < 1.0) {
            const double u = std::max(uniform(), 1e-300);
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        // Marsaglia-Tsang squeeze.
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x;
            double v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(std::max(u, 1e-300)) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v * scale;
        }
    }

    double inverse_gaussian(double mean, double shape) {
        // Michael-Schucany-Haas.
        const double n = normal();
        const double y = n * n;
        const double x = mean + mean * mean * y / (2.0 * shape) -
                         mean / (2.0 * shape) *
                             std::sqrt(4.0 * mean * shape * y + mean * mean * y * y);
        return uniform() <= mean / (mean + x) ? x : mean * mean / x;
    }

private:
    std::mt19937_64 engine_;
};

const std::vector<std::string>& riskclass_labels() {
    static const std::vector<std::string> labels = {"low", "medium", "high"};
    return labels;
}

}  // namespace

SimulationConfig SimulationConfig::example(std::uint64_t seed) {
    SimulationConfig cfg;
    cfg.seed = seed;
    cfg.num_customers = 2000;
    cfg.first_year = 2012;
    cfg.num_years = 5;
    cfg.history_years = 7;
    cfg.history_prob = 0.5;
    cfg.bundling_prob = 0.3;
    cfg.bundling_boost = 0.35;
    cfg.frailty = true;
    cfg.frailty_variance = 1.0;
    cfg.products = {
        {"liability", 0.55, -2.2, {0.4, 0.9}, 0.08, false, 900.0, 1.2},
        {"contents", 0.60, -1.9, {0.3, 0.7}, -0.10, false, 650.0, 1.5},
        {"home", 0.40, -2.4, {0.5, 0.8}, 0.05, true, 1400.0, 2.0},
        {"travel", 0.50, -1.6, {0.2, 0.5}, -0.05, false, 350.0, 1.8},
    };
    return cfg;
}

SimulationOutput simulate(const SimulationConfig& config) {
    if (config.products.empty())
        throw std::invalid_argument("simulate: config lists no products");
    if (config.num_customers <= 0 || config.num_years <= 0)
        throw std::invalid_argument("simulate: need customers and years");
    for (const auto& p : config.products) {
        if (p.ownership_prob < 0.0 || p.ownership_prob > 1.0)
            throw std::invalid_argument("simulate: ownership_prob outside [0, 1]");
        if (!(p.severity_mean > 0.0) || !(p.severity_shape > 0.0))
            throw std::invalid_argument("simulate: severity parameters must be positive");
    }
    if (config.true_score) config.true_score->config.validate();

    SimulationOutput out;
    for (const auto& p : config.products) {
        ProductSchema ps;
        ps.name = p.name;
        ps.covariates = {{"riskclass", CovariateKind::Categorical},
                         {"age", CovariateKind::Continuous}};
        out.portfolio.schema.products.push_back(std::move(ps));
    }

    const int digits = std::max(6, static_cast<int>(std::to_string(config.num_customers).size()));

    for (int ci = 0; ci < config.num_customers; ++ci) {
        Rng rng(splitmix64(config.seed ^ (0x9E3779B97F4A7C15ull * (ci + 1))));

        std::string id = std::to_string(ci + 1);
        id = "C" + std::string(digits - id.size(), '0') + id;

        const bool bundler = rng.uniform() < config.bundling_prob;
        const double frailty =
            config.frailty
                ? rng.gamma(1.0 / config.frailty_variance, config.frailty_variance)
                : 1.0;

        // Shared customer covariates.
        const double class_draw = rng.uniform();
        const std::size_t riskclass = class_draw < 0.5 ? 0 : (class_draw < 0.8 ? 1 : 2);
        const double base_age =
            std::clamp(std::round(45.0 + 12.0 * rng.normal()), 18.0, 90.0);

        for (const auto& product : config.products) {
            double own_prob = product.ownership_prob;
            if (bundler) own_prob = std::min(1.0, own_prob + config.bundling_boost);
            if (rng.uniform() >= own_prob) continue;

            // True score dynamics start at the entry level and evolve over
            // any generated history before the in-sample years.
            ScoreState true_state{0.0};
            if (config.true_score)
                true_state.level = static_cast<double>(config.true_score->config.entry_level);

            auto year_rate = [&](double exposure) {
                double log_rate = product.frequency_intercept;
                if (riskclass > 0 && riskclass - 1 < product.riskclass_effects.size())
                    log_rate += product.riskclass_effects[riskclass - 1];
                log_rate += product.age_effect * (base_age - 45.0) / 12.0;
                double rate = std::exp(log_rate) * frailty;
                if (config.true_score) {
                    const auto& ts = *config.true_score;
                    rate *= std::exp(ts.log_relativity_slope *
                                     (true_state.level - ts.config.entry_level));
                }
                return rate * exposure;
            };

            const bool has_history =
                config.history_years > 0 && rng.uniform() < config.history_prob;
            if (has_history) {
                std::vector<PeriodExperience> periods;
                for (int h = 0; h < config.history_years; ++h) {
                    const int year = config.first_year - config.history_years + h;
                    const int claims = rng.poisson(year_rate(1.0));
                    periods.push_back({year, 1.0, claims});
                    if (config.true_score)
                        true_state = step(true_state, 1.0, claims, config.true_score->config);
                }
                out.history[{id, product.name}] = std::move(periods);
            }

            // Possibly a late joiner; once owned, the product stays.
            int start_year = config.first_year;
            if (config.num_years > 1 && rng.uniform() < 0.2)
                start_year += 1 + static_cast<int>(rng.uniform() * (config.num_years - 1));

            for (int year = start_year; year < config.first_year + config.num_years; ++year) {
                double exposure = 1.0;
                if (rng.uniform() < 0.15)
                    exposure = 0.25 * (1.0 + std::floor(rng.uniform() * 3.0));

                const int claims = rng.poisson(year_rate(exposure));
                double total = 0.0;
                const double sev_mean =
                    product.severity_mean *
                    std::exp(riskclass > 0 && riskclass - 1 < product.riskclass_effects.size()
                                 ? 0.5 * product.riskclass_effects[riskclass - 1]
                                 : 0.0);
                for (int n = 0; n < claims; ++n) {
                    total += product.severity_inverse_gaussian
                                 ? rng.inverse_gaussian(sev_mean,
                                                        product.severity_shape * sev_mean)
                                 : rng.gamma(product.severity_shape,
                                             sev_mean / product.severity_shape);
                }
                if (config.true_score)
                    true_state = step(true_state, exposure, claims, config.true_score->config);

                PolicyRecord rec;
                rec.customer_id = id;
                rec.product = product.name;
                rec.calendar_year = year;
                rec.exposure = exposure;
                rec.claim_count = claims;
                rec.claim_total = total;
                rec.covariates["riskclass"] = riskclass_labels()[riskclass];
                rec.covariates["age"] =
                    base_age + static_cast<double>(year - config.first_year);
                out.portfolio.records.push_back(std::move(rec));
            }
        }
    }
    return out;
}

}  // namespace claimscore
