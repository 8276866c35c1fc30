// Batch CLI for the multi-product claim-score pipeline: simulate a
// portfolio, fit the model matrix, tune claim-score parameters by grid
// search, and compare rate structures via ratio Gini matrices, mini-max
// ranks and likelihood-ratio tests. All outputs are deterministic given the
// config (seed included) and independent of --jobs.

#include "claimscore/design.hpp"
#include "claimscore/fitter.hpp"
#include "claimscore/gini.hpp"
#include "claimscore/model.hpp"
#include "claimscore/optimizer.hpp"
#include "claimscore/portfolio.hpp"
#include "claimscore/portfolio_io.hpp"
#include "claimscore/report.hpp"
#include "claimscore/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace claimscore;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitConvergence = 2;
constexpr int kExitInfeasible = 3;

struct RunConfig {
    fs::path config_path;
    fs::path data;
    fs::path schema;
    fs::path history;
    fs::path out = "out";
    std::uint64_t seed = 42;
    int jobs = 1;
    std::vector<std::string> models;
    std::string benchmark = "GLM-PG";
    GridSpec grid;
    std::map<std::string, ClaimScoreConfig> score_configs;
    json sim_overrides;
};

ClaimScoreConfig config_from_json(const json& j) {
    ClaimScoreConfig cfg;
    cfg.jump = j.at("psi").get<int>();
    cfg.max_level = j.at("s").get<int>();
    cfg.entry_level = j.at("l0").get<int>();
    cfg.validate();
    return cfg;
}

void load_config_file(RunConfig& cfg) {
    if (cfg.config_path.empty()) return;
    std::ifstream in(cfg.config_path);
    if (!in) throw std::runtime_error("cannot open config file " + cfg.config_path.string());
    json doc;
    in >> doc;

    if (doc.contains("data")) cfg.data = doc["data"].get<std::string>();
    if (doc.contains("schema")) cfg.schema = doc["schema"].get<std::string>();
    if (doc.contains("history")) cfg.history = doc["history"].get<std::string>();
    if (doc.contains("out")) cfg.out = doc["out"].get<std::string>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("jobs")) cfg.jobs = doc["jobs"].get<int>();
    if (doc.contains("models")) cfg.models = doc["models"].get<std::vector<std::string>>();
    if (doc.contains("benchmark")) cfg.benchmark = doc["benchmark"].get<std::string>();
    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        if (g.contains("s_min")) cfg.grid.s_min = g["s_min"].get<int>();
        if (g.contains("s_max")) cfg.grid.s_max = g["s_max"].get<int>();
        if (g.contains("min_exposure_share"))
            cfg.grid.min_exposure_share = g["min_exposure_share"].get<double>();
    }
    if (doc.contains("score_configs"))
        for (const auto& [product, j] : doc["score_configs"].items())
            cfg.score_configs[product] = config_from_json(j);
    if (doc.contains("simulate")) cfg.sim_overrides = doc["simulate"];
}

SimulationConfig build_sim_config(const RunConfig& cfg) {
    SimulationConfig sim = SimulationConfig::example(cfg.seed);
    const json& j = cfg.sim_overrides;
    if (j.is_null()) return sim;
    if (j.contains("num_customers")) sim.num_customers = j["num_customers"].get<int>();
    if (j.contains("first_year")) sim.first_year = j["first_year"].get<int>();
    if (j.contains("num_years")) sim.num_years = j["num_years"].get<int>();
    if (j.contains("history_years")) sim.history_years = j["history_years"].get<int>();
    if (j.contains("history_prob")) sim.history_prob = j["history_prob"].get<double>();
    if (j.contains("bundling_prob")) sim.bundling_prob = j["bundling_prob"].get<double>();
    if (j.contains("bundling_boost")) sim.bundling_boost = j["bundling_boost"].get<double>();
    if (j.contains("frailty")) sim.frailty = j["frailty"].get<bool>();
    if (j.contains("frailty_variance"))
        sim.frailty_variance = j["frailty_variance"].get<double>();
    if (j.contains("true_score")) {
        TrueScoreDynamics dyn;
        dyn.config = config_from_json(j["true_score"]);
        if (j["true_score"].contains("slope"))
            dyn.log_relativity_slope = j["true_score"]["slope"].get<double>();
        sim.true_score = dyn;
    }
    if (j.contains("products")) {
        sim.products.clear();
        for (const auto& p : j["products"]) {
            SimProductConfig sp;
            sp.name = p.at("name").get<std::string>();
            if (p.contains("ownership_prob")) sp.ownership_prob = p["ownership_prob"].get<double>();
            if (p.contains("frequency_intercept"))
                sp.frequency_intercept = p["frequency_intercept"].get<double>();
            if (p.contains("riskclass_effects"))
                sp.riskclass_effects = p["riskclass_effects"].get<std::vector<double>>();
            if (p.contains("age_effect")) sp.age_effect = p["age_effect"].get<double>();
            if (p.contains("severity_inverse_gaussian"))
                sp.severity_inverse_gaussian = p["severity_inverse_gaussian"].get<bool>();
            if (p.contains("severity_mean")) sp.severity_mean = p["severity_mean"].get<double>();
            if (p.contains("severity_shape")) sp.severity_shape = p["severity_shape"].get<double>();
            sim.products.push_back(std::move(sp));
        }
    }
    return sim;
}

struct LoadedData {
    Portfolio portfolio;  // aggregated
    HistoryMap history;
    TrainTestSplit split;
};

LoadedData load_data(const RunConfig& cfg) {
    if (cfg.data.empty() || cfg.schema.empty())
        throw std::runtime_error("this command needs --data and --schema");
    LoadedData data;
    const Schema schema = load_schema(cfg.schema);
    data.portfolio = aggregate_policy_years(load_csv(cfg.data, schema));
    if (!cfg.history.empty()) data.history = load_history(cfg.history);
    data.split = train_test_split(data.portfolio);
    return data;
}

// Per-product claim score configs: explicit config wins, then a previous
// optimize run's best_configs.json in the output directory, then (2, 5, 2).
std::map<std::string, ClaimScoreConfig> resolve_score_configs(const RunConfig& cfg,
                                                              const Portfolio& portfolio) {
    std::map<std::string, ClaimScoreConfig> configs = cfg.score_configs;
    const fs::path best = cfg.out / "best_configs.json";
    if (configs.empty() && fs::exists(best)) {
        std::ifstream in(best);
        json doc;
        in >> doc;
        for (const auto& [product, j] : doc.items()) configs[product] = config_from_json(j);
    }
    for (const auto& product : portfolio.product_names())
        if (!configs.count(product)) configs[product] = ClaimScoreConfig{2, 5, 2};
    return configs;
}

std::vector<std::string> resolve_models(const RunConfig& cfg) {
    return cfg.models.empty()
               ? std::vector<std::string>{"GLM-PG", "GAM-PG-One", "GAM-PG-Multi"}
               : cfg.models;
}

int cmd_simulate(const RunConfig& cfg) {
    const SimulationConfig sim = build_sim_config(cfg);
    const SimulationOutput out = simulate(sim);
    fs::create_directories(cfg.out);
    save_csv(out.portfolio, cfg.out / "records.csv");
    save_schema(out.portfolio.schema, cfg.out / "schema.json");
    save_history(out.history, cfg.out / "history.csv");
    std::cout << "simulate: " << out.portfolio.records.size() << " records, "
              << out.history.size() << " history series -> " << cfg.out.string() << "\n";
    return kExitOk;
}

int cmd_fit(const RunConfig& cfg) {
    const LoadedData data = load_data(cfg);
    const auto configs = resolve_score_configs(cfg, data.portfolio);
    const auto models = resolve_models(cfg);
    const ScoreMap scores = ScoreMap::compute(data.portfolio, configs, &data.history);
    fs::create_directories(cfg.out);

    bool any_failure = false;
    for (const auto& product : data.portfolio.product_names()) {
        for (const auto& abbrev : models) {
            try {
                const ModelSpec spec = spec_from_abbreviation(abbrev, product, configs);
                const ModelPair pair =
                    fit_model_pair(data.portfolio, data.split.train, spec, scores);
                report::fit_report(pair).write(cfg.out /
                                               ("fit_" + product + "_" + abbrev + ".csv"));
            } catch (const ConvergenceError& e) {
                any_failure = true;
                std::cerr << "fit " << product << " " << abbrev << ": " << e.what() << "\n";
            } catch (const RankError& e) {
                any_failure = true;
                std::cerr << "fit " << product << " " << abbrev << ": " << e.what() << "\n";
            }
        }
    }
    std::cout << "fit: reports written to " << cfg.out.string() << "\n";
    return any_failure ? kExitConvergence : kExitOk;
}

int cmd_optimize(const RunConfig& cfg) {
    const LoadedData data = load_data(cfg);
    const auto models = resolve_models(cfg);
    fs::create_directories(cfg.out);

    // The search tunes the cubic one-product GAM sharing the benchmark's
    // families; severity carries no score terms.
    std::string template_families = cfg.benchmark;
    if (template_families.rfind("GLM-", 0) == 0 || template_families.rfind("GAM-", 0) == 0)
        template_families = template_families.substr(4);
    const auto dash = template_families.find('-');
    if (dash != std::string::npos) template_families = template_families.substr(0, dash);

    json best_doc;
    for (const auto& product : data.portfolio.product_names()) {
        const ModelSpec bench_spec =
            spec_from_abbreviation(cfg.benchmark, product, {});
        const ScoreMap no_scores;
        const ModelPair benchmark =
            fit_model_pair(data.portfolio, data.split.train, bench_spec, no_scores);

        ModelSpec tmpl = spec_from_abbreviation("GAM-" + template_families + "-One", product,
                                                {{product, ClaimScoreConfig{2, 5, 2}}});
        const SearchResult result =
            optimize_claim_score(data.split.train, data.split.test, tmpl, benchmark, cfg.grid,
                                 cfg.jobs, &data.history);
        report::search_report(result).write(cfg.out / ("search_" + product + ".csv"));
        best_doc[product] = {{"psi", result.best_config.jump},
                             {"s", result.best_config.max_level},
                             {"l0", result.best_config.entry_level},
                             {"gini", result.best_gini}};
        std::cout << "optimize " << product << ": best (psi=" << result.best_config.jump
                  << ", s=" << result.best_config.max_level
                  << ", l0=" << result.best_config.entry_level << ") gini "
                  << 100.0 * result.best_gini << "%\n";
    }
    std::ofstream out(cfg.out / "best_configs.json");
    out << best_doc.dump(2) << '\n';
    return kExitOk;
}

// Null model for the likelihood-ratio table: one-product models test
// against the static GLM, multi-product against the matching one-product
// model; the piecewise-linear multi tests against its own one-product
// variant when present, otherwise against the static GLM.
std::optional<std::string> lr_null_for(const std::string& abbrev,
                                       const std::vector<std::string>& models) {
    auto available = [&](const std::string& name) {
        return std::find(models.begin(), models.end(), name) != models.end();
    };
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= abbrev.size()) {
        const auto dash = abbrev.find('-', pos);
        if (dash == std::string::npos) {
            parts.push_back(abbrev.substr(pos));
            break;
        }
        parts.push_back(abbrev.substr(pos, dash - pos));
        pos = dash + 1;
    }
    if (parts.size() < 3) return std::nullopt;  // static: nothing to test against
    const bool piecewise = parts.size() == 4;
    if (parts[2] == "One") {
        if (piecewise) return std::nullopt;
        const std::string null = "GLM-" + parts[1];
        return available(null) ? std::optional(null) : std::nullopt;
    }
    if (piecewise) {
        const std::string one_pl = parts[0] + "-" + parts[1] + "-One-PL";
        if (available(one_pl)) return one_pl;
        const std::string null = "GLM-" + parts[1];
        return available(null) ? std::optional(null) : std::nullopt;
    }
    const std::string null = parts[0] + "-" + parts[1] + "-One";
    return available(null) ? std::optional(null) : std::nullopt;
}

int cmd_evaluate(const RunConfig& cfg) {
    const LoadedData data = load_data(cfg);
    const auto configs = resolve_score_configs(cfg, data.portfolio);
    const auto models = resolve_models(cfg);
    const ScoreMap scores = ScoreMap::compute(data.portfolio, configs, &data.history);
    fs::create_directories(cfg.out);

    bool any_failure = false;
    for (const auto& product : data.portfolio.product_names()) {
        std::vector<std::string> fitted_names;
        std::vector<ModelPair> fitted;
        std::vector<PremiumTable> premia;
        for (const auto& abbrev : models) {
            try {
                const ModelSpec spec = spec_from_abbreviation(abbrev, product, configs);
                ModelPair pair = fit_model_pair(data.portfolio, data.split.train, spec, scores);
                premia.push_back(premium_table(pair, data.portfolio, data.split.test, scores));
                fitted.push_back(std::move(pair));
                fitted_names.push_back(abbrev);
            } catch (const ConvergenceError& e) {
                any_failure = true;
                std::cerr << "evaluate " << product << " " << abbrev << ": " << e.what() << "\n";
            } catch (const RankError& e) {
                any_failure = true;
                std::cerr << "evaluate " << product << " " << abbrev << ": " << e.what() << "\n";
            }
        }
        if (fitted.empty()) continue;

        const auto n = static_cast<Eigen::Index>(fitted.size());
        Eigen::MatrixXd gini = Eigen::MatrixXd::Zero(n, n);
        Eigen::MatrixXd se = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index b = 0; b < n; ++b)
            for (Eigen::Index a = 0; a < n; ++a) {
                const auto& bench = premia[static_cast<std::size_t>(b)];
                const auto& alt = premia[static_cast<std::size_t>(a)];
                const GiniResult r = gini_compare(
                    bench.premiums, bench.losses, relativities(alt.premiums, bench.premiums));
                gini(b, a) = r.gini;
                se(b, a) = r.std_error;
            }

        report::gini_matrix_report(fitted_names, gini, se)
            .write(cfg.out / ("gini_matrix_" + product + ".csv"));
        report::minimax_report(fitted_names, gini, se)
            .write(cfg.out / ("minimax_" + product + ".csv"));

        std::vector<report::LrRow> lr_rows;
        for (std::size_t a = 0; a < fitted.size(); ++a) {
            const auto null_name = lr_null_for(fitted_names[a], fitted_names);
            if (!null_name) continue;
            const auto pos = std::find(fitted_names.begin(), fitted_names.end(), *null_name) -
                             fitted_names.begin();
            const LrTestResult lr =
                lr_test(fitted[static_cast<std::size_t>(pos)].frequency, fitted[a].frequency);
            lr_rows.push_back({*null_name, fitted_names[a], lr.statistic, lr.dof, lr.p_value});
        }
        if (!lr_rows.empty())
            report::lr_report(lr_rows).write(cfg.out / ("lr_tests_" + product + ".csv"));
    }
    std::cout << "evaluate: reports written to " << cfg.out.string() << "\n";
    return any_failure ? kExitConvergence : kExitOk;
}

int cmd_report(const RunConfig& cfg) {
    const LoadedData data = load_data(cfg);
    fs::create_directories(cfg.out);
    report::overlap_table(overlap_report(data.portfolio))
        .write(cfg.out / "overlap.csv");
    std::cout << "report: overlap tables written to " << cfg.out.string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic multi-product claim-score risk classification"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string models_flag;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", cfg.config_path, "JSON config file");
        sub->add_option("--data", cfg.data, "records CSV");
        sub->add_option("--schema", cfg.schema, "schema JSON");
        sub->add_option("--history", cfg.history, "pre-sample history CSV");
        sub->add_option("--out", cfg.out, "output directory");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--jobs", cfg.jobs, "worker threads for the grid search");
        sub->add_option("--models", models_flag, "comma-separated model abbreviations");
        sub->add_option("--benchmark", cfg.benchmark, "benchmark model abbreviation");
    };

    CLI::App* sim = app.add_subcommand("simulate", "write a synthetic portfolio");
    CLI::App* fit = app.add_subcommand("fit", "fit the model matrix, one report per model");
    CLI::App* opt = app.add_subcommand("optimize", "grid-search claim score parameters");
    CLI::App* eval = app.add_subcommand("evaluate", "Gini matrices, mini-max ranks, LR tests");
    CLI::App* rep = app.add_subcommand("report", "descriptive overlap tables");
    for (CLI::App* sub : {sim, fit, opt, eval, rep}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        // Config file first, then command-line overrides re-applied by CLI11
        // (flags were parsed directly into cfg, so only fill gaps).
        RunConfig from_file = cfg;
        load_config_file(from_file);
        // Command line wins where it was given.
        if (cfg.data.empty()) cfg.data = from_file.data;
        if (cfg.schema.empty()) cfg.schema = from_file.schema;
        if (cfg.history.empty()) cfg.history = from_file.history;
        if (cfg.out == "out") cfg.out = from_file.out;
        if (!sim->count("--seed") && !fit->count("--seed") && !opt->count("--seed") &&
            !eval->count("--seed") && !rep->count("--seed"))
            cfg.seed = from_file.seed;
        if (!opt->count("--jobs") && !fit->count("--jobs") && !eval->count("--jobs"))
            cfg.jobs = from_file.jobs;
        if (!models_flag.empty()) {
            cfg.models.clear();
            std::size_t pos = 0;
            while (pos <= models_flag.size()) {
                const auto comma = models_flag.find(',', pos);
                if (comma == std::string::npos) {
                    cfg.models.push_back(models_flag.substr(pos));
                    break;
                }
                cfg.models.push_back(models_flag.substr(pos, comma - pos));
                pos = comma + 1;
            }
        } else {
            cfg.models = from_file.models;
        }
        if (cfg.benchmark == "GLM-PG") cfg.benchmark = from_file.benchmark;
        cfg.grid = from_file.grid;
        cfg.score_configs = from_file.score_configs;
        cfg.sim_overrides = from_file.sim_overrides;

        if (sim->parsed()) return cmd_simulate(cfg);
        if (fit->parsed()) return cmd_fit(cfg);
        if (opt->parsed()) return cmd_optimize(cfg);
        if (eval->parsed()) return cmd_evaluate(cfg);
        if (rep->parsed()) return cmd_report(cfg);
    } catch (const InfeasibleGridError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
