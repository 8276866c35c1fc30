#include "claimscore/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace claimscore {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Family family_from_code(const std::string& code, bool severity) {
    if (!severity) {
        if (code == "P") return Family::poisson();
        if (code == "NB") return Family::negative_binomial(1.0);
    } else {
        if (code == "G") return Family::gamma();
        if (code == "IG") return Family::inverse_gaussian();
    }
    throw std::invalid_argument("unknown family code '" + code + "'");
}

}  // namespace

void ModelSpec::validate(const Schema& schema) const {
    if (schema.product_index(product) < 0)
        throw std::invalid_argument("ModelSpec: product '" + product + "' not in schema");
    if (structure == ModelStructure::Static) {
        if (score_effect != ScoreEffect::None)
            throw std::invalid_argument("ModelSpec: static structure admits no score effect");
        return;
    }
    if (score_effect == ScoreEffect::None)
        throw std::invalid_argument("ModelSpec: dynamic structure requires a score effect");
    if (spline_k < 2) throw std::invalid_argument("ModelSpec: spline_k must be at least 2");

    std::vector<std::string> needed;
    if (structure == ModelStructure::OneProduct) {
        needed.push_back(product);
    } else {
        for (const auto& p : schema.products) needed.push_back(p.name);
    }
    for (const auto& name : needed) {
        auto it = score_configs.find(name);
        if (it == score_configs.end())
            throw std::invalid_argument("ModelSpec: missing claim score config for product '" +
                                        name + "'");
        it->second.validate();
    }
}

ModelSpec spec_from_abbreviation(const std::string& abbreviation,
                                 const std::string& product,
                                 const std::map<std::string, ClaimScoreConfig>& score_configs,
                                 int spline_k) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= abbreviation.size()) {
        const auto dash = abbreviation.find('-', pos);
        if (dash == std::string::npos) {
            parts.push_back(abbreviation.substr(pos));
            break;
        }
        parts.push_back(abbreviation.substr(pos, dash - pos));
        pos = dash + 1;
    }
    if (parts.size() < 2 || parts.size() > 4 || (parts[0] != "GLM" && parts[0] != "GAM"))
        throw std::invalid_argument("unknown model abbreviation '" + abbreviation + "'");

    const bool gam = parts[0] == "GAM";
    const std::string& fam = parts[1];
    std::string freq_code, sev_code;
    if (fam.rfind("NB", 0) == 0) {
        freq_code = "NB";
        sev_code = fam.substr(2);
    } else if (fam.rfind("P", 0) == 0) {
        freq_code = "P";
        sev_code = fam.substr(1);
    } else {
        throw std::invalid_argument("unknown model abbreviation '" + abbreviation + "'");
    }

    ModelSpec spec;
    spec.abbreviation = abbreviation;
    spec.product = product;
    spec.frequency_family = family_from_code(freq_code, false);
    spec.severity_family = family_from_code(sev_code, true);
    spec.spline_k = spline_k;

    bool piecewise = false;
    if (parts.size() == 4) {
        if (parts[3] != "PL")
            throw std::invalid_argument("unknown model abbreviation '" + abbreviation + "'");
        piecewise = true;
    }

    if (parts.size() == 2) {
        if (gam) throw std::invalid_argument("static structure is GLM-only: '" + abbreviation + "'");
        spec.structure = ModelStructure::Static;
        spec.score_effect = ScoreEffect::None;
        return spec;
    }

    if (parts[2] == "One") {
        spec.structure = ModelStructure::OneProduct;
    } else if (parts[2] == "Multi") {
        spec.structure = ModelStructure::MultiProduct;
    } else {
        throw std::invalid_argument("unknown model abbreviation '" + abbreviation + "'");
    }
    if (!gam && piecewise)
        throw std::invalid_argument("piecewise-linear variants are GAM-only: '" + abbreviation +
                                    "'");
    spec.score_effect = !gam              ? ScoreEffect::LinearInScore
                        : piecewise       ? ScoreEffect::PiecewiseLinearSpline
                                          : ScoreEffect::CubicSpline;
    spec.score_configs = score_configs;
    return spec;
}

std::vector<std::string> model_catalog() {
    std::vector<std::string> out;
    const std::vector<std::string> fams = {"PG", "PIG", "NBG", "NBIG"};
    for (const auto& f : fams) out.push_back("GLM-" + f);
    for (const auto& kind : {"GAM", "GLM"})
        for (const auto& f : fams) out.push_back(std::string(kind) + "-" + f + "-One");
    for (const auto& kind : {"GAM", "GLM"})
        for (const auto& f : fams) out.push_back(std::string(kind) + "-" + f + "-Multi");
    for (const auto& f : fams) out.push_back("GAM-" + f + "-Multi-PL");
    return out;
}

ScoreMap ScoreMap::compute(const Portfolio& portfolio,
                           const std::map<std::string, ClaimScoreConfig>& configs,
                           const HistoryMap* history) {
    for (const auto& [product, cfg] : configs) cfg.validate();

    // Year-level experience per (customer, product); spells within a year
    // merge for scoring purposes.
    std::map<std::pair<std::string, std::string>, std::map<int, PeriodExperience>> experience;
    for (const auto& rec : portfolio.records) {
        if (!configs.count(rec.product)) continue;
        auto& per_year = experience[{rec.customer_id, rec.product}];
        auto& period = per_year[rec.calendar_year];
        period.year = rec.calendar_year;
        period.exposure += rec.exposure;
        period.claims += rec.claim_count;
    }

    ScoreMap map;
    for (const auto& [key, per_year] : experience) {
        const auto& cfg = configs.at(key.second);
        ScoreState initial{static_cast<double>(cfg.entry_level)};
        if (history) {
            auto hit = history->find(key);
            if (hit != history->end()) initial = initialize_from_history(hit->second, cfg);
        }

        std::vector<PeriodExperience> periods;
        periods.reserve(per_year.size());
        for (const auto& [year, period] : per_year) periods.push_back(period);

        const auto levels = trajectory(periods, cfg, initial);
        Series series;
        series.initial = initial.level;
        series.final_state = levels.back();
        for (std::size_t i = 0; i < periods.size(); ++i) {
            series.years.push_back(periods[i].year);
            series.entering.push_back(levels[i]);
        }
        map.series_.emplace(key, std::move(series));
    }
    return map;
}

double ScoreMap::entering(const std::string& customer, const std::string& product,
                          int year) const {
    auto it = series_.find({customer, product});
    if (it == series_.end()) return kNaN;
    const Series& s = it->second;
    if (s.years.empty() || year <= s.years.front()) return s.initial;
    if (year > s.years.back()) return s.final_state;
    // The score is frozen across coverage gaps, so the level entering `year`
    // equals the level entering the next observed year.
    const auto pos = std::lower_bound(s.years.begin(), s.years.end(), year) - s.years.begin();
    return s.entering[static_cast<std::size_t>(pos)];
}

bool ScoreMap::has(const std::string& customer, const std::string& product) const {
    return series_.count({customer, product}) > 0;
}

DesignBuilder::DesignBuilder(const Portfolio& reference, ModelSpec spec)
    : spec_(std::move(spec)), schema_(reference.schema) {
    spec_.validate(schema_);

    // Categorical codings from the reference portfolio, labels sorted so the
    // reference level is deterministic.
    const auto& covariates = schema_.product(spec_.product).covariates;
    for (const auto& cov : covariates) {
        if (cov.kind != CovariateKind::Categorical) continue;
        std::set<std::string> labels;
        for (const auto& rec : reference.records) {
            if (rec.product != spec_.product) continue;
            auto it = rec.covariates.find(cov.name);
            if (it == rec.covariates.end())
                throw std::invalid_argument("DesignBuilder: record missing covariate '" +
                                            cov.name + "'");
            labels.insert(std::get<std::string>(it->second));
        }
        if (labels.empty())
            throw std::invalid_argument("DesignBuilder: no data for covariate '" + cov.name + "'");
        codings_.push_back({cov.name, {labels.begin(), labels.end()}});
    }

    covariate_terms_.push_back("Constant");
    for (const auto& cov : covariates) {
        if (cov.kind == CovariateKind::Continuous) {
            covariate_terms_.push_back(cov.name);
        } else {
            const auto& coding = *std::find_if(codings_.begin(), codings_.end(),
                                               [&](const auto& c) { return c.covariate == cov.name; });
            for (std::size_t l = 1; l < coding.levels.size(); ++l)
                covariate_terms_.push_back(cov.name + ":" + coding.levels[l]);
        }
    }
    covariate_cols_ = static_cast<int>(covariate_terms_.size());

    // Constrained spline bases per scored product, on [1, s] anchored at the
    // entry level.
    if (spec_.score_effect == ScoreEffect::CubicSpline ||
        spec_.score_effect == ScoreEffect::PiecewiseLinearSpline) {
        const int degree = spec_.score_effect == ScoreEffect::CubicSpline ? 3 : 1;
        for (const auto& name : scored_products()) {
            const auto& cfg = spec_.score_configs.at(name);
            SplineBasis basis = SplineBasis::clamped(degree, spec_.spline_k, 1.0,
                                                     static_cast<double>(cfg.max_level));
            bases_.emplace(name, ConstrainedBasis(std::move(basis),
                                                  static_cast<double>(cfg.entry_level)));
        }
    }
}

std::vector<std::string> DesignBuilder::scored_products() const {
    if (spec_.structure == ModelStructure::Static) return {};
    if (spec_.structure == ModelStructure::OneProduct) return {spec_.product};
    // Own product first, then the others in schema order.
    std::vector<std::string> out = {spec_.product};
    for (const auto& p : schema_.products)
        if (p.name != spec_.product) out.push_back(p.name);
    return out;
}

Eigen::VectorXd DesignBuilder::covariate_row(const PolicyRecord& rec) const {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(covariate_cols_);
    row[0] = 1.0;
    int col = 1;
    for (const auto& cov : schema_.product(spec_.product).covariates) {
        auto it = rec.covariates.find(cov.name);
        if (it == rec.covariates.end())
            throw std::invalid_argument("design: record missing covariate '" + cov.name + "'");
        if (cov.kind == CovariateKind::Continuous) {
            row[col++] = std::get<double>(it->second);
        } else {
            const auto& coding = *std::find_if(codings_.begin(), codings_.end(),
                                               [&](const auto& c) { return c.covariate == cov.name; });
            const auto& label = std::get<std::string>(it->second);
            const auto pos = std::find(coding.levels.begin(), coding.levels.end(), label);
            if (pos == coding.levels.end())
                throw std::invalid_argument("design: unseen level '" + label +
                                            "' for covariate '" + cov.name + "'");
            const auto level = pos - coding.levels.begin();
            if (level > 0) row[col + static_cast<int>(level) - 1] = 1.0;
            col += static_cast<int>(coding.levels.size()) - 1;
        }
    }
    return row;
}

DesignMatrix DesignBuilder::frequency_design(const Portfolio& data,
                                             const ScoreMap& scores) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < data.records.size(); ++i)
        if (data.records[i].product == spec_.product) rows.push_back(i);

    const auto products = scored_products();
    int score_cols = 0;
    std::vector<ScoreBlockInfo> blocks;
    for (const auto& name : products) {
        ScoreBlockInfo block;
        block.product = name;
        block.col_start = covariate_cols_ + score_cols;
        block.effect = spec_.score_effect;
        block.config = spec_.score_configs.at(name);
        block.num_cols = spec_.score_effect == ScoreEffect::LinearInScore
                             ? 1
                             : bases_.at(name).size();
        if (spec_.score_effect != ScoreEffect::LinearInScore) block.basis = bases_.at(name);
        score_cols += block.num_cols;
        blocks.push_back(std::move(block));
    }

    DesignMatrix design;
    design.terms = covariate_terms_;
    for (const auto& block : blocks) {
        if (block.effect == ScoreEffect::LinearInScore) {
            design.terms.push_back("score(" + block.product + ")");
        } else {
            for (int j = 1; j <= block.num_cols; ++j)
                design.terms.push_back("score(" + block.product + "):g" + std::to_string(j));
        }
    }

    const int p = covariate_cols_ + score_cols;
    const auto n = static_cast<Eigen::Index>(rows.size());
    design.x.resize(n, p);
    design.response.resize(n);
    design.weight.resize(n);
    design.offset.resize(n);
    design.exposure.resize(n);
    design.record_rows = rows;

    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& rec = data.records[rows[static_cast<std::size_t>(r)]];
        design.x.row(r).head(covariate_cols_) = covariate_row(rec);
        for (const auto& block : blocks) {
            const double level = scores.entering(rec.customer_id, block.product,
                                                 rec.calendar_year);
            auto segment = design.x.row(r).segment(block.col_start, block.num_cols);
            if (std::isnan(level)) {
                segment.setZero();  // unknown product: no a posteriori information
            } else if (block.effect == ScoreEffect::LinearInScore) {
                segment[0] = level - static_cast<double>(block.config.entry_level);
            } else {
                segment = block.basis->evaluate(level).transpose();
            }
        }
        design.response[r] = static_cast<double>(rec.claim_count);
        design.weight[r] = 1.0;
        design.offset[r] = std::log(rec.exposure);
        design.exposure[r] = rec.exposure;
    }

    design.score_blocks = blocks;
    for (const auto& block : blocks) {
        if (block.effect == ScoreEffect::LinearInScore) continue;
        design.penalties.push_back({block.col_start, block.basis->penalty_matrix()});
    }
    return design;
}

DesignMatrix DesignBuilder::severity_design(const Portfolio& data) const {
    // Average severity given a claim: only claiming records, weight = count.
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < data.records.size(); ++i) {
        const auto& rec = data.records[i];
        if (rec.product == spec_.product && rec.claim_count > 0) rows.push_back(i);
    }

    DesignMatrix design;
    design.terms = covariate_terms_;
    const auto n = static_cast<Eigen::Index>(rows.size());
    design.x.resize(n, covariate_cols_);
    design.response.resize(n);
    design.weight.resize(n);
    design.offset = Eigen::VectorXd::Zero(n);
    design.exposure.resize(n);
    design.record_rows = rows;

    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& rec = data.records[rows[static_cast<std::size_t>(r)]];
        design.x.row(r) = covariate_row(rec).transpose();
        design.response[r] = rec.claim_total / rec.claim_count;
        design.weight[r] = static_cast<double>(rec.claim_count);
        design.exposure[r] = rec.exposure;
    }
    return design;
}

}  // namespace claimscore
