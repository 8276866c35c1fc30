#pragma once

// Model specification and design-matrix assembly for the four structural
// variants: static GLM, one-product and multi-product claim-score models,
// with linear, cubic-spline or piecewise-linear score effects. Frequency
// rows carry a log-exposure offset so the fitted mean is an expected count;
// severity rows are restricted to claiming records with the claim count as
// weight.

#include "claimscore/claim_score.hpp"
#include "claimscore/family.hpp"
#include "claimscore/portfolio.hpp"
#include "claimscore/portfolio_io.hpp"
#include "claimscore/spline.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace claimscore {

enum class ModelStructure { Static, OneProduct, MultiProduct };
enum class ScoreEffect { None, LinearInScore, CubicSpline, PiecewiseLinearSpline };

struct ModelSpec {
    std::string product;
    Family frequency_family = Family::poisson();
    Family severity_family = Family::gamma();
    ModelStructure structure = ModelStructure::Static;
    ScoreEffect score_effect = ScoreEffect::None;
    std::map<std::string, ClaimScoreConfig> score_configs;
    int spline_k = 4;
    std::string abbreviation;  // reporting label, e.g. "GAM-PG-One"

    // Checks structural consistency against a schema: Static implies no
    // score effect, OneProduct needs the own product's config, MultiProduct
    // a config per product.
    void validate(const Schema& schema) const;
};

// Resolves a paper-style abbreviation (GLM-PG, GAM-NBIG-Multi-PL, ...) into
// a spec for the given product. GLM variants use a single centered linear
// score term, GAM variants a cubic spline, and the -PL suffix swaps in the
// piecewise-linear spline.
ModelSpec spec_from_abbreviation(const std::string& abbreviation,
                                 const std::string& product,
                                 const std::map<std::string, ClaimScoreConfig>& score_configs,
                                 int spline_k = 4);

// The 24 canonical abbreviations in reporting order.
std::vector<std::string> model_catalog();

// Entering claim-score levels per customer, product and calendar year,
// computed once from the full observation span (plus optional pre-sample
// history) and shared by train and test designs.
class ScoreMap {
public:
    static ScoreMap compute(const Portfolio& portfolio,
                            const std::map<std::string, ClaimScoreConfig>& configs,
                            const HistoryMap* history = nullptr);

    // Score entering `year` for the pair; quiet NaN when the customer never
    // holds the product (the "unknown" convention).
    double entering(const std::string& customer, const std::string& product, int year) const;

    bool has(const std::string& customer, const std::string& product) const;

private:
    struct Series {
        std::vector<int> years;        // observed years, ascending
        std::vector<double> entering;  // score entering each observed year
        double initial = 0.0;
        double final_state = 0.0;
    };
    std::map<std::pair<std::string, std::string>, Series> series_;
};

// One smooth (or linear) score block inside a design; enough to evaluate
// relativities after fitting.
struct ScoreBlockInfo {
    std::string product;
    int col_start = 0;
    int num_cols = 0;
    ScoreEffect effect = ScoreEffect::None;
    ClaimScoreConfig config;
    std::optional<ConstrainedBasis> basis;  // spline effects only
};

struct PenaltyBlock {
    int col_start = 0;
    Eigen::MatrixXd matrix;  // dense block; padded with zeros conceptually
};

struct DesignMatrix {
    Eigen::MatrixXd x;
    Eigen::VectorXd response;
    Eigen::VectorXd weight;
    Eigen::VectorXd offset;
    Eigen::VectorXd exposure;  // per-row exposure, for reporting and feasibility
    std::vector<std::string> terms;
    std::vector<ScoreBlockInfo> score_blocks;
    std::vector<PenaltyBlock> penalties;
    std::vector<std::size_t> record_rows;  // indices into the source portfolio

    Eigen::Index rows() const { return x.rows(); }
    Eigen::Index cols() const { return x.cols(); }
};

// Builds design matrices for one spec. Categorical codings are fixed from
// the reference portfolio (lexicographically first label is the reference
// level), so train and test rows share columns.
class DesignBuilder {
public:
    DesignBuilder(const Portfolio& reference, ModelSpec spec);

    const ModelSpec& spec() const { return spec_; }

    DesignMatrix frequency_design(const Portfolio& data, const ScoreMap& scores) const;
    DesignMatrix severity_design(const Portfolio& data) const;

private:
    struct CategoricalCoding {
        std::string covariate;
        std::vector<std::string> levels;  // sorted; levels[0] is the reference
    };

    Eigen::VectorXd covariate_row(const PolicyRecord& rec) const;
    std::vector<std::string> scored_products() const;

    ModelSpec spec_;
    Schema schema_;
    std::vector<CategoricalCoding> codings_;  // one per categorical covariate
    std::vector<std::string> covariate_terms_;
    int covariate_cols_ = 0;
    std::map<std::string, ConstrainedBasis> bases_;  // per scored product
};

}  // namespace claimscore
