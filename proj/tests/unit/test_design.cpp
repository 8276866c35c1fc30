#include "claimscore/design.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace claimscore;

namespace {

std::map<std::string, ClaimScoreConfig> default_configs() {
    return {{"alpha", {2, 5, 2}}, {"beta", {2, 5, 2}}};
}

}  // namespace

TEST_CASE("abbreviations resolve to the right structure") {
    const auto configs = default_configs();
    const ModelSpec glm = spec_from_abbreviation("GLM-PG", "alpha", {});
    CHECK(glm.structure == ModelStructure::Static);
    CHECK(glm.score_effect == ScoreEffect::None);
    CHECK(glm.frequency_family.kind() == FamilyKind::Poisson);
    CHECK(glm.severity_family.kind() == FamilyKind::Gamma);

    const ModelSpec nbig = spec_from_abbreviation("GLM-NBIG-One", "alpha", configs);
    CHECK(nbig.structure == ModelStructure::OneProduct);
    CHECK(nbig.score_effect == ScoreEffect::LinearInScore);
    CHECK(nbig.frequency_family.kind() == FamilyKind::NegativeBinomial);
    CHECK(nbig.severity_family.kind() == FamilyKind::InverseGaussian);

    const ModelSpec gam = spec_from_abbreviation("GAM-PIG-Multi", "alpha", configs);
    CHECK(gam.structure == ModelStructure::MultiProduct);
    CHECK(gam.score_effect == ScoreEffect::CubicSpline);
    CHECK(gam.severity_family.kind() == FamilyKind::InverseGaussian);

    const ModelSpec pl = spec_from_abbreviation("GAM-NBG-Multi-PL", "alpha", configs);
    CHECK(pl.score_effect == ScoreEffect::PiecewiseLinearSpline);

    CHECK_THROWS(spec_from_abbreviation("GAM-PG", "alpha", configs));      // static GAM
    CHECK_THROWS(spec_from_abbreviation("GLM-PG-Multi-PL", "alpha", configs));
    CHECK_THROWS(spec_from_abbreviation("FOO-PG-One", "alpha", configs));

    CHECK(model_catalog().size() == 24);
}

TEST_CASE("score map follows trajectories and freezes across gaps") {
    const Portfolio p = test_util::two_product_portfolio();
    const ScoreMap scores = ScoreMap::compute(p, default_configs());

    // c2 on alpha: claim-free 2015 (e=1), 2016 (e=0.5): 2 -> 3 -> 3.5.
    CHECK(scores.entering("c2", "alpha", 2015) == doctest::Approx(2.0));
    CHECK(scores.entering("c2", "alpha", 2016) == doctest::Approx(3.0));
    CHECK(scores.entering("c2", "alpha", 2017) == doctest::Approx(3.5));
    // Beyond the last observed year: the state after 2017.
    CHECK(scores.entering("c2", "alpha", 2018) == doctest::Approx(4.5));
    // Before the first observed year: the initial level.
    CHECK(scores.entering("c2", "alpha", 2014) == doctest::Approx(2.0));

    // c1 on alpha claims in 2015: 2 -> 1 -> 2.
    CHECK(scores.entering("c1", "alpha", 2016) == doctest::Approx(1.0));
    CHECK(scores.entering("c1", "alpha", 2017) == doctest::Approx(2.0));

    // c2 never holds beta.
    CHECK(std::isnan(scores.entering("c2", "beta", 2016)));
    CHECK_FALSE(scores.has("c2", "beta"));
}

TEST_CASE("score map freezes over a missing coverage year") {
    Portfolio p;
    p.schema = test_util::two_product_schema();
    p.records.push_back(test_util::record("c1", "alpha", 2015, 1.0, 0, 0.0, "a"));
    // 2016 missing entirely.
    p.records.push_back(test_util::record("c1", "alpha", 2017, 1.0, 0, 0.0, "a"));
    const ScoreMap scores = ScoreMap::compute(p, default_configs());
    CHECK(scores.entering("c1", "alpha", 2015) == doctest::Approx(2.0));
    CHECK(scores.entering("c1", "alpha", 2016) == doctest::Approx(3.0));  // frozen
    CHECK(scores.entering("c1", "alpha", 2017) == doctest::Approx(3.0));
    CHECK(scores.entering("c1", "alpha", 2018) == doctest::Approx(4.0));
}

TEST_CASE("score map uses pre-sample history for initialization") {
    const Portfolio p = test_util::two_product_portfolio();
    HistoryMap history;
    history[{"c2", "alpha"}] = {{2012, 1.0, 0}, {2013, 1.0, 0}, {2014, 1.0, 0}};
    const ScoreMap scores = ScoreMap::compute(p, default_configs(), &history);
    CHECK(scores.entering("c2", "alpha", 2015) == doctest::Approx(5.0));  // 2 +1+1+1
}

TEST_CASE("static design has the covariate block only") {
    const Portfolio p = test_util::two_product_portfolio();
    const ModelSpec spec = spec_from_abbreviation("GLM-PG", "alpha", {});
    DesignBuilder builder(p, spec);
    const ScoreMap scores;
    const DesignMatrix d = builder.frequency_design(p, scores);

    // Intercept + one dummy for the two-level categorical.
    CHECK(d.cols() == 2);
    CHECK(d.terms[0] == "Constant");
    CHECK(d.terms[1] == "group:b");
    CHECK(d.rows() == 8);  // alpha records
    CHECK(d.score_blocks.empty());
    CHECK(d.penalties.empty());

    // Offset is the log exposure; c2's half-year 2016 record.
    bool found = false;
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
        const auto& rec = p.records[d.record_rows[r]];
        CHECK(d.offset[r] == doctest::Approx(std::log(rec.exposure)));
        CHECK(d.weight[r] == doctest::Approx(1.0));
        CHECK(d.response[r] == doctest::Approx(rec.claim_count));
        if (rec.customer_id == "c2" && rec.calendar_year == 2016) found = true;
    }
    CHECK(found);
}

TEST_CASE("multi-product cubic design appends (k-1) columns per product") {
    const Portfolio p = test_util::two_product_portfolio();
    const ModelSpec spec = spec_from_abbreviation("GAM-PG-Multi", "alpha", default_configs());
    DesignBuilder builder(p, spec);
    const ScoreMap scores = ScoreMap::compute(p, spec.score_configs);
    const DesignMatrix d = builder.frequency_design(p, scores);

    // 2 covariate columns + 2 products x (k - 1 = 3) score columns.
    CHECK(d.cols() == 2 + 2 * 3);
    REQUIRE(d.score_blocks.size() == 2);
    CHECK(d.score_blocks[0].product == "alpha");  // own product first
    CHECK(d.score_blocks[1].product == "beta");
    CHECK(d.score_blocks[0].num_cols == 3);
    CHECK(d.penalties.size() == 2);

    // c2 never holds beta: its beta block rows are exactly zero.
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
        const auto& rec = p.records[d.record_rows[r]];
        if (rec.customer_id != "c2") continue;
        CHECK(d.x.row(r).segment(d.score_blocks[1].col_start, 3).norm() == 0.0);
    }
}

TEST_CASE("one-product design uses only the own product's score") {
    const Portfolio p = test_util::two_product_portfolio();
    const ModelSpec spec = spec_from_abbreviation("GAM-PG-One", "beta", default_configs());
    DesignBuilder builder(p, spec);
    const ScoreMap scores = ScoreMap::compute(p, spec.score_configs);
    const DesignMatrix d = builder.frequency_design(p, scores);
    REQUIRE(d.score_blocks.size() == 1);
    CHECK(d.score_blocks[0].product == "beta");
    CHECK(d.cols() == 2 + 3);
}

TEST_CASE("linear score term is centered at the entry level") {
    const Portfolio p = test_util::two_product_portfolio();
    const ModelSpec spec = spec_from_abbreviation("GLM-PG-One", "alpha", default_configs());
    DesignBuilder builder(p, spec);
    const ScoreMap scores = ScoreMap::compute(p, spec.score_configs);
    const DesignMatrix d = builder.frequency_design(p, scores);
    REQUIRE(d.score_blocks.size() == 1);
    CHECK(d.score_blocks[0].num_cols == 1);

    const int col = d.score_blocks[0].col_start;
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
        const auto& rec = p.records[d.record_rows[r]];
        const double level = scores.entering(rec.customer_id, "alpha", rec.calendar_year);
        CHECK(d.x(r, col) == doctest::Approx(level - 2.0));
    }
}

TEST_CASE("spline rows at the entry level are zero") {
    const Portfolio p = test_util::two_product_portfolio();
    const ModelSpec spec = spec_from_abbreviation("GAM-PG-One", "alpha", default_configs());
    DesignBuilder builder(p, spec);
    const ScoreMap scores = ScoreMap::compute(p, spec.score_configs);
    const DesignMatrix d = builder.frequency_design(p, scores);
    const auto& block = d.score_blocks[0];
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
        const auto& rec = p.records[d.record_rows[r]];
        const double level = scores.entering(rec.customer_id, "alpha", rec.calendar_year);
        if (level == 2.0)
            CHECK(d.x.row(r).segment(block.col_start, block.num_cols).norm() < 1e-12);
    }
}

TEST_CASE("severity design keeps claiming rows with count weights") {
    const Portfolio p = test_util::two_product_portfolio();
    const ModelSpec spec = spec_from_abbreviation("GLM-PG", "alpha", {});
    DesignBuilder builder(p, spec);
    const DesignMatrix d = builder.severity_design(p);
    CHECK(d.rows() == 3);  // c1 2015 (1 claim), c1 2017 (2 claims), c3 2017 (1 claim)
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
        const auto& rec = p.records[d.record_rows[r]];
        CHECK(rec.claim_count > 0);
        CHECK(d.weight[r] == doctest::Approx(rec.claim_count));
        CHECK(d.response[r] == doctest::Approx(rec.claim_total / rec.claim_count));
        CHECK(d.offset[r] == 0.0);
    }
}

TEST_CASE("spec validation flags missing configs") {
    const Schema schema = test_util::two_product_schema();
    ModelSpec spec = spec_from_abbreviation("GAM-PG-Multi", "alpha", {{"alpha", {2, 5, 2}}});
    CHECK_THROWS_AS(spec.validate(schema), std::invalid_argument);
    spec.score_configs["beta"] = {2, 5, 2};
    CHECK_NOTHROW(spec.validate(schema));

    ModelSpec broken = spec_from_abbreviation("GLM-PG", "alpha", {});
    broken.score_effect = ScoreEffect::CubicSpline;
    CHECK_THROWS_AS(broken.validate(schema), std::invalid_argument);
}

TEST_CASE("unseen categorical level is rejected") {
    const Portfolio p = test_util::two_product_portfolio();
    const ModelSpec spec = spec_from_abbreviation("GLM-PG", "alpha", {});
    DesignBuilder builder(p, spec);

    Portfolio unseen = p;
    unseen.records[0].covariates["group"] = std::string("zz");
    const ScoreMap scores;
    CHECK_THROWS_WITH_AS(builder.frequency_design(unseen, scores),
                         doctest::Contains("unseen level"), std::invalid_argument);
}
