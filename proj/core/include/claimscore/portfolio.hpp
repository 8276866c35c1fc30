#pragma once

// Longitudinal portfolio data model: one record per customer, product,
// calendar year (and spell, when risk characteristics changed mid-year),
// plus calendar-year aggregation, the product-ownership/claim overlap
// cross-tab and the train/test split on the last calendar year.

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace claimscore {

// Raw covariate value; the schema decides how it enters the design.
using CovariateValue = std::variant<double, std::string>;

enum class CovariateKind { Categorical, Continuous };

struct CovariateSpec {
    std::string name;
    CovariateKind kind = CovariateKind::Categorical;
};

struct ProductSchema {
    std::string name;
    std::vector<CovariateSpec> covariates;
};

// The product order defines the product indices used throughout.
struct Schema {
    std::vector<ProductSchema> products;

    int product_index(const std::string& name) const;  // -1 when unknown
    const ProductSchema& product(const std::string& name) const;
};

struct PolicyRecord {
    std::string customer_id;
    std::string product;
    int calendar_year = 0;
    int spell = 0;  // distinguishes same-year spells with different covariates
    double exposure = 0.0;
    int claim_count = 0;
    double claim_total = 0.0;
    std::map<std::string, CovariateValue> covariates;

    void validate() const;
};

struct Portfolio {
    Schema schema;
    std::vector<PolicyRecord> records;

    std::vector<std::string> product_names() const;
    std::vector<int> calendar_years() const;  // sorted distinct years
};

// Merges same customer-product-year spells with identical covariates
// (exposures, counts and totals add); spells with differing covariates stay
// separate and receive distinct spell indices. Idempotent.
Portfolio aggregate_policy_years(const Portfolio& raw);

// Ownership / claims cross-tab per product, split by how many products the
// customer holds in total. with_other_claim counts the claims filed by
// customers who also claimed on at least one other owned product.
struct OverlapRow {
    std::string product;
    std::vector<long> holders_by_count;           // index k-1: exactly k products
    std::vector<long> claims_by_count;            // claims split the same way
    std::vector<long> with_other_claim_by_count;  // parenthesized figures
    long total_holders = 0;
    long total_claims = 0;
    long total_with_other_claim = 0;
};

struct OverlapReport {
    std::vector<OverlapRow> rows;  // one per product, schema order
};

OverlapReport overlap_report(const Portfolio& portfolio);

// Last calendar year becomes the test set, everything earlier the training
// set. Requires at least two distinct years.
struct TrainTestSplit {
    Portfolio train;
    Portfolio test;
    int test_year = 0;
};

TrainTestSplit train_test_split(const Portfolio& portfolio);

}  // namespace claimscore
