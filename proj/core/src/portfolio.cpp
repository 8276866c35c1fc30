#include "claimscore/portfolio.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace claimscore {

int Schema::product_index(const std::string& name) const {
    for (std::size_t i = 0; i < products.size(); ++i)
        if (products[i].name == name) return static_cast<int>(i);
    return -1;
}

const ProductSchema& Schema::product(const std::string& name) const {
    const int idx = product_index(name);
    if (idx < 0) throw std::invalid_argument("Schema: unknown product '" + name + "'");
    return products[idx];
}

void PolicyRecord::validate() const {
    if (customer_id.empty()) throw std::invalid_argument("PolicyRecord: empty customer_id");
    if (product.empty()) throw std::invalid_argument("PolicyRecord: empty product");
    if (!(exposure > 0.0)) throw std::invalid_argument("PolicyRecord: exposure must be positive");
    if (claim_count < 0) throw std::invalid_argument("PolicyRecord: negative claim_count");
    if (claim_total < 0.0) throw std::invalid_argument("PolicyRecord: negative claim_total");
    if (claim_total > 0.0 && claim_count == 0)
        throw std::invalid_argument("PolicyRecord: claim_total > 0 requires claim_count > 0");
}

std::vector<std::string> Portfolio::product_names() const {
    std::vector<std::string> names;
    names.reserve(schema.products.size());
    for (const auto& p : schema.products) names.push_back(p.name);
    return names;
}

std::vector<int> Portfolio::calendar_years() const {
    std::set<int> years;
    for (const auto& r : records) years.insert(r.calendar_year);
    return {years.begin(), years.end()};
}

Portfolio aggregate_policy_years(const Portfolio& raw) {
    // Group key: customer, product, year, full covariate map.
    using Key = std::tuple<std::string, std::string, int,
                           std::map<std::string, CovariateValue>>;
    std::map<Key, PolicyRecord> merged;
    for (const auto& r : raw.records) {
        Key key{r.customer_id, r.product, r.calendar_year, r.covariates};
        auto it = merged.find(key);
        if (it == merged.end()) {
            PolicyRecord copy = r;
            copy.spell = 0;
            merged.emplace(std::move(key), std::move(copy));
        } else {
            it->second.exposure += r.exposure;
            it->second.claim_count += r.claim_count;
            it->second.claim_total += r.claim_total;
        }
    }

    Portfolio out;
    out.schema = raw.schema;
    out.records.reserve(merged.size());
    for (auto& [key, rec] : merged) out.records.push_back(std::move(rec));

    // Deterministic order, then spell indices for same-year covariate splits.
    std::sort(out.records.begin(), out.records.end(), [](const auto& a, const auto& b) {
        return std::tie(a.customer_id, a.product, a.calendar_year, a.covariates) <
               std::tie(b.customer_id, b.product, b.calendar_year, b.covariates);
    });
    for (std::size_t i = 0; i < out.records.size(); ++i) {
        auto& rec = out.records[i];
        if (i > 0) {
            const auto& prev = out.records[i - 1];
            if (prev.customer_id == rec.customer_id && prev.product == rec.product &&
                prev.calendar_year == rec.calendar_year) {
                rec.spell = prev.spell + 1;
                continue;
            }
        }
        rec.spell = 0;
    }
    return out;
}

OverlapReport overlap_report(const Portfolio& portfolio) {
    const auto products = portfolio.product_names();
    const int c = static_cast<int>(products.size());

    // Per customer: owned products and whether each product saw a claim.
    struct CustomerInfo {
        std::set<std::string> owned;
        std::map<std::string, long> claims;  // per product, total claim count
    };
    std::map<std::string, CustomerInfo> customers;
    for (const auto& r : portfolio.records) {
        auto& info = customers[r.customer_id];
        info.owned.insert(r.product);
        info.claims[r.product] += r.claim_count;
    }

    OverlapReport report;
    for (const auto& product : products) {
        OverlapRow row;
        row.product = product;
        row.holders_by_count.assign(c, 0);
        row.claims_by_count.assign(c, 0);
        row.with_other_claim_by_count.assign(c, 0);
        for (const auto& [id, info] : customers) {
            if (!info.owned.count(product)) continue;
            const int k = static_cast<int>(info.owned.size());
            row.holders_by_count[k - 1] += 1;
            row.total_holders += 1;
            const long own_claims = info.claims.count(product) ? info.claims.at(product) : 0;
            if (own_claims == 0) continue;
            row.claims_by_count[k - 1] += own_claims;
            row.total_claims += own_claims;
            bool other = false;
            for (const auto& [p, n] : info.claims)
                if (p != product && n > 0) other = true;
            if (other) {
                row.with_other_claim_by_count[k - 1] += own_claims;
                row.total_with_other_claim += own_claims;
            }
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

TrainTestSplit train_test_split(const Portfolio& portfolio) {
    const auto years = portfolio.calendar_years();
    if (years.size() < 2)
        throw std::invalid_argument("train_test_split: need at least two calendar years");
    const int test_year = years.back();

    TrainTestSplit split;
    split.test_year = test_year;
    split.train.schema = portfolio.schema;
    split.test.schema = portfolio.schema;
    for (const auto& r : portfolio.records) {
        (r.calendar_year == test_year ? split.test : split.train).records.push_back(r);
    }
    return split;
}

}  // namespace claimscore
