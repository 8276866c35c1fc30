#pragma once

// CSV ingestion and persistence for portfolio records, the JSON covariate
// schema, and the pre-sample claims history used to initialize claim
// scores. Validation failures name the offending row and column.

#include "claimscore/claim_score.hpp"
#include "claimscore/portfolio.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace claimscore {

// Pre-sample experience per customer and product, time-ordered.
using HistoryMap = std::map<std::pair<std::string, std::string>, std::vector<PeriodExperience>>;

Schema load_schema(const std::filesystem::path& path);
void save_schema(const Schema& schema, const std::filesystem::path& path);

// Records CSV: customer_id,product,calendar_year,exposure,claim_count,
// claim_total, then one column per covariate named in the schema (union
// over products); covariates not in the record's product schema may be
// empty.
Portfolio load_csv(const std::filesystem::path& path, const Schema& schema);
void save_csv(const Portfolio& portfolio, const std::filesystem::path& path);

// History CSV: customer_id,product,year,exposure,claim_count.
HistoryMap load_history(const std::filesystem::path& path);
void save_history(const HistoryMap& history, const std::filesystem::path& path);

}  // namespace claimscore
