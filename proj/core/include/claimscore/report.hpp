#pragma once

// CSV report emitters mirroring the paper-style tables: per-model
// coefficient tables with significance stars and a dispersion row, the grid
// search evaluation log and summary, the benchmark-by-alternative Gini
// matrix with mini-max ranks, and the likelihood-ratio test table. Each
// table is written twice: rounded to four decimals for reading and at full
// precision in a parallel *_full.csv.

#include "claimscore/gini.hpp"
#include "claimscore/model.hpp"
#include "claimscore/optimizer.hpp"
#include "claimscore/portfolio.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace claimscore::report {

// "", "*", "**", "***" at the 5% / 1% / 0.1% levels.
std::string significance_stars(double p_value);

// Cell-level table that renders at a configurable precision.
class Table {
public:
    explicit Table(std::vector<std::string> header);

    Table& begin_row();
    Table& cell(const std::string& value);
    Table& cell(double value);
    Table& cell(long value);

    // Writes path and the *_full.csv twin next to it.
    void write(const std::filesystem::path& path) const;

private:
    struct Cell {
        bool numeric = false;
        double number = 0.0;
        std::string text;
    };

    void write_one(const std::filesystem::path& path, int precision) const;

    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

// component,term,estimate,std_error,significance with one dispersion row
// per component (frequency and severity).
Table fit_report(const ModelPair& pair);

// config_psi,config_s,config_l0,feasible,gini,gini_se,fit_iterations,loglik
// with the winning row flagged.
Table search_report(const SearchResult& result);

// Benchmark x alternative ratio Gini matrix in percentages.
Table gini_matrix_report(const std::vector<std::string>& model_names,
                         const Eigen::MatrixXd& gini, const Eigen::MatrixXd& std_errors);

// Row maxima with standard errors, ranks and the mini-max selection flag.
Table minimax_report(const std::vector<std::string>& model_names,
                     const Eigen::MatrixXd& gini, const Eigen::MatrixXd& std_errors);

struct LrRow {
    std::string null_model;
    std::string alt_model;
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

Table lr_report(const std::vector<LrRow>& rows);

// Ownership / claims overlap cross-tab in the shape of the descriptive
// portfolio tables.
Table overlap_table(const OverlapReport& report);

}  // namespace claimscore::report
