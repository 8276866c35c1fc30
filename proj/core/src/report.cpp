#include "claimscore/report.hpp"

#include "claimscore/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace claimscore::report {

std::string significance_stars(double p_value) {
    if (p_value <= 0.001) return "***";
    if (p_value <= 0.01) return "**";
    if (p_value <= 0.05) return "*";
    return "";
}

Table::Table(std::vector<std::string> header) : header_(std::move(header)) {}

Table& Table::begin_row() {
    rows_.emplace_back();
    return *this;
}

Table& Table::cell(const std::string& value) {
    rows_.back().push_back({false, 0.0, value});
    return *this;
}

Table& Table::cell(double value) {
    rows_.back().push_back({true, value, {}});
    return *this;
}

Table& Table::cell(long value) {
    rows_.back().push_back({false, 0.0, std::to_string(value)});
    return *this;
}

void Table::write_one(const std::filesystem::path& path, int precision) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report file " + path.string());
    for (std::size_t i = 0; i < header_.size(); ++i)
        out << (i ? "," : "") << header_[i];
    out << '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            const auto& c = row[i];
            if (!c.numeric) {
                out << c.text;
            } else if (std::isnan(c.number)) {
                // empty field
            } else if (precision > 0) {
                std::ostringstream os;
                os.setf(std::ios::fixed);
                os.precision(precision);
                os << c.number;
                out << os.str();
            } else {
                std::ostringstream os;
                os.precision(17);
                os << c.number;
                out << os.str();
            }
        }
        out << '\n';
    }
}

void Table::write(const std::filesystem::path& path) const {
    write_one(path, 4);
    std::filesystem::path full = path;
    full.replace_extension("");
    full += "_full.csv";
    write_one(full, 0);
}

namespace {

void append_component(Table& table, const std::string& component, const FittedModel& fit) {
    for (Eigen::Index i = 0; i < fit.coefficients.size(); ++i) {
        const double estimate = fit.coefficients[i];
        const double se = fit.std_error(i);
        const double p = stats::normal_two_sided_p(se > 0.0 ? estimate / se : 0.0);
        table.begin_row()
            .cell(component)
            .cell(fit.terms[i])
            .cell(estimate)
            .cell(se)
            .cell(significance_stars(p));
    }
    table.begin_row()
        .cell(component)
        .cell(std::string("Dispersion"))
        .cell(fit.dispersion)
        .cell(std::numeric_limits<double>::quiet_NaN())
        .cell(std::string());
    if (fit.family.kind() == FamilyKind::NegativeBinomial)
        table.begin_row()
            .cell(component)
            .cell(std::string("NB size"))
            .cell(fit.nb_size)
            .cell(std::numeric_limits<double>::quiet_NaN())
            .cell(std::string());
}

}  // namespace

Table fit_report(const ModelPair& pair) {
    Table table({"component", "term", "estimate", "std_error", "significance"});
    append_component(table, "frequency", pair.frequency);
    append_component(table, "severity", pair.severity);
    return table;
}

Table search_report(const SearchResult& result) {
    Table table({"config_psi", "config_s", "config_l0", "feasible", "gini", "gini_se",
                 "fit_iterations", "loglik", "best"});
    for (const auto& eval : result.evaluations) {
        const bool best = eval.feasible && !std::isnan(eval.gini) &&
                          eval.config.jump == result.best_config.jump &&
                          eval.config.max_level == result.best_config.max_level &&
                          eval.config.entry_level == result.best_config.entry_level &&
                          eval.gini == result.best_gini;
        table.begin_row()
            .cell(static_cast<long>(eval.config.jump))
            .cell(static_cast<long>(eval.config.max_level))
            .cell(static_cast<long>(eval.config.entry_level))
            .cell(std::string(eval.feasible ? "true" : "false"))
            .cell(eval.gini)
            .cell(eval.gini_se)
            .cell(static_cast<long>(eval.fit_iterations))
            .cell(eval.loglik)
            .cell(std::string(best ? "*" : ""));
    }
    return table;
}

Table gini_matrix_report(const std::vector<std::string>& model_names,
                         const Eigen::MatrixXd& gini, const Eigen::MatrixXd& std_errors) {
    std::vector<std::string> header = {"benchmark"};
    for (const auto& name : model_names) header.push_back(name);
    for (const auto& name : model_names) header.push_back("se:" + name);
    Table table(std::move(header));
    for (Eigen::Index i = 0; i < gini.rows(); ++i) {
        table.begin_row().cell(model_names[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < gini.cols(); ++j) table.cell(100.0 * gini(i, j));
        for (Eigen::Index j = 0; j < gini.cols(); ++j) table.cell(100.0 * std_errors(i, j));
    }
    return table;
}

Table minimax_report(const std::vector<std::string>& model_names,
                     const Eigen::MatrixXd& gini, const Eigen::MatrixXd& std_errors) {
    const auto maxima = row_maxima(gini);
    const int selected = minimax_select(maxima);

    // Rank 1 = smallest row maximum; ties resolve by benchmark order.
    std::vector<std::size_t> order(maxima.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return maxima[a] < maxima[b]; });
    std::vector<int> rank(maxima.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        rank[order[pos]] = static_cast<int>(pos) + 1;

    Table table({"benchmark", "coefficient", "std_error", "rank", "minimax"});
    for (std::size_t i = 0; i < model_names.size(); ++i) {
        // Standard error of the maximal entry in the row.
        double se = std::numeric_limits<double>::quiet_NaN();
        for (Eigen::Index j = 0; j < gini.cols(); ++j) {
            if (static_cast<Eigen::Index>(i) == j) continue;
            if (gini(static_cast<Eigen::Index>(i), j) == maxima[i])
                se = std_errors(static_cast<Eigen::Index>(i), j);
        }
        table.begin_row()
            .cell(model_names[i])
            .cell(100.0 * maxima[i])
            .cell(100.0 * se)
            .cell(static_cast<long>(rank[i]))
            .cell(std::string(static_cast<int>(i) == selected ? "*" : ""));
    }
    return table;
}

Table lr_report(const std::vector<LrRow>& rows) {
    Table table({"null_model", "alt_model", "statistic", "dof", "p_value", "significance"});
    for (const auto& row : rows)
        table.begin_row()
            .cell(row.null_model)
            .cell(row.alt_model)
            .cell(row.statistic)
            .cell(static_cast<long>(row.dof))
            .cell(row.p_value)
            .cell(significance_stars(row.p_value));
    return table;
}

Table overlap_table(const OverlapReport& report) {
    std::vector<std::string> header = {"product", "measure"};
    const std::size_t c = report.rows.empty() ? 0 : report.rows[0].holders_by_count.size();
    for (std::size_t k = 1; k <= c; ++k) header.push_back("exactly_" + std::to_string(k));
    header.push_back("total");
    Table table(std::move(header));
    for (const auto& row : report.rows) {
        table.begin_row().cell(row.product).cell(std::string("holders"));
        for (const auto v : row.holders_by_count) table.cell(v);
        table.cell(row.total_holders);

        table.begin_row().cell(row.product).cell(std::string("holders_pct"));
        for (const auto v : row.holders_by_count)
            table.cell(row.total_holders > 0 ? 100.0 * v / row.total_holders : 0.0);
        table.cell(100.0);

        table.begin_row().cell(row.product).cell(std::string("claims"));
        for (const auto v : row.claims_by_count) table.cell(v);
        table.cell(row.total_claims);

        table.begin_row().cell(row.product).cell(std::string("claims_with_other_claim"));
        for (const auto v : row.with_other_claim_by_count) table.cell(v);
        table.cell(row.total_with_other_claim);
    }
    return table;
}

}  // namespace claimscore::report
