#pragma once

// Ordered Lorenz curves and (ratio) Gini indices for comparing rate
// structures: policies are ordered by the alternative/benchmark premium
// relativity, cumulative benchmark-premium share goes on the x axis and
// cumulative loss share on the y axis. Includes the asymptotic standard
// error and the mini-max benchmark selection.

#include <Eigen/Dense>

#include <vector>

namespace claimscore {

struct LorenzCurve {
    // Coordinates over the distinct relativity values, prepended with (0, 0);
    // both sequences are nondecreasing and end at 1.
    std::vector<double> premium_share;
    std::vector<double> loss_share;
};

struct GiniResult {
    double gini = 0.0;
    double std_error = 0.0;
    bool degenerate = false;  // all policies identical: zero sampling variance
    LorenzCurve curve;
};

// R_j = premium_alt[j] / premium_bench[j]; benchmark premia must be positive.
Eigen::VectorXd relativities(const Eigen::VectorXd& premium_alt,
                             const Eigen::VectorXd& premium_bench);

// Policies with equal relativities enter the curve as one block.
LorenzCurve ordered_lorenz(const Eigen::VectorXd& premium_bench,
                           const Eigen::VectorXd& losses,
                           const Eigen::VectorXd& relativities);

// Trapezoidal Gini: 1 - sum (x_{j+1} - x_j)(y_{j+1} + y_j); positive when
// the curve sags below the diagonal.
double gini_index(const LorenzCurve& curve);

// Asymptotic standard error via the projection-based covariance estimator
// with plug-in moments; returns 0 and sets *degenerate when all policies
// are identical.
double gini_std_error(const Eigen::VectorXd& premium_bench, const Eigen::VectorXd& losses,
                      const Eigen::VectorXd& relativities, bool* degenerate = nullptr);

// Curve, point estimate and standard error in one pass.
GiniResult gini_compare(const Eigen::VectorXd& premium_bench, const Eigen::VectorXd& losses,
                        const Eigen::VectorXd& relativities);

// Row maxima of a benchmark x alternative Gini matrix, self-comparisons
// excluded.
std::vector<double> row_maxima(const Eigen::MatrixXd& gini_matrix);

// Mini-max selection: the benchmark whose worst-case Gini against all
// alternatives is smallest; ties break to the lowest index.
int minimax_select(const Eigen::MatrixXd& gini_matrix);
int minimax_select(const std::vector<double>& row_maxima);

}  // namespace claimscore
