#pragma once

// Penalized maximum likelihood via Fisher scoring (penalized IRLS). The
// update solves the penalized information system for the penalized score;
// step halving guards every iteration so the penalized log-likelihood never
// decreases, and convergence is declared on the max-norm of the score.

#include "claimscore/design.hpp"
#include "claimscore/family.hpp"

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace claimscore {

struct FitSettings {
    int max_iterations = 100;
    double gradient_tolerance = 1e-8;  // max-norm of the penalized score
    int step_halving_max = 30;
    std::vector<double> penalties;  // per smooth; empty = all zero, one value broadcasts
    double ridge_guard = 1e-10;     // diagonal fallback for singular systems
    bool profile_nb_size = true;    // outer golden-section over log(size)
    std::optional<Eigen::VectorXd> initial_coefficients;  // warm start
};

struct FitDiagnostics {
    int iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
    int step_halvings = 0;
    int nb_profile_rounds = 0;
    std::vector<double> lp_trace;  // penalized objective after each accepted step
};

struct FittedModel {
    Family family = Family::poisson();
    Eigen::VectorXd coefficients;
    double dispersion = 1.0;
    bool dispersion_degenerate = false;
    double nb_size = 0.0;  // profiled NB auxiliary parameter; 0 otherwise
    double loglik = 0.0;
    double penalized_loglik = 0.0;
    Eigen::MatrixXd information;  // penalized Fisher information at the optimum
    Eigen::MatrixXd covariance;   // dispersion-scaled inverse information
    std::vector<std::string> terms;
    std::vector<ScoreBlockInfo> score_blocks;
    FitDiagnostics diagnostics;
    Eigen::Index num_observations = 0;

    double std_error(Eigen::Index i) const { return std::sqrt(covariance(i, i)); }
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, Eigen::VectorXd last, double grad_norm,
                     int iterations)
        : std::runtime_error(what),
          last_coefficients(std::move(last)),
          gradient_norm(grad_norm),
          iterations(iterations) {}

    Eigen::VectorXd last_coefficients;
    double gradient_norm;
    int iterations;
};

class RankError : public std::runtime_error {
public:
    RankError(const std::string& what, int column, std::string term)
        : std::runtime_error(what), column(column), term(std::move(term)) {}

    int column;
    std::string term;
};

// Resolved per-smooth penalties for a design under the settings.
std::vector<double> resolve_penalties(const DesignMatrix& design, const FitSettings& settings);

// Unpenalized log-likelihood at delta (phi enters only through the severity
// normalizing terms, so it is fixed at 1 during iteration).
double log_likelihood(const Eigen::VectorXd& delta, const DesignMatrix& design,
                      const Family& family);

// Penalized log-likelihood: log-likelihood minus half the penalty quadratic.
double penalized_log_likelihood(const Eigen::VectorXd& delta, const DesignMatrix& design,
                                const Family& family, const std::vector<double>& lambdas);

// Gradient of the penalized log-likelihood (phi factored out):
// sum w (y - mu) / (v(mu) g'(mu)) x - sum lambda_j S_j delta.
Eigen::VectorXd score_vector(const Eigen::VectorXd& delta, const DesignMatrix& design,
                             const Family& family, const std::vector<double>& lambdas);

// Penalized Fisher information sum w / (v(mu) g'(mu)^2) x x' + sum lambda_j S_j.
Eigen::MatrixXd fisher_information(const Eigen::VectorXd& delta, const DesignMatrix& design,
                                   const Family& family, const std::vector<double>& lambdas);

// Intercept at the link of the weighted mean response (floored at 1e-6),
// all other coefficients zero.
Eigen::VectorXd starting_values(const DesignMatrix& design, const Family& family);

FittedModel fit_pirls(const DesignMatrix& design, const Family& family,
                      const FitSettings& settings = {});

}  // namespace claimscore
