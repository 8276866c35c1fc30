#pragma once

// Small self-contained special functions used for p-values and test
// diagnostics: regularized incomplete gamma, chi-squared upper tails,
// normal tails and the Kolmogorov-Smirnov asymptotic distribution.

#include <vector>

namespace claimscore::stats {

// Regularized lower incomplete gamma P(a, x) and upper Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Upper-tail probability of a chi-squared variate with dof degrees of freedom.
double chi_squared_upper_tail(double x, double dof);

// Two-sided normal p-value for a z statistic.
double normal_two_sided_p(double z);

// Kolmogorov-Smirnov statistic of a sample against U[0, 1] and the asymptotic
// p-value Q_KS((sqrt(n) + 0.12 + 0.11/sqrt(n)) * D).
double ks_statistic_uniform(std::vector<double> sample);
double ks_pvalue(double statistic, std::size_t n);

}  // namespace claimscore::stats
