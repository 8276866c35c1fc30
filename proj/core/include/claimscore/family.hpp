#pragma once

// Exponential-dispersion families used for claim frequency (Poisson,
// Negative Binomial) and claim severity (Gamma, Inverse-Gaussian), all on
// the log-link scale. Each family supplies its variance function, exact
// log-density, unit deviance and canonical-parameter maps.

#include <Eigen/Dense>

#include <string>

namespace claimscore {

enum class FamilyKind { Poisson, NegativeBinomial, Gamma, InverseGaussian };

class Family {
public:
    static Family poisson();
    static Family negative_binomial(double size);
    static Family gamma();
    static Family inverse_gaussian();

    FamilyKind kind() const { return kind_; }
    std::string name() const;

    // Count families model claim frequencies; the others model severities.
    bool is_count() const {
        return kind_ == FamilyKind::Poisson || kind_ == FamilyKind::NegativeBinomial;
    }

    // NB2 auxiliary parameter; variance is mu + mu^2/size.
    double nb_size() const;
    Family with_nb_size(double size) const;

    // v(mu) = A''(theta(mu)); mu > 0 required.
    double variance(double mu) const;

    // Exact log of the density/mass at y with mean mu, dispersion phi and
    // weight w. Severity families use the weighted forms that are exact for
    // an average of w i.i.d. claims; count families scale the natural-
    // parameter core by w (exact at w = 1) and admit non-integer y as the
    // continuous lgamma extension.
    double log_density(double y, double mu, double phi, double w) const;

    // Unit deviance contribution; nonnegative, zero iff y == mu.
    double deviance(double y, double mu, double w) const;

    // Canonical parameter theta(mu) and the inverse mean mapping A'(theta).
    double theta(double mu) const;
    double mean_from_theta(double theta) const;

private:
    Family(FamilyKind kind, double nb_size) : kind_(kind), nb_size_(nb_size) {}

    FamilyKind kind_;
    double nb_size_;
};

// Link descriptor; only the logarithmic link is used, but the shape leaves
// room for alternatives.
struct Link {
    enum class Kind { Log } kind = Kind::Log;

    double g(double mu) const { return std::log(mu); }
    double g_inverse(double eta) const { return std::exp(eta); }
    double g_prime(double mu) const { return 1.0 / mu; }
};

// Pearson (moment) dispersion estimate sum w (y - mu)^2 / v(mu) over the
// residual degrees of freedom; Poisson returns 1 by convention. Throws when
// no residual degrees of freedom remain. A zero-residual fit is reported as
// 0 with *degenerate set when provided.
double estimate_dispersion(const Family& family,
                           const Eigen::VectorXd& y,
                           const Eigen::VectorXd& mu,
                           const Eigen::VectorXd& w,
                           int model_dof,
                           bool* degenerate = nullptr);

}  // namespace claimscore
