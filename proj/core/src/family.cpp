#include "claimscore/family.hpp"

#include <cmath>
#include <stdexcept>

namespace claimscore {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_mu(double mu) {
    if (!(mu > 0.0)) throw std::domain_error("family: mean must be positive");
}

void check_phi_w(double phi, double w) {
    if (!(phi > 0.0)) throw std::domain_error("family: dispersion must be positive");
    if (!(w > 0.0)) throw std::domain_error("family: weight must be positive");
}

// y log(y / mu) with the y -> 0 limit.
double xlogy_ratio(double y, double mu) {
    return y > 0.0 ? y * std::log(y / mu) : 0.0;
}

}  // namespace

Family Family::poisson() { return Family(FamilyKind::Poisson, 0.0); }

Family Family::negative_binomial(double size) {
    if (!(size > 0.0)) throw std::domain_error("negative_binomial: size must be positive");
    return Family(FamilyKind::NegativeBinomial, size);
}

Family Family::gamma() { return Family(FamilyKind::Gamma, 0.0); }

Family Family::inverse_gaussian() { return Family(FamilyKind::InverseGaussian, 0.0); }

std::string Family::name() const {
    switch (kind_) {
        case FamilyKind::Poisson: return "Poisson";
        case FamilyKind::NegativeBinomial: return "NegativeBinomial";
        case FamilyKind::Gamma: return "Gamma";
        case FamilyKind::InverseGaussian: return "InverseGaussian";
    }
    return "";
}

double Family::nb_size() const {
    if (kind_ != FamilyKind::NegativeBinomial)
        throw std::logic_error("nb_size: family is not Negative Binomial");
    return nb_size_;
}

Family Family::with_nb_size(double size) const {
    if (kind_ != FamilyKind::NegativeBinomial)
        throw std::logic_error("with_nb_size: family is not Negative Binomial");
    return negative_binomial(size);
}

double Family::variance(double mu) const {
    check_mu(mu);
    switch (kind_) {
        case FamilyKind::Poisson: return mu;
        case FamilyKind::NegativeBinomial: return mu + mu * mu / nb_size_;
        case FamilyKind::Gamma: return mu * mu;
        case FamilyKind::InverseGaussian: return mu * mu * mu;
    }
    return 0.0;
}

double Family::log_density(double y, double mu, double phi, double w) const {
    check_mu(mu);
    check_phi_w(phi, w);
    switch (kind_) {
        case FamilyKind::Poisson: {
            if (y < 0.0) throw std::domain_error("Poisson: y must be nonnegative");
            return w * (y * std::log(mu) - mu) - std::lgamma(y + 1.0);
        }
        case FamilyKind::NegativeBinomial: {
            if (y < 0.0) throw std::domain_error("NegativeBinomial: y must be nonnegative");
            const double r = nb_size_;
            const double core = y * std::log(mu / (mu + r)) + r * std::log(r / (mu + r));
            const double norm = std::lgamma(y + r) - std::lgamma(r) - std::lgamma(y + 1.0);
            return w * core + norm;
        }
        case FamilyKind::Gamma: {
            if (!(y > 0.0)) throw std::domain_error("Gamma: y must be positive");
            // Average of w claims with shape 1/phi each: shape w/phi, mean mu.
            const double shape = w / phi;
            return shape * std::log(shape / mu) + (shape - 1.0) * std::log(y)
                   - shape * y / mu - std::lgamma(shape);
        }
        case FamilyKind::InverseGaussian: {
            if (!(y > 0.0)) throw std::domain_error("InverseGaussian: y must be positive");
            const double resid = y - mu;
            return 0.5 * (std::log(w) - std::log(2.0 * kPi * phi * y * y * y))
                   - w * resid * resid / (2.0 * phi * mu * mu * y);
        }
    }
    return 0.0;
}

double Family::deviance(double y, double mu, double w) const {
    check_mu(mu);
    if (!(w > 0.0)) throw std::domain_error("family: weight must be positive");
    switch (kind_) {
        case FamilyKind::Poisson: {
            if (y < 0.0) throw std::domain_error("Poisson: y must be nonnegative");
            return 2.0 * w * (xlogy_ratio(y, mu) - (y - mu));
        }
        case FamilyKind::NegativeBinomial: {
            if (y < 0.0) throw std::domain_error("NegativeBinomial: y must be nonnegative");
            const double r = nb_size_;
            return 2.0 * w * (xlogy_ratio(y, mu) - (y + r) * std::log((y + r) / (mu + r)));
        }
        case FamilyKind::Gamma: {
            if (!(y > 0.0)) throw std::domain_error("Gamma: y must be positive");
            return 2.0 * w * (-std::log(y / mu) + (y - mu) / mu);
        }
        case FamilyKind::InverseGaussian: {
            if (!(y > 0.0)) throw std::domain_error("InverseGaussian: y must be positive");
            const double resid = y - mu;
            return w * resid * resid / (mu * mu * y);
        }
    }
    return 0.0;
}

double Family::theta(double mu) const {
    check_mu(mu);
    switch (kind_) {
        case FamilyKind::Poisson: return std::log(mu);
        case FamilyKind::NegativeBinomial: return std::log(mu / (mu + nb_size_));
        case FamilyKind::Gamma: return -1.0 / mu;
        case FamilyKind::InverseGaussian: return -1.0 / (2.0 * mu * mu);
    }
    return 0.0;
}

double Family::mean_from_theta(double theta) const {
    switch (kind_) {
        case FamilyKind::Poisson: return std::exp(theta);
        case FamilyKind::NegativeBinomial: {
            if (!(theta < 0.0)) throw std::domain_error("NegativeBinomial: theta must be negative");
            const double e = std::exp(theta);
            return nb_size_ * e / (1.0 - e);
        }
        case FamilyKind::Gamma:
            if (!(theta < 0.0)) throw std::domain_error("Gamma: theta must be negative");
            return -1.0 / theta;
        case FamilyKind::InverseGaussian:
            if (!(theta < 0.0)) throw std::domain_error("InverseGaussian: theta must be negative");
            return 1.0 / std::sqrt(-2.0 * theta);
    }
    return 0.0;
}

double estimate_dispersion(const Family& family,
                           const Eigen::VectorXd& y,
                           const Eigen::VectorXd& mu,
                           const Eigen::VectorXd& w,
                           int model_dof,
                           bool* degenerate) {
    if (degenerate) *degenerate = false;
    if (family.kind() == FamilyKind::Poisson) return 1.0;
    const auto n = y.size();
    if (n != mu.size() || n != w.size())
        throw std::invalid_argument("estimate_dispersion: size mismatch");
    if (n <= model_dof)
        throw std::invalid_argument("estimate_dispersion: no residual degrees of freedom");
    double pearson = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double resid = y[i] - mu[i];
        pearson += w[i] * resid * resid / family.variance(mu[i]);
    }
    const double phi = pearson / static_cast<double>(n - model_dof);
    if (phi < 1e-12 && degenerate) *degenerate = true;
    return phi;
}

}  // namespace claimscore
