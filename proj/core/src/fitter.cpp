#include "claimscore/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace claimscore {

namespace {

constexpr double kMuFloor = 1e-12;
constexpr double kMuCeil = 1e12;

Eigen::VectorXd fitted_means(const Eigen::VectorXd& delta, const DesignMatrix& design) {
    Eigen::VectorXd eta = design.offset + design.x * delta;
    // Clamp after the inverse link so v(mu) = mu^3 cannot overflow.
    return eta.array().exp().min(kMuCeil).max(kMuFloor);
}

void apply_penalty_gradient(const DesignMatrix& design, const std::vector<double>& lambdas,
                            const Eigen::VectorXd& delta, Eigen::VectorXd& gradient) {
    for (std::size_t j = 0; j < design.penalties.size(); ++j) {
        if (lambdas[j] == 0.0) continue;
        const auto& block = design.penalties[j];
        const auto size = block.matrix.rows();
        gradient.segment(block.col_start, size).noalias() -=
            lambdas[j] * (block.matrix * delta.segment(block.col_start, size));
    }
}

}  // namespace

std::vector<double> resolve_penalties(const DesignMatrix& design, const FitSettings& settings) {
    const std::size_t m = design.penalties.size();
    if (settings.penalties.empty()) return std::vector<double>(m, 0.0);
    if (settings.penalties.size() == 1) return std::vector<double>(m, settings.penalties[0]);
    if (settings.penalties.size() != m)
        throw std::invalid_argument("FitSettings: penalty count does not match the smooths");
    return settings.penalties;
}

double log_likelihood(const Eigen::VectorXd& delta, const DesignMatrix& design,
                      const Family& family) {
    const Eigen::VectorXd mu = fitted_means(delta, design);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
        if (design.weight[i] <= 0.0) continue;
        ll += family.log_density(design.response[i], mu[i], 1.0, design.weight[i]);
    }
    return ll;
}

double penalized_log_likelihood(const Eigen::VectorXd& delta, const DesignMatrix& design,
                                const Family& family, const std::vector<double>& lambdas) {
    double penalty = 0.0;
    for (std::size_t j = 0; j < design.penalties.size(); ++j) {
        if (lambdas[j] == 0.0) continue;
        const auto& block = design.penalties[j];
        const auto size = block.matrix.rows();
        const Eigen::VectorXd gamma = delta.segment(block.col_start, size);
        penalty += lambdas[j] * gamma.dot(block.matrix * gamma);
    }
    return log_likelihood(delta, design, family) - 0.5 * penalty;
}

Eigen::VectorXd score_vector(const Eigen::VectorXd& delta, const DesignMatrix& design,
                             const Family& family, const std::vector<double>& lambdas) {
    if (delta.size() != design.cols())
        throw std::invalid_argument("score_vector: coefficient size mismatch");
    if (lambdas.size() != design.penalties.size())
        throw std::invalid_argument("score_vector: penalty size mismatch");
    const Eigen::VectorXd mu = fitted_means(delta, design);
    // Log link: 1 / g'(mu) = mu, so u_i = w (y - mu) mu / v(mu).
    Eigen::VectorXd u(design.rows());
    for (Eigen::Index i = 0; i < design.rows(); ++i)
        u[i] = design.weight[i] * (design.response[i] - mu[i]) * mu[i] /
               family.variance(mu[i]);
    Eigen::VectorXd gradient = design.x.transpose() * u;
    apply_penalty_gradient(design, lambdas, delta, gradient);
    return gradient;
}

Eigen::MatrixXd fisher_information(const Eigen::VectorXd& delta, const DesignMatrix& design,
                                   const Family& family, const std::vector<double>& lambdas) {
    if (delta.size() != design.cols())
        throw std::invalid_argument("fisher_information: coefficient size mismatch");
    if (lambdas.size() != design.penalties.size())
        throw std::invalid_argument("fisher_information: penalty size mismatch");
    const Eigen::VectorXd mu = fitted_means(delta, design);
    // Log link: w / (v(mu) g'(mu)^2) = w mu^2 / v(mu).
    Eigen::VectorXd w(design.rows());
    for (Eigen::Index i = 0; i < design.rows(); ++i)
        w[i] = design.weight[i] * mu[i] * mu[i] / family.variance(mu[i]);
    Eigen::MatrixXd info = design.x.transpose() * w.asDiagonal() * design.x;
    for (std::size_t j = 0; j < design.penalties.size(); ++j) {
        if (lambdas[j] == 0.0) continue;
        const auto& block = design.penalties[j];
        const auto size = block.matrix.rows();
        info.block(block.col_start, block.col_start, size, size) += lambdas[j] * block.matrix;
    }
    return info;
}

Eigen::VectorXd starting_values(const DesignMatrix& design, const Family& family) {
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(design.cols());
    const double wsum = design.weight.sum();
    const double mean = wsum > 0.0 ? design.weight.dot(design.response) / wsum : 0.0;
    Link link;
    delta[0] = link.g(std::max(mean, 1e-6));
    return delta;
}

namespace {

struct IrlsResult {
    Eigen::VectorXd delta;
    double penalized_loglik = 0.0;
    FitDiagnostics diagnostics;
};

// Power-of-two column scales near the RMS column norms. Iterating in the
// rescaled basis keeps the information matrix well conditioned, and since
// the scales are powers of two the back-transform to the raw basis is exact.
std::vector<double> column_scales(const DesignMatrix& design) {
    std::vector<double> scales(static_cast<std::size_t>(design.cols()), 1.0);
    const double n = static_cast<double>(design.rows());
    for (Eigen::Index j = 0; j < design.cols(); ++j) {
        const double rms = std::sqrt(design.x.col(j).squaredNorm() / n);
        if (rms > 0.0)
            scales[static_cast<std::size_t>(j)] =
                std::clamp(std::exp2(std::round(std::log2(rms))), 0x1p-8, 0x1p20);
    }
    return scales;
}

DesignMatrix rescale_design(const DesignMatrix& design, const std::vector<double>& scales) {
    DesignMatrix scaled = design;
    for (Eigen::Index j = 0; j < design.cols(); ++j)
        scaled.x.col(j) /= scales[static_cast<std::size_t>(j)];
    for (auto& block : scaled.penalties)
        for (Eigen::Index a = 0; a < block.matrix.rows(); ++a)
            for (Eigen::Index b = 0; b < block.matrix.cols(); ++b)
                block.matrix(a, b) /= scales[static_cast<std::size_t>(block.col_start + a)] *
                                      scales[static_cast<std::size_t>(block.col_start + b)];
    return scaled;
}

// IRLS in the rescaled basis; `scales` maps the internal gradient back to
// the raw basis, on which the convergence tolerance is defined.
IrlsResult run_irls(const DesignMatrix& design, const Family& family,
                    const FitSettings& settings, const std::vector<double>& lambdas,
                    const std::vector<double>& scales, Eigen::VectorXd delta) {
    auto raw_gradient_norm = [&](const Eigen::VectorXd& gradient) {
        double norm = 0.0;
        for (Eigen::Index j = 0; j < gradient.size(); ++j)
            norm = std::max(norm,
                            std::fabs(gradient[j]) * scales[static_cast<std::size_t>(j)]);
        return norm;
    };

    IrlsResult result;
    double lp = penalized_log_likelihood(delta, design, family, lambdas);
    double gnorm = raw_gradient_norm(score_vector(delta, design, family, lambdas));
    result.diagnostics.lp_trace.push_back(lp);

    int iter = 0;
    for (; iter < settings.max_iterations; ++iter) {
        if (gnorm < settings.gradient_tolerance) break;
        const Eigen::VectorXd gradient = score_vector(delta, design, family, lambdas);
        Eigen::MatrixXd info = fisher_information(delta, design, family, lambdas);

        Eigen::VectorXd direction;
        for (int attempt = 0;; ++attempt) {
            Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
            direction = ldlt.solve(gradient);
            if (ldlt.info() == Eigen::Success && direction.allFinite()) break;
            if (attempt >= 3)
                throw ConvergenceError("fit_pirls: information matrix is numerically singular",
                                       delta, gnorm, iter);
            const double ridge = std::max(settings.ridge_guard, 1e-10) *
                                 std::pow(10.0, attempt) *
                                 std::max(1.0, info.diagonal().maxCoeff());
            info.diagonal().array() += ridge;
        }

        // Step halving: never accept a measurable decrease of the penalized
        // objective. Near the optimum the true per-step gain drops below the
        // resolution of the objective itself (a few ulps of |lp|); such
        // indistinguishable steps are accepted only when they shrink the
        // gradient, which stays measurable down to the tolerance.
        const double lp_resolution =
            16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(lp));
        double scale = 1.0;
        bool accepted = false;
        for (int h = 0; h <= settings.step_halving_max; ++h) {
            const Eigen::VectorXd candidate = delta + scale * direction;
            const double lp_candidate =
                penalized_log_likelihood(candidate, design, family, lambdas);
            if (std::isfinite(lp_candidate)) {
                bool take = lp_candidate >= lp;
                double gnorm_candidate = -1.0;
                if (!take && lp_candidate >= lp - lp_resolution) {
                    gnorm_candidate = raw_gradient_norm(
                        score_vector(candidate, design, family, lambdas));
                    take = gnorm_candidate < gnorm;
                }
                if (take) {
                    delta = candidate;
                    lp = std::max(lp, lp_candidate);
                    gnorm = gnorm_candidate >= 0.0
                                ? gnorm_candidate
                                : raw_gradient_norm(
                                      score_vector(delta, design, family, lambdas));
                    accepted = true;
                    result.diagnostics.step_halvings += h;
                    break;
                }
            }
            scale *= 0.5;
        }
        result.diagnostics.lp_trace.push_back(lp);
        if (!accepted) {
            ++iter;
            break;  // numerically flat; convergence is judged on the gradient
        }
    }

    result.delta = std::move(delta);
    result.penalized_loglik = lp;
    result.diagnostics.iterations = iter;
    result.diagnostics.gradient_norm = gnorm;
    result.diagnostics.converged = gnorm < settings.gradient_tolerance;
    if (!result.diagnostics.converged)
        throw ConvergenceError("fit_pirls: no convergence after " + std::to_string(iter) +
                                   " iterations (gradient max-norm " + std::to_string(gnorm) + ")",
                               result.delta, gnorm, iter);
    return result;
}

// One-dimensional golden-section maximization of the NB log-likelihood over
// log(size) in [-10, 10], at fixed coefficients.
double profile_nb_size(const Eigen::VectorXd& delta, const DesignMatrix& design, double size) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = -10.0, hi = 10.0;
    auto value = [&](double t) {
        return log_likelihood(delta, design, Family::negative_binomial(std::exp(t)));
    };
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = value(x1);
    double f2 = value(x2);
    for (int i = 0; i < 80 && hi - lo > 1e-8; ++i) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = value(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = value(x1);
        }
    }
    const double t = 0.5 * (lo + hi);
    // Keep the old size if the profile is flat at the optimum.
    return value(t) >= value(std::log(size)) ? std::exp(t) : size;
}

}  // namespace

FittedModel fit_pirls(const DesignMatrix& design, const Family& family,
                      const FitSettings& settings) {
    if (design.rows() == 0) throw std::invalid_argument("fit_pirls: empty design");
    if (design.rows() < design.cols())
        throw std::invalid_argument("fit_pirls: fewer observations than coefficients");
    const std::vector<double> lambdas = resolve_penalties(design, settings);

    // Up-front rank check of the penalized information at the start values;
    // a dependent column cannot be identified by the data or the penalty.
    Eigen::VectorXd delta = settings.initial_coefficients
                                ? *settings.initial_coefficients
                                : starting_values(design, family);
    if (delta.size() != design.cols())
        throw std::invalid_argument("fit_pirls: initial coefficient size mismatch");
    {
        const Eigen::MatrixXd info = fisher_information(delta, design, family, lambdas);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(info);
        qr.setThreshold(1e-10);
        if (qr.rank() < design.cols()) {
            const int column = qr.colsPermutation().indices()(qr.rank());
            throw RankError("fit_pirls: design column " + std::to_string(column) + " ('" +
                                design.terms[column] + "') is not identifiable",
                            column, design.terms[column]);
        }
    }

    Family working = family;
    if (working.kind() == FamilyKind::NegativeBinomial && settings.profile_nb_size)
        working = working.with_nb_size(1.0);

    const std::vector<double> scales = column_scales(design);
    const DesignMatrix scaled = rescale_design(design, scales);
    for (Eigen::Index j = 0; j < delta.size(); ++j)
        delta[j] *= scales[static_cast<std::size_t>(j)];

    IrlsResult irls = run_irls(scaled, working, settings, lambdas, scales, delta);
    int profile_rounds = 0;
    if (working.kind() == FamilyKind::NegativeBinomial && settings.profile_nb_size) {
        for (; profile_rounds < 50; ++profile_rounds) {
            const double size = working.nb_size();
            const double next = profile_nb_size(irls.delta, scaled, size);
            if (std::fabs(std::log(next) - std::log(size)) < 1e-6) break;
            working = working.with_nb_size(next);
            irls = run_irls(scaled, working, settings, lambdas, scales, irls.delta);
        }
    }

    FittedModel fit;
    fit.family = working;
    fit.coefficients = irls.delta;
    for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j)
        fit.coefficients[j] /= scales[static_cast<std::size_t>(j)];
    fit.diagnostics = irls.diagnostics;
    fit.diagnostics.nb_profile_rounds = profile_rounds;
    fit.penalized_loglik = irls.penalized_loglik;
    fit.terms = design.terms;
    fit.score_blocks = design.score_blocks;
    fit.num_observations = design.rows();
    if (working.kind() == FamilyKind::NegativeBinomial) fit.nb_size = working.nb_size();

    const Eigen::VectorXd mu = fitted_means(fit.coefficients, design);
    fit.dispersion = estimate_dispersion(working, design.response, mu, design.weight,
                                         static_cast<int>(design.cols()),
                                         &fit.dispersion_degenerate);

    fit.information = fisher_information(fit.coefficients, design, working, lambdas);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(fit.information);
    Eigen::MatrixXd inverse =
        ldlt.solve(Eigen::MatrixXd::Identity(design.cols(), design.cols()));
    // Count families keep unit dispersion for inference (NB overdispersion
    // lives in the profiled size); severity families scale by Pearson.
    fit.covariance = working.is_count() ? inverse : fit.dispersion * inverse;

    // Reported log-likelihood uses the estimated dispersion for severity
    // families; the iteration itself always runs at phi = 1.
    if (working.is_count()) {
        fit.loglik = log_likelihood(fit.coefficients, design, working);
    } else {
        const double phi = std::max(fit.dispersion, 1e-12);
        double ll = 0.0;
        for (Eigen::Index i = 0; i < design.rows(); ++i) {
            if (design.weight[i] <= 0.0) continue;
            ll += working.log_density(design.response[i], mu[i], phi, design.weight[i]);
        }
        fit.loglik = ll;
    }
    return fit;
}

}  // namespace claimscore
