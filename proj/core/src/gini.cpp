#include "claimscore/gini.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace claimscore {

namespace {

void check_inputs(const Eigen::VectorXd& premium_bench, const Eigen::VectorXd& losses,
                  const Eigen::VectorXd& rel) {
    if (premium_bench.size() != losses.size() || premium_bench.size() != rel.size())
        throw std::invalid_argument("gini: input length mismatch");
    if (premium_bench.size() == 0) throw std::invalid_argument("gini: empty inputs");
    if ((losses.array() < 0.0).any())
        throw std::invalid_argument("gini: losses must be nonnegative");
    if (!(premium_bench.array() > 0.0).all())
        throw std::invalid_argument("gini: benchmark premia must be positive");
    if (!(losses.sum() > 0.0))
        throw std::invalid_argument("gini: all losses are zero (degenerate input)");
}

// Indices sorted by relativity; equal relativities stay adjacent.
std::vector<Eigen::Index> order_by_relativity(const Eigen::VectorXd& rel) {
    std::vector<Eigen::Index> order(rel.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return rel[a] < rel[b]; });
    return order;
}

}  // namespace

Eigen::VectorXd relativities(const Eigen::VectorXd& premium_alt,
                             const Eigen::VectorXd& premium_bench) {
    if (premium_alt.size() != premium_bench.size())
        throw std::invalid_argument("relativities: input length mismatch");
    if (!(premium_bench.array() > 0.0).all())
        throw std::domain_error("relativities: benchmark premia must be positive");
    return premium_alt.array() / premium_bench.array();
}

LorenzCurve ordered_lorenz(const Eigen::VectorXd& premium_bench,
                           const Eigen::VectorXd& losses,
                           const Eigen::VectorXd& rel) {
    check_inputs(premium_bench, losses, rel);
    const double premium_total = premium_bench.sum();
    const double loss_total = losses.sum();
    const auto order = order_by_relativity(rel);

    LorenzCurve curve;
    curve.premium_share.push_back(0.0);
    curve.loss_share.push_back(0.0);

    double premium_cum = 0.0;
    double loss_cum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        // All policies with this relativity enter together.
        const double r = rel[order[i]];
        while (i < order.size() && rel[order[i]] == r) {
            premium_cum += premium_bench[order[i]];
            loss_cum += losses[order[i]];
            ++i;
        }
        curve.premium_share.push_back(premium_cum / premium_total);
        curve.loss_share.push_back(loss_cum / loss_total);
    }
    curve.premium_share.back() = 1.0;
    curve.loss_share.back() = 1.0;
    return curve;
}

double gini_index(const LorenzCurve& curve) {
    if (curve.premium_share.size() < 2 ||
        curve.premium_share.size() != curve.loss_share.size())
        throw std::invalid_argument("gini_index: malformed curve");
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < curve.premium_share.size(); ++j)
        sum += (curve.premium_share[j + 1] - curve.premium_share[j]) *
               (curve.loss_share[j + 1] + curve.loss_share[j]);
    return 1.0 - sum;
}

double gini_std_error(const Eigen::VectorXd& premium_bench, const Eigen::VectorXd& losses,
                      const Eigen::VectorXd& rel, bool* degenerate) {
    check_inputs(premium_bench, losses, rel);
    if (degenerate) *degenerate = false;
    const auto h_count = premium_bench.size();
    if (h_count < 2) throw std::invalid_argument("gini_std_error: need at least two policies");
    const double n = static_cast<double>(h_count);

    // Empirical curve coordinates F_P(R_j), F_L(R_j) including the policy's
    // own tie group.
    const auto order = order_by_relativity(rel);
    const double premium_total = premium_bench.sum();
    const double loss_total = losses.sum();
    Eigen::VectorXd f_p(h_count), f_l(h_count);
    {
        double premium_cum = 0.0;
        double loss_cum = 0.0;
        std::size_t i = 0;
        while (i < order.size()) {
            const double r = rel[order[i]];
            std::size_t j = i;
            while (j < order.size() && rel[order[j]] == r) {
                premium_cum += premium_bench[order[j]];
                loss_cum += losses[order[j]];
                ++j;
            }
            for (std::size_t m = i; m < j; ++m) {
                f_p[order[m]] = premium_cum / premium_total;
                f_l[order[m]] = loss_cum / loss_total;
            }
            i = j;
        }
    }

    const double mu_l = losses.mean();
    const double mu_p = premium_bench.mean();
    Eigen::VectorXd h(h_count);
    for (Eigen::Index j = 0; j < h_count; ++j)
        h[j] = 0.5 * (mu_l * premium_bench[j] * f_l[j] + losses[j] * mu_p * (1.0 - f_p[j]));
    const double mu_h = h.mean();

    // Moment-based (1/H) covariances.
    auto cov = [n](const Eigen::VectorXd& a, double ma, const Eigen::VectorXd& b, double mb) {
        return ((a.array() - ma) * (b.array() - mb)).sum() / n;
    };
    const double s_h = cov(h, mu_h, h, mu_h);
    const double s_l = cov(losses, mu_l, losses, mu_l);
    const double s_p = cov(premium_bench, mu_p, premium_bench, mu_p);
    const double s_hl = cov(h, mu_h, losses, mu_l);
    const double s_hp = cov(h, mu_h, premium_bench, mu_p);
    const double s_lp = cov(losses, mu_l, premium_bench, mu_p);

    const double sigma =
        4.0 / (mu_l * mu_l * mu_p * mu_p) *
        (4.0 * s_h + mu_h * mu_h / (mu_l * mu_l) * s_l + mu_h * mu_h / (mu_p * mu_p) * s_p -
         4.0 * mu_h / mu_l * s_hl - 4.0 * mu_h / mu_p * s_hp +
         2.0 * mu_h * mu_h / (mu_l * mu_p) * s_lp);

    if (!(sigma > 1e-14)) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return std::sqrt(sigma / n);
}

GiniResult gini_compare(const Eigen::VectorXd& premium_bench, const Eigen::VectorXd& losses,
                        const Eigen::VectorXd& rel) {
    GiniResult result;
    result.curve = ordered_lorenz(premium_bench, losses, rel);
    result.gini = gini_index(result.curve);
    result.std_error = gini_std_error(premium_bench, losses, rel, &result.degenerate);
    return result;
}

std::vector<double> row_maxima(const Eigen::MatrixXd& gini_matrix) {
    if (gini_matrix.size() == 0) throw std::invalid_argument("row_maxima: empty matrix");
    std::vector<double> maxima(gini_matrix.rows(),
                               -std::numeric_limits<double>::infinity());
    for (Eigen::Index i = 0; i < gini_matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < gini_matrix.cols(); ++j) {
            if (i == j) continue;  // self-comparison
            maxima[i] = std::max(maxima[i], gini_matrix(i, j));
        }
    return maxima;
}

int minimax_select(const Eigen::MatrixXd& gini_matrix) {
    return minimax_select(row_maxima(gini_matrix));
}

int minimax_select(const std::vector<double>& maxima) {
    if (maxima.empty()) throw std::invalid_argument("minimax_select: no benchmarks");
    int best = 0;
    for (int i = 1; i < static_cast<int>(maxima.size()); ++i)
        if (maxima[i] < maxima[best]) best = i;
    return best;
}

}  // namespace claimscore
