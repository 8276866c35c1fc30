#pragma once

// B-spline bases for claim-score smooths: Cox-de Boor evaluation with
// derivatives, the integrated squared second-derivative penalty, and the
// anchored reparameterization that pins the smooth to zero at the score
// entry level.

#include <Eigen/Dense>

#include <vector>

namespace claimscore {

class SplineBasis {
public:
    // knots must be nondecreasing with size() == num_params + degree + 1.
    SplineBasis(int degree, std::vector<double> knots);

    // Equally spaced knots over [x_min, x_max] with the boundary knots
    // repeated (open/clamped vector), so the basis interpolates at the ends.
    static SplineBasis clamped(int degree, int num_params, double x_min, double x_max);

    int degree() const { return degree_; }
    int size() const { return num_params_; }  // k
    const std::vector<double>& knots() const { return knots_; }

    // Interval on which the basis forms a partition of unity.
    double x_min() const { return knots_[degree_]; }
    double x_max() const { return knots_[num_params_]; }

    // All k basis values at x; entries are nonnegative and sum to one on the
    // domain. x may exceed the boundary by at most tol.
    Eigen::VectorXd evaluate(double x) const;

    // All k values of the order-th derivative at x (order >= 0).
    Eigen::VectorXd derivative(double x, int order) const;

    // S[a][b] = integral of B_a''(x) B_b''(x) over the domain, assembled
    // span by span with Gauss-Legendre quadrature exact for the integrand's
    // polynomial degree. Identically zero for degree < 2.
    Eigen::MatrixXd penalty_matrix() const;

private:
    int find_span(double x) const;
    Eigen::VectorXd values_impl(double x, int order) const;

    int degree_;
    int num_params_;
    std::vector<double> knots_;
};

// Reparameterized basis forcing f(anchor) = 0: evaluates the base basis
// through the orthonormal complement Z of the anchor row, leaving k - 1
// effective parameters.
class ConstrainedBasis {
public:
    ConstrainedBasis(SplineBasis base, double anchor);

    const SplineBasis& base() const { return base_; }
    double anchor() const { return anchor_; }
    int size() const { return static_cast<int>(transform_.cols()); }  // k - 1

    // Row of the constrained design at x: B(x)' Z, length k - 1.
    Eigen::VectorXd evaluate(double x) const;

    // Z' S Z with S the base penalty.
    Eigen::MatrixXd penalty_matrix() const;

    // k x (k - 1) full-rank transform; base coefficients are Z c.
    const Eigen::MatrixXd& transform() const { return transform_; }

private:
    SplineBasis base_;
    double anchor_;
    Eigen::MatrixXd transform_;
};

}  // namespace claimscore
