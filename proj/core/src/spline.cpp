#include "claimscore/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace claimscore {

namespace {

constexpr double kDomainTol = 1e-9;

// Nodes/weights of the n-point Gauss-Legendre rule on [-1, 1], n <= 4;
// enough for products of piecewise polynomials up to degree 7.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    switch (n) {
        case 1:
            nodes = {0.0};
            weights = {2.0};
            return;
        case 2:
            nodes = {-0.5773502691896257, 0.5773502691896257};
            weights = {1.0, 1.0};
            return;
        case 3:
            nodes = {-0.7745966692414834, 0.0, 0.7745966692414834};
            weights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
            return;
        case 4:
            nodes = {-0.8611363115940526, -0.3399810435848563,
                     0.3399810435848563, 0.8611363115940526};
            weights = {0.3478548451374538, 0.6521451548625461,
                       0.6521451548625461, 0.3478548451374538};
            return;
        default:
            throw std::logic_error("gauss_legendre: unsupported order");
    }
}

}  // namespace

SplineBasis::SplineBasis(int degree, std::vector<double> knots)
    : degree_(degree),
      num_params_(static_cast<int>(knots.size()) - degree - 1),
      knots_(std::move(knots)) {
    if (degree_ < 0) throw std::invalid_argument("SplineBasis: degree must be nonnegative");
    if (num_params_ < degree_ + 1)
        throw std::invalid_argument("SplineBasis: too few knots for the degree");
    for (std::size_t i = 1; i < knots_.size(); ++i)
        if (knots_[i] < knots_[i - 1])
            throw std::invalid_argument("SplineBasis: knots must be nondecreasing");
    if (!(x_min() < x_max()))
        throw std::invalid_argument("SplineBasis: empty domain");
}

SplineBasis SplineBasis::clamped(int degree, int num_params, double x_min, double x_max) {
    if (num_params < degree + 1)
        throw std::invalid_argument("SplineBasis::clamped: need at least degree+1 parameters");
    if (!(x_min < x_max))
        throw std::invalid_argument("SplineBasis::clamped: empty domain");
    // num_params - degree - 1 interior knots, equally spaced between the
    // repeated boundary knots.
    const int interior = num_params - degree - 1;
    std::vector<double> knots;
    knots.reserve(num_params + degree + 1);
    for (int i = 0; i <= degree; ++i) knots.push_back(x_min);
    for (int i = 1; i <= interior; ++i)
        knots.push_back(x_min + (x_max - x_min) * i / (interior + 1));
    for (int i = 0; i <= degree; ++i) knots.push_back(x_max);
    return SplineBasis(degree, std::move(knots));
}

int SplineBasis::find_span(double x) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    int j = static_cast<int>(it - knots_.begin()) - 1;
    return std::clamp(j, degree_, num_params_ - 1);
}

Eigen::VectorXd SplineBasis::values_impl(double x, int order) const {
    const int k = num_params_;
    const int d = degree_;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(k);
    if (order > d) return out;  // derivative beyond the polynomial degree

    // Degree-0 indicators: one active span, closed at the right boundary.
    const int span = find_span(x);
    const int base_degree = d - order;
    const int n0 = k + d;  // number of degree-0 functions
    std::vector<double> cur(n0, 0.0);
    cur[span] = 1.0;

    // Cox-de Boor up to base_degree; 0/0 terms are defined as 0.
    for (int deg = 1; deg <= base_degree; ++deg) {
        const int count = n0 - deg;
        std::vector<double> next(count, 0.0);
        for (int h = 0; h < count; ++h) {
            double v = 0.0;
            const double den1 = knots_[h + deg] - knots_[h];
            if (den1 > 0.0 && cur[h] != 0.0) v += (x - knots_[h]) / den1 * cur[h];
            const double den2 = knots_[h + deg + 1] - knots_[h + 1];
            if (den2 > 0.0 && cur[h + 1] != 0.0)
                v += (knots_[h + deg + 1] - x) / den2 * cur[h + 1];
            next[h] = v;
        }
        cur.swap(next);
    }

    // Derivative steps: D B_{h,deg} = deg * (B_{h,deg-1}/(t_{h+deg}-t_h)
    //                                 - B_{h+1,deg-1}/(t_{h+deg+1}-t_{h+1})).
    for (int deg = base_degree + 1; deg <= d; ++deg) {
        const int count = n0 - deg;
        std::vector<double> next(count, 0.0);
        for (int h = 0; h < count; ++h) {
            double v = 0.0;
            const double den1 = knots_[h + deg] - knots_[h];
            if (den1 > 0.0 && cur[h] != 0.0) v += cur[h] / den1;
            const double den2 = knots_[h + deg + 1] - knots_[h + 1];
            if (den2 > 0.0 && cur[h + 1] != 0.0) v -= cur[h + 1] / den2;
            next[h] = deg * v;
        }
        cur.swap(next);
    }

    for (int h = 0; h < k; ++h) out[h] = cur[h];
    return out;
}

Eigen::VectorXd SplineBasis::evaluate(double x) const {
    if (x < x_min() - kDomainTol || x > x_max() + kDomainTol)
        throw std::domain_error("SplineBasis::evaluate: x outside basis domain");
    return values_impl(std::clamp(x, x_min(), x_max()), 0);
}

Eigen::VectorXd SplineBasis::derivative(double x, int order) const {
    if (order < 0) throw std::invalid_argument("SplineBasis::derivative: negative order");
    if (x < x_min() - kDomainTol || x > x_max() + kDomainTol)
        throw std::domain_error("SplineBasis::derivative: x outside basis domain");
    return values_impl(std::clamp(x, x_min(), x_max()), order);
}

Eigen::MatrixXd SplineBasis::penalty_matrix() const {
    const int k = num_params_;
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(k, k);
    if (degree_ < 2) return s;  // second derivative vanishes a.e.

    // B'' is piecewise polynomial of degree d-2, so the product has degree
    // 2(d-2); an n-point rule is exact for degree 2n-1.
    const int points = std::max(1, degree_ - 1);
    std::vector<double> nodes, weights;
    gauss_legendre(points, nodes, weights);

    for (int j = degree_; j < num_params_; ++j) {
        const double a = knots_[j];
        const double b = knots_[j + 1];
        if (!(b > a)) continue;
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        for (std::size_t q = 0; q < nodes.size(); ++q) {
            const double x = mid + half * nodes[q];
            const Eigen::VectorXd d2 = values_impl(x, 2);
            s.noalias() += (weights[q] * half) * (d2 * d2.transpose());
        }
    }
    return s;
}

ConstrainedBasis::ConstrainedBasis(SplineBasis base, double anchor)
    : base_(std::move(base)), anchor_(anchor) {
    const Eigen::VectorXd row = base_.evaluate(anchor);
    if (row.norm() < 1e-14)
        throw std::invalid_argument("ConstrainedBasis: basis vanishes at the anchor");
    // Householder QR of the anchor row; columns 2..k of Q span its
    // orthogonal complement.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(row);
    const Eigen::MatrixXd q = qr.householderQ();
    transform_ = q.rightCols(base_.size() - 1);
}

Eigen::VectorXd ConstrainedBasis::evaluate(double x) const {
    return transform_.transpose() * base_.evaluate(x);
}

Eigen::MatrixXd ConstrainedBasis::penalty_matrix() const {
    return transform_.transpose() * base_.penalty_matrix() * transform_;
}

}  // namespace claimscore
