#include "lbphy/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lbphy {

double QuadratureRule::weight_sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

QuadratureRule quadrature_nodes(QuadKind kind, int order, double alpha) {
    if (order < 2 || order > 256)
        throw std::invalid_argument("quadrature_nodes: order must be in [2, 256]");
    if (kind == QuadKind::GaussLaguerre && !(alpha > -1.0))
        throw std::invalid_argument("quadrature_nodes: Laguerre needs alpha > -1");

    Eigen::VectorXd diag(order), sub(order - 1);
    double mu0; // integral of the weight function
    if (kind == QuadKind::GaussHermite) {
        diag.setZero();
        for (int k = 1; k < order; ++k) sub[k - 1] = std::sqrt(0.5 * k);
        mu0 = std::sqrt(std::numbers::pi);
        alpha = 0.0;
    } else {
        for (int k = 0; k < order; ++k) diag[k] = 2.0 * k + alpha + 1.0;
        for (int k = 1; k < order; ++k) sub[k - 1] = std::sqrt(k * (k + alpha));
        mu0 = std::tgamma(alpha + 1.0);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("quadrature_nodes: eigen decomposition failed");

    QuadratureRule rule;
    rule.kind = kind;
    rule.alpha = alpha;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int k = 0; k < order; ++k) {
        const double node = es.eigenvalues()[k]; // ascending
        rule.nodes[k] = node;
        // weight from the orthonormal-polynomial recurrence: w = mu0 / sum p_j(x)^2.
        // The dense eigenvector's first component has only absolute accuracy,
        // which wrecks the tiny weights at extreme nodes; this form keeps
        // relative accuracy. long double absorbs the sum's huge dynamic range.
        long double p_prev = 0.0L, p = 1.0L, sum = 1.0L;
        for (int j = 1; j < order; ++j) {
            const long double p_next =
                ((static_cast<long double>(node) - diag[j - 1]) * p - sub[j - 2 >= 0 ? j - 2 : 0] *
                 (j >= 2 ? p_prev : 0.0L)) / sub[j - 1];
            p_prev = p;
            p = p_next;
            sum += p * p;
        }
        rule.weights[k] = static_cast<double>(mu0 / sum);
    }
    // Hermite rules are symmetric; tidy tiny asymmetry from the eigensolver.
    if (kind == QuadKind::GaussHermite) {
        for (int k = 0; k < order / 2; ++k) {
            const int j = order - 1 - k;
            const double n = 0.5 * (rule.nodes[j] - rule.nodes[k]);
            rule.nodes[k] = -n;
            rule.nodes[j] = n;
            const double w = 0.5 * (rule.weights[k] + rule.weights[j]);
            rule.weights[k] = rule.weights[j] = w;
        }
        if (order % 2) rule.nodes[order / 2] = 0.0;
    }
    return rule;
}

} // namespace lbphy
