#pragma once

#include <string>
#include <vector>

namespace lbphy {

enum class QuadKind { GaussHermite, GaussLaguerre };

/// Nodes and weights of a Gaussian quadrature rule. Immutable once built;
/// safe to share across threads.
///
/// GaussHermite: weight e^{-x^2} on (-inf, inf), physicists' convention.
/// GaussLaguerre: weight x^alpha e^{-x} on (0, inf), generalized.
struct QuadratureRule {
    QuadKind kind;
    double alpha = 0.0; // Laguerre parameter; ignored for Hermite
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t order() const { return nodes.size(); }
    double weight_sum() const;
};

/// Golub-Welsch: nodes/weights from the symmetric tridiagonal Jacobi matrix.
/// order in [2, 256]; for Laguerre, alpha > -1.
QuadratureRule quadrature_nodes(QuadKind kind, int order, double alpha = 0.0);

inline QuadratureRule gauss_hermite(int order) {
    return quadrature_nodes(QuadKind::GaussHermite, order);
}
inline QuadratureRule gauss_laguerre(int order, double alpha) {
    return quadrature_nodes(QuadKind::GaussLaguerre, order, alpha);
}

} // namespace lbphy
