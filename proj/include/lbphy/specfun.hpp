#pragma once

namespace lbphy::specfun {

/// Modified Bessel I_0(x), I_1(x) for x >= 0. Exponentially scaled variants
/// e^{-x} I_n(x) stay finite for any x.
double bessel_i0(double x);
double bessel_i1(double x);
double bessel_i0_scaled(double x);
double bessel_i1_scaled(double x);

/// First-order Marcum Q-function Q_1(a, b), a,b >= 0.
double marcum_q1(double a, double b);

/// log(1 - Q_1(a, b)), accurate when Q_1 is close to 1.
double log1m_marcum_q1(double a, double b);

/// Half-integer-order modified Bessel of the second kind, K_{u+1/2}(z),
/// via the finite closed-form sum. z > 0, u >= 0.
double bessel_k_half_integer(int u, double z);

/// Closed-form approximation of K_n(z) for non-half-integer order n > 1/2,
/// built from the two neighbouring half-integer orders. The approximation is
/// exact in the z -> 0 limit and undershoots by at most (1 - C_{u,n}) at
/// large z.
double bessel_k_approx(double n, double z);

/// Leading constant C_{u,n} of the K_n approximation (in (0, 1]).
double bessel_k_approx_constant(double n);

/// Elementary-sum factor Psi_{u+1/2}(z) with K_{u+1/2}(z) =
/// sqrt(pi/(2z)) Psi_{u+1/2}(z) e^{-z}.
double bessel_k_psi_half(int u, double z);

/// Interpolated Psi_{u,n}(z) used by bessel_k_approx.
double bessel_k_psi_interp(double n, double z);

/// Laguerre polynomial of order 1/2 at x <= 0; stable for x down to -1e6+.
double laguerre_half(double x);

/// Regularized incomplete gamma functions P(s,x), Q(s,x).
double gamma_p(double s, double x);
double gamma_q(double s, double x);

} // namespace lbphy::specfun
