#pragma once

// Test-only reference computations, kept independent of the library paths
// they validate: naive phase evaluation, scan-and-bisect discontinuity
// location, its own adaptive integrator, and integral-representation special
// functions.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "lbphy/config.hpp"

namespace oracle {

inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const double floor_tol = 4.0 * 2.2e-16 * (std::abs(left) + std::abs(right));
    if (depth <= 0 || !(std::abs(delta) > 15.0 * std::max(tol, floor_tol)))
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int depth = 30) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// I_0 by plain series; fine for x <= ~250 in double.
inline double bessel_i0_series(double x) {
    const double t = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 400; ++k) {
        term *= t / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return sum;
}

/// K_nu(z) = int_0^inf e^{-z cosh t} cosh(nu t) dt.
inline double bessel_k_integral(double nu, double z) {
    // e^{-z cosh t} cosh(nu t) is negligible once z cosh t - nu t > 750
    double t_max = 1.0;
    while (z * std::cosh(t_max) - std::abs(nu) * t_max < 750.0 && t_max < 60.0) t_max += 0.5;
    return integrate([&](double t) { return std::exp(-z * std::cosh(t)) * std::cosh(nu * t); },
                     0.0, t_max, 1e-14);
}

/// Q_1(a,b) from the Rician tail integral (moderate arguments only).
inline double marcum_q1_integral(double a, double b) {
    const double hi = a + 40.0;
    if (b >= hi) return 0.0;
    return integrate(
        [&](double x) {
            return x * std::exp(-0.5 * (x - a) * (x - a)) *
                   (std::exp(-a * x) * bessel_i0_series(a * x));
        },
        b, hi, 1e-15);
}

/// Naive double-precision chirp phase argument (Eq.-style, no integer
/// reduction) for the spectral oracles.
inline double chirp_arg_naive(double t, std::int64_t a, const lbphy::ModulationConfig& cfg) {
    const double B = cfg.bandwidth_hz;
    const double M = static_cast<double>(cfg.M());
    const double tau = (M - static_cast<double>(a)) / B;
    const double u = t >= tau ? 1.0 : 0.0;
    return 2.0 * std::numbers::pi * B * t *
           (static_cast<double>(a) / M - 0.5 + B * t / (2.0 * M) - u);
}

/// Quantized phase via the library quantizer on the naive argument.
double quantized_phase_naive(double t, std::int64_t a, const lbphy::ModulationConfig& cfg);

/// Discontinuity times of the quantized phase found by dense scan plus
/// bisection; independent of the quadratic root formula.
std::vector<double> scan_jumps(std::int64_t a, const lbphy::ModulationConfig& cfg);

/// Brute-force S_a(f): adaptive integration between scanned jumps.
std::complex<double> sa_brute_force(std::int64_t a, const lbphy::ModulationConfig& cfg, double f);

} // namespace oracle
