#pragma once

#include <cmath>
#include <functional>

namespace lbphy {

namespace detail {
template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double abs_tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // the eps floor stops futile splitting once roundoff dominates
    const double floor_tol = 4.0 * 2.2e-16 * (std::abs(left) + std::abs(right));
    if (depth <= 0 || !(std::abs(delta) > 15.0 * std::max(abs_tol, floor_tol)))
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * abs_tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * abs_tol, depth - 1);
}
} // namespace detail

/// Adaptive Simpson on [a, b] with absolute tolerance.
template <typename F>
double integrate_adaptive(const F& f, double a, double b, double abs_tol = 1e-10, int max_depth = 30) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

/// Semi-infinite integral of a decaying integrand: geometric panels from a
/// until three consecutive panels fall below tail_tol.
template <typename F>
double integrate_to_infinity(const F& f, double a, double first_panel, double abs_tol = 1e-12,
                             double tail_tol = 1e-15, int max_panels = 200) {
    double total = 0.0, lo = a, w = first_panel;
    int quiet = 0;
    for (int p = 0; p < max_panels && quiet < 3; ++p) {
        const double hi = lo + w;
        const double part = integrate_adaptive(f, lo, hi, abs_tol);
        total += part;
        quiet = (std::abs(part) < tail_tol * (std::abs(total) + 1e-300)) ? quiet + 1 : 0;
        lo = hi;
        w *= 1.6;
    }
    return total;
}

} // namespace lbphy
