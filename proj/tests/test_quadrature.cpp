#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lbphy/quadrature.hpp"

using namespace lbphy;

namespace {

// closed-form moments of the weights
double hermite_moment(int p) { // int x^p e^{-x^2} dx
    if (p % 2) return 0.0;
    return std::tgamma((p + 1) / 2.0);
}
double laguerre_moment(double alpha, int p) { // int x^{p+alpha} e^{-x} dx
    return std::tgamma(alpha + p + 1.0);
}

double apply(const QuadratureRule& r, int p) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.order(); ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
    return s;
}

} // namespace

TEST_CASE("hermite order 2 is the classical two-point rule") {
    const auto r = gauss_hermite(2);
    CHECK(r.nodes[0] == doctest::Approx(-1.0 / std::numbers::sqrt2).epsilon(1e-14));
    CHECK(r.nodes[1] == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-14));
    CHECK(r.weights[0] == doctest::Approx(std::sqrt(std::numbers::pi) / 2.0).epsilon(1e-14));
    CHECK(r.weights[1] == doctest::Approx(std::sqrt(std::numbers::pi) / 2.0).epsilon(1e-14));
}

TEST_CASE("rule invariants: ordering, positivity, weight sums") {
    for (int order : {2, 8, 32, 64, 128, 256}) {
        const auto gh = gauss_hermite(order);
        CHECK(std::abs(gh.weight_sum() - std::sqrt(std::numbers::pi)) < 1e-10);
        for (std::size_t i = 0; i < gh.order(); ++i) {
            CHECK(gh.weights[i] >= 0.0);
            if (i) CHECK(gh.nodes[i] > gh.nodes[i - 1]);
        }
        for (double alpha : {0.0, 0.5, 1.5, 3.0}) {
            const auto gl = gauss_laguerre(order, alpha);
            CHECK(gl.weight_sum() ==
                  doctest::Approx(std::tgamma(alpha + 1.0)).epsilon(1e-8));
            for (std::size_t i = 0; i < gl.order(); ++i) {
                CHECK(gl.weights[i] >= 0.0);
                CHECK(gl.nodes[i] > (i ? gl.nodes[i - 1] : 0.0));
            }
        }
    }
}

TEST_CASE("hermite 32 reproduces the x^2 Gaussian moment") {
    const auto r = gauss_hermite(32);
    CHECK(apply(r, 2) == doctest::Approx(std::sqrt(std::numbers::pi) / 2.0).epsilon(1e-12));
}

TEST_CASE("laguerre(alpha=1, 16) reproduces Gamma(3)") {
    const auto r = gauss_laguerre(16, 1.0);
    CHECK(apply(r, 1) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("polynomial exactness to degree 2n-1") {
    for (int order : {2, 5, 16, 64}) {
        const auto gh = gauss_hermite(order);
        for (int p = 0; p <= 2 * order - 1; ++p) {
            const double ref = hermite_moment(p);
            const double got = apply(gh, p);
            if (ref == 0.0)
                CHECK(std::abs(got) < 1e-9 * hermite_moment(p - 1 >= 0 ? p - 1 : 0));
            else
                CHECK(got == doctest::Approx(ref).epsilon(1e-9));
        }
        const double alpha = 1.5;
        const auto gl = gauss_laguerre(order, alpha);
        for (int p = 0; p <= 2 * order - 1; ++p)
            CHECK(apply(gl, p) == doctest::Approx(laguerre_moment(alpha, p)).epsilon(1e-9));
    }
}

TEST_CASE("rejects unsupported orders and alpha") {
    CHECK_THROWS_AS(gauss_hermite(1), std::invalid_argument);
    CHECK_THROWS_AS(gauss_hermite(257), std::invalid_argument);
    CHECK_THROWS_AS(gauss_laguerre(16, -1.0), std::invalid_argument);
}
