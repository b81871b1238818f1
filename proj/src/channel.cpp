#include "lbphy/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "lbphy/specfun.hpp"

namespace lbphy {

FadingParams::FadingParams(double m1_, double omega1_, double m2_, double omega2_, bool mono)
    : m1(m1_), omega1(omega1_), m2(m2_), omega2(omega2_), monostatic(mono) {
    if (!(m1 >= 0.5) || !(m2 >= 0.5))
        throw std::invalid_argument("FadingParams: shape parameters must be >= 0.5");
    if (!(omega1 > 0.0) || !(omega2 > 0.0))
        throw std::invalid_argument("FadingParams: spread parameters must be positive");
}

FadingParams FadingParams::from_distances(double m1, double m2, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0))
        throw std::invalid_argument("FadingParams: distances must be positive");
    return FadingParams(m1, 1.0 / (d1 * d1), m2, 1.0 / (d2 * d2));
}

namespace {

double nakagami_amp(double m, double omega, Rng& rng) {
    // |h|^2 ~ Gamma(m, omega/m)
    std::gamma_distribution<double> g(m, omega / m);
    return std::sqrt(g(rng));
}

} // namespace

ChannelDraw sample_double_nakagami(const FadingParams& p, Rng& rng) {
    ChannelDraw d{};
    if (p.monostatic) {
        d.h1_amp = nakagami_amp(p.m1, p.omega1, rng);
        d.h2_amp = d.h1_amp;
    } else {
        d.h1_amp = nakagami_amp(p.m1, p.omega1, rng);
        d.h2_amp = nakagami_amp(p.m2, p.omega2, rng);
    }
    d.h_amp = d.h1_amp * d.h2_amp;
    d.phase = 2.0 * std::numbers::pi * rng.uniform();
    return d;
}

double bessel_k_numeric(double n, double z) {
    const double half_dist = std::abs(n - (std::floor(n) + 0.5));
    if (half_dist < 1e-9 && n >= 0.5)
        return specfun::bessel_k_half_integer(static_cast<int>(std::floor(n)), z);
    return std::cyl_bessel_k(n, z);
}

double double_nakagami_pdf(double h_amp, const FadingParams& p) {
    if (h_amp < 0.0) throw std::domain_error("double_nakagami_pdf: amplitude must be >= 0");
    if (h_amp == 0.0) {
        // h^{v-1} K_n -> h^{v-1-n}: finite limit only when v - 1 - n > 0
        return 0.0;
    }
    const double r1 = p.r1(), r2 = p.r2(), v = p.v(), n = p.n();
    const double z = 2.0 * std::sqrt(r1 * r2) * h_amp;
    const double k = bessel_k_numeric(n, z);
    return 4.0 * std::pow(r1 * r2, 0.5 * v) /
           (std::tgamma(p.m1) * std::tgamma(p.m2)) * std::pow(h_amp, v - 1.0) * k;
}

double snr_pdf(double gamma, const FadingParams& p, double gamma_scale) {
    if (gamma < 0.0) return 0.0;
    if (!(gamma_scale > 0.0)) throw std::invalid_argument("snr_pdf: gamma_scale must be positive");
    if (gamma == 0.0) return 0.0;
    const double r1 = p.r1(), r2 = p.r2(), v = p.v(), n = p.n();
    const double z = 2.0 * std::sqrt(r1 * r2 * gamma / gamma_scale);
    const double k = bessel_k_numeric(n, z);
    return 2.0 * std::pow(r1 * r2 / gamma_scale, 0.5 * v) /
           (std::tgamma(p.m1) * std::tgamma(p.m2)) * std::pow(gamma, 0.5 * v - 1.0) * k;
}

std::vector<std::complex<double>> awgn_apply(std::span<const std::complex<double>> x,
                                             std::complex<double> h, double symbol_energy,
                                             double sigma2, Rng& rng) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("awgn_apply: sigma2 must be positive");
    const double amp = std::sqrt(symbol_energy);
    const double sd = std::sqrt(sigma2);
    std::vector<std::complex<double>> r(x.size());
    for (std::size_t k = 0; k < x.size(); ++k)
        r[k] = h * amp * x[k] + std::complex<double>(sd * rng.normal(), sd * rng.normal());
    return r;
}

} // namespace lbphy
