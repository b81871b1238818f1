#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "lbphy/config.hpp"
#include "lbphy/rng.hpp"

namespace lbphy {

/// Double Nakagami-m channel: |h| = |h1||h2| with independent Nakagami links.
struct FadingParams {
    double m1 = 1.0, omega1 = 1.0;
    double m2 = 1.0, omega2 = 1.0;
    bool monostatic = false; // h1 = h2 = sqrt(h): one link drawn, amplitude squared

    FadingParams() = default;
    FadingParams(double m1_, double omega1_, double m2_, double omega2_, bool mono = false);

    /// Spreads from link distances with unit path-loss constant, Omega_i = 1/d_i^2.
    static FadingParams from_distances(double m1, double m2, double d1, double d2);

    double r1() const { return m1 / omega1; }
    double r2() const { return m2 / omega2; }
    double v() const { return m1 + m2; }
    double n() const { return m1 > m2 ? m1 - m2 : m2 - m1; }
    double mean_power() const { return omega1 * omega2; } // E|h|^2 (bistatic)
};

struct ChannelDraw {
    double h1_amp;
    double h2_amp;
    double h_amp;  // product amplitude
    double phase;  // uniform on [0, 2pi)
    std::complex<double> h() const { return std::polar(h_amp, phase); }
};

ChannelDraw sample_double_nakagami(const FadingParams& params, Rng& rng);

/// Product-amplitude density f_|H|(h), Eq.-of-record with K_n evaluated
/// exactly for half-integer n and numerically otherwise.
double double_nakagami_pdf(double h_amp, const FadingParams& params);

/// Density of gamma = gamma_scale |h|^2.
double snr_pdf(double gamma, const FadingParams& params, double gamma_scale);

/// K_n(z) with the branch used by the densities: closed form at half-integer
/// n, numeric otherwise.
double bessel_k_numeric(double n, double z);

/// r[k] = h sqrt(Es) x[k] + w[k], w circular complex Gaussian with per-
/// dimension variance sigma2.
std::vector<std::complex<double>> awgn_apply(std::span<const std::complex<double>> x,
                                             std::complex<double> h, double symbol_energy,
                                             double sigma2, Rng& rng);

/// Instantaneous/average SNR bookkeeping (Es, sigma^2, gamma = |h|^2 Es/(2 sigma^2 M)).
struct LinkBudget {
    double symbol_energy = 1.0;
    double noise_var_per_dim = 1.0;
    std::int64_t m_symbols = 128;

    double snr_scale() const { return symbol_energy / (2.0 * noise_var_per_dim * m_symbols); }
    double snr(double h_amp) const { return h_amp * h_amp * snr_scale(); }

    /// Fix sigma^2 so that snr_scale() == gamma for Es = 1.
    static LinkBudget from_snr(double gamma, std::int64_t M) {
        return {1.0, 1.0 / (2.0 * gamma * static_cast<double>(M)), M};
    }
};

} // namespace lbphy
