#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>

#include "lbphy/channel.hpp"
#include "lbphy/config.hpp"
#include "lbphy/quadrature.hpp"
#include "lbphy/waveform.hpp"

namespace lbphy {

/// Rician statistics of the correct decoder bin under the Gaussian
/// approximation.
struct BinStatistics {
    double kappa = 0.0;
    double sigma = 1.0;   // per-dimension noise std
    double mu_a = 0.0;
    double sigma_a2 = 0.0;
};

/// c_diag = |h sqrt(Es) xi_(a,a)|.
BinStatistics bin_statistics(double c_diag, double sigma);

struct SerPoint {
    double snr = 0.0; // linear; mean SNR for fading modes
    double ser = 0.0;
    std::string method;
    ModulationConfig config;
    DecoderKind decoder = DecoderKind::ML;
    bool gaussian_approx_warning = false; // some kappa_(a,a) < 2 on the path
    std::string branch;                   // fading: which K_n branch was used
};

struct AnalyticOptions {
    int n_gh = 64;
    int n_gl = 64;
    std::int64_t symbol_stride = 1; // subsample the symbol average (SF >= 10 escape hatch)
};

/// CDF of the max noisy bin, Pi_{i != a} [1 - Q1(|h sqrt(Es) xi_(a,i)|/sigma, l/sigma)],
/// evaluated as a log-space sum.
double max_bin_cdf(double l, std::int64_t a, double h_amp, double symbol_energy, double sigma2,
                   std::span<const cdouble> xi_row);

/// Average symbol error rate in AWGN via the Gauss-Hermite sum.
SerPoint ser_awgn(double gamma, const ModulationConfig& cfg, DecoderKind decoder,
                  const AnalyticOptions& opts = {});

/// Conventional-LoRa reference SER (orthogonal waveforms, exact Rician
/// correct-bin density, adaptive quadrature).
SerPoint lora_ser_reference(double gamma, int sf);

/// Average SER over the double Nakagami-m channel at fixed transmit power.
/// gamma_mean is the mean SNR gamma_s * Omega1 * Omega2.
SerPoint ser_fading_fixed(double gamma_mean, const ModulationConfig& cfg, DecoderKind decoder,
                          const FadingParams& fading, const AnalyticOptions& opts = {});

/// Water-filling outage SNR gamma_0: root of
/// int_{gamma_0}^inf (1/gamma_0 - 1/gamma) p(gamma) dgamma = 1.
double waterfill_outage(double gamma_scale, const FadingParams& fading);

/// Average SER with water-filling power allocation (conditioned on
/// transmission, i.e. gamma > gamma_0).
SerPoint ser_fading_waterfill(double gamma_scale, const ModulationConfig& cfg,
                              DecoderKind decoder, const FadingParams& fading,
                              const AnalyticOptions& opts = {});

/// Conditional SEP given channel amplitude and per-symbol-energy; shared by
/// the fading and water-filling paths. Exposed for tests.
double sep_given_channel(double h_amp, double symbol_energy, double sigma2,
                         const ModulationConfig& cfg, DecoderKind decoder,
                         const QuadratureRule& gh, std::int64_t symbol_stride = 1,
                         bool* gaussian_warning = nullptr);

} // namespace lbphy
