#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lbphy/config.hpp"

namespace lbphy {

using cdouble = std::complex<double>;

/// Mid-rise quantizer with 2^N levels, 2pi-periodic extension. Output is an
/// odd multiple of pi/2^N.
double midrise_quantize(double x, int n_levels_exp);

/// Integer-exact quantized sample phase of the LB waveform:
/// Q_N[k pi (2a - M + k)/M] expressed as (2 lvl + 1) pi / 2^N with lvl from
/// pure integer arithmetic (no float rounding at quantizer cell edges).
double lb_sample_phase(std::int64_t k, std::int64_t a, const ModulationConfig& cfg);

/// Unquantized sample phase k pi (2a - M + k)/M reduced to [0, 2pi).
double lora_sample_phase(std::int64_t k, std::int64_t a, const ModulationConfig& cfg);

/// Continuous-time LB instantaneous phase at t in [0, T_s], unit step u(0)=1.
/// The quadratic phase argument is reduced mod 2pi through an exact
/// integer/fraction split so cell-edge values quantize consistently with the
/// discrete-time formula.
double lb_phase(double t, std::int64_t a, const ModulationConfig& cfg);

/// Phase argument (before quantization) of the piecewise chirp, same
/// reduction as lb_phase. Exposed for the spectral module.
double chirp_phase_arg(double t, std::int64_t a, const ModulationConfig& cfg);

struct Waveform {
    ModulationConfig config;
    std::int64_t symbol = 0;
    WaveKind kind = WaveKind::LB;
    std::vector<cdouble> samples; // length M, unit total energy

    double energy() const;
};

Waveform lb_waveform(std::int64_t a, const ModulationConfig& cfg);
Waveform lora_waveform(std::int64_t a, const ModulationConfig& cfg);

/// Downchirp sequence x_d[k] = sqrt(1/M) e^{-j 2pi k^2/(2M) + j pi k}.
std::vector<cdouble> downchirp(const ModulationConfig& cfg);

/// Full M x M decoder cross-correlation matrix.
///   ML:  xi[a][i] = <x_a, x_i*>
///   FFT: xi[a][i] = i-th DFT bin of the dechirped x_a
struct CrossCorrMatrix {
    ModulationConfig config;
    DecoderKind decoder_kind = DecoderKind::ML;
    std::vector<cdouble> xi; // row-major M x M

    std::span<const cdouble> row(std::int64_t a) const {
        const auto m = static_cast<std::size_t>(config.M());
        return {xi.data() + static_cast<std::size_t>(a) * m, m};
    }
    cdouble at(std::int64_t a, std::int64_t i) const {
        return xi[static_cast<std::size_t>(a) * static_cast<std::size_t>(config.M()) +
                  static_cast<std::size_t>(i)];
    }
    double max_offdiagonal() const;
};

/// Builds the full matrix; refuses M > 4096 (use max_cross_corr instead).
CrossCorrMatrix cross_corr(const ModulationConfig& cfg, DecoderKind kind);

/// Shared per-(sf, n, kind) cache of cross_corr results.
std::shared_ptr<const CrossCorrMatrix> cross_corr_cached(const ModulationConfig& cfg,
                                                         DecoderKind kind);

/// Streaming maximum off-diagonal |xi| without materializing the matrix;
/// single-precision panels, fine for 3-decimal comparisons up to SF = 12.
double max_cross_corr(const ModulationConfig& cfg, DecoderKind kind);

/// Per-symbol decoder statistics used by the analytic SER formulas: the
/// diagonal magnitude and the off-diagonal magnitudes clustered into
/// (value, multiplicity) pairs (LB rows are highly degenerate).
struct RowProfile {
    double diag = 1.0;
    std::vector<std::pair<double, std::int64_t>> offdiag; // unique |xi|, count
};

std::vector<RowProfile> row_profiles(const CrossCorrMatrix& m);

} // namespace lbphy
