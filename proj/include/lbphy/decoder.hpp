#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lbphy/config.hpp"

namespace lbphy {

struct DecoderOutput {
    std::int64_t decided_symbol = 0;
    std::vector<double> bin_magnitudes; // length M, |L_{(a,i)}|
    DecoderKind decoder_kind = DecoderKind::ML;
};

/// Non-coherent ML: bin i = |<r, x_i*>|, argmax with lowest-index ties.
DecoderOutput ml_decode(std::span<const std::complex<double>> r, const ModulationConfig& cfg);

/// Dechirp-then-DFT: bin i = |DFT(r .* x_d)[i]|, argmax with lowest-index ties.
DecoderOutput fft_decode(std::span<const std::complex<double>> r, const ModulationConfig& cfg);

/// Shared reference-waveform bank (conjugated, single precision) for the
/// batched ML correlation path used by the Monte Carlo harness.
struct WaveformBank {
    ModulationConfig config;
    std::vector<std::complex<float>> conj_waveforms; // row-major M x M, conj(x_i[k])
    std::vector<std::complex<float>> waveforms;      // row-major M x M, x_i[k]
};

std::shared_ptr<const WaveformBank> waveform_bank_cached(const ModulationConfig& cfg);

/// Batched ML decode of n received rows (n x M, row-major): writes argmax
/// indices. Uses a single-precision matrix product.
void ml_decode_batch(const WaveformBank& bank, std::span<const std::complex<float>> rows,
                     std::size_t n, std::span<std::int64_t> decisions);

} // namespace lbphy
