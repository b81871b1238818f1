#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lbphy {

/// Modulation geometry shared by every module: spreading factor SF fixes the
/// symbol alphabet size M = 2^SF, n_levels_exp fixes the 2^N tag phase grid.
struct ModulationConfig {
    int sf = 7;
    int n_levels_exp = 2;
    double bandwidth_hz = 125e3;
    // Set when sf is outside the usual {7..12} range (still accepted, 1..16).
    bool nonstandard_sf = false;

    ModulationConfig() = default;
    ModulationConfig(int sf_, int n_levels_exp_, double bandwidth_hz_ = 125e3)
        : sf(sf_), n_levels_exp(n_levels_exp_), bandwidth_hz(bandwidth_hz_) {
        if (sf < 1 || sf > 16)
            throw std::invalid_argument("ModulationConfig: sf must be in [1,16], got " + std::to_string(sf));
        if (n_levels_exp < 1 || n_levels_exp > 24)
            throw std::invalid_argument("ModulationConfig: n_levels_exp must be in [1,24]");
        if (!(bandwidth_hz > 0.0))
            throw std::invalid_argument("ModulationConfig: bandwidth must be positive");
        nonstandard_sf = (sf < 7 || sf > 12);
    }

    std::int64_t M() const { return std::int64_t{1} << sf; }
    int n_levels() const { return 1 << n_levels_exp; }
    double symbol_duration() const { return static_cast<double>(M()) / bandwidth_hz; }
    double chip_duration() const { return 1.0 / bandwidth_hz; }

    bool operator==(const ModulationConfig&) const = default;
};

enum class DecoderKind { ML, FFT };
enum class WaveKind { LB, LoRa };

inline const char* to_string(DecoderKind d) { return d == DecoderKind::ML ? "ml" : "fft"; }
inline const char* to_string(WaveKind k) { return k == WaveKind::LB ? "lb" : "lora"; }

} // namespace lbphy
