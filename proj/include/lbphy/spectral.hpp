#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lbphy/config.hpp"
#include "lbphy/waveform.hpp"

namespace lbphy {

/// Times where the quantized chirp phase changes value, plus the constant
/// level on each interval. times.front() == 0, times.back() == T_s.
struct BreakpointSet {
    std::int64_t symbol = 0;
    ModulationConfig config;
    std::vector<double> times;  // size psi + 1
    std::vector<double> levels; // size psi, quantized phase per interval
};

BreakpointSet breakpoints(std::int64_t a, const ModulationConfig& cfg);

/// Fourier transform S_a(f) of the continuous-envelope symbol waveform,
/// evaluated from the piecewise-constant-phase sum; the removable f = 0
/// singularity switches to the limit form below f_eps = 1e-9 B.
cdouble sa_fourier(const BreakpointSet& bp, double f);
cdouble sa_fourier(std::int64_t a, const ModulationConfig& cfg, double f);

struct SpectrumResult {
    ModulationConfig config;
    std::vector<double> freqs;                          // Hz
    std::vector<double> continuous_psd;                 // 1/Hz
    std::vector<std::pair<double, double>> discrete_lines; // (Hz, power)
    std::string normalization;
};

/// Batch evaluator holding per-symbol breakpoint sets for one config.
class SpectrumEvaluator {
  public:
    explicit SpectrumEvaluator(const ModulationConfig& cfg);

    const ModulationConfig& config() const { return cfg_; }

    cdouble sa(std::int64_t a, double f) const { return sa_fourier(bps_[a], f); }

    /// Continuous PSD G^{(c)}(f), clamped at zero.
    double continuous(double f) const;

    /// Discrete line (f = l B / M, power) for l in [l_min, l_max].
    std::vector<std::pair<double, double>> lines(std::int64_t l_min, std::int64_t l_max) const;

    /// Continuous PSD on the uniform grid f0 + q df, q in [0, nf).
    std::vector<double> continuous_grid(double f0, double df, std::size_t nf) const;

    /// Line powers for l in [l_min, l_max] via the same batched recurrence.
    std::vector<double> line_powers(std::int64_t l_min, std::int64_t l_max) const;

    /// Raw symbol-ensemble moments on a uniform grid: mean (1/M) sum_a S_a
    /// and mean power (1/M) sum_a |S_a|^2.
    struct GridMoments {
        std::vector<cdouble> mean;
        std::vector<double> mean_abs2;
    };
    GridMoments grid_moments(double f0, double df, std::size_t nf) const;

    /// Total spectrum binned into width-df bins centered at f0 + q df:
    /// continuous density times df plus every line falling in the bin.
    std::vector<double> binned_total(double f0, double df, std::size_t nf) const;

  private:
    // sum of S_a and sum of |S_a|^2 over all symbols on a uniform grid
    void accumulate_grid(double f0, double df, std::size_t nf, std::vector<cdouble>& sum,
                         std::vector<double>& abs2) const;

    ModulationConfig cfg_;
    std::vector<BreakpointSet> bps_;
};

std::shared_ptr<const SpectrumEvaluator> spectrum_cached(const ModulationConfig& cfg);

double psd_continuous(const ModulationConfig& cfg, double f);
std::vector<std::pair<double, double>> psd_discrete_lines(const ModulationConfig& cfg,
                                                          std::int64_t l_min, std::int64_t l_max);

/// Welch PSD estimate of the i.i.d.-symbol random process, oversampled 8x so
/// the estimate is valid out to |f| = 3B. Deterministic for a fixed seed.
/// kind selects the LB (quantized) or conventional LoRa envelope.
SpectrumResult mc_psd(const ModulationConfig& cfg, std::int64_t n_symbols, std::uint64_t seed,
                      WaveKind kind = WaveKind::LB);

/// Piecewise-linear emission mask, limit_dbm versus one-sided offset_hz.
struct MaskSpec {
    std::string name;
    std::vector<std::pair<double, double>> vertices; // (offset_hz, limit_dbm), sorted

    double limit_at(double offset_hz) const;
    static MaskSpec load(const std::string& path);
};

struct MaskReport {
    bool pass = false;
    double worst_margin_db = 0.0;
    struct Violation {
        double freq_hz;
        double power_dbm;
        double limit_dbm;
    };
    std::vector<Violation> violations;
};

/// Integrates the total PSD per RBW bin, scales to the transmit power, and
/// compares against the mask over [0, last vertex offset].
MaskReport mask_check(const ModulationConfig& cfg, double tx_power_dbm, double rbw_hz,
                      const MaskSpec& mask);

} // namespace lbphy
