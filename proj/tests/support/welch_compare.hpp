#pragma once

// Shared comparison helper: bins a Welch estimate and the exact expected
// Welch spectrum onto a common grid.
//
// The estimator uses 4-symbol periodic-Hann segments hopped by 2 symbols, so
// each symbol slot s in a segment sees the window factor
//   w(tau + s T_s) = 1/2 - 1/4 e^{j pi s/2} e^{j 2 pi tau/(4 T_s)} - c.c.
// i.e. the windowed slot transform is a 3-term combination of S_a at the
// evaluation frequency and its two grid neighbours (grid pitch B/(4M)).
// Averaging over i.i.d. symbols and the four slot phases, the variance part
// collapses to the {1/6, 2/3, 1/6} kernel of the mean power E|S_a|^2, and
// the periodic mean adds a closed-form coherence term that depends on the
// grid index mod 4 (spectral lines live at index 0 mod 4):
//
//   E psd(f_q) = ktap(E|S|^2)_q / T_s + W_q / (1.5 T_s),
//   W_q = C_q - (|mu_q|^2 + (|mu_{q-1}|^2 + |mu_{q+1}|^2)/4),
//   C_q = 4|mu_q|^2, |mu_{q-1}|^2, 0, |mu_{q+1}|^2  for q mod 4 = 0,1,2,3.

#include <cmath>
#include <complex>
#include <vector>

#include "lbphy/spectral.hpp"

namespace oracle {

struct BinnedPair {
    std::vector<double> welch;    // power per bin
    std::vector<double> analytic; // power per bin (expected Welch reading)
};

inline BinnedPair bin_welch_vs_analytic(const lbphy::SpectrumResult& welch,
                                        const lbphy::SpectrumEvaluator& eval, double bin_df,
                                        std::size_t nf) {
    BinnedPair out;
    out.welch.assign(nf, 0.0);
    out.analytic.assign(nf, 0.0);
    const double wdf = welch.freqs[1] - welch.freqs[0];
    const double f_hi = static_cast<double>(nf) * bin_df;
    const double ts = eval.config().symbol_duration();

    for (std::size_t i = 0; i < welch.freqs.size(); ++i) {
        const double f = welch.freqs[i];
        if (f < 0.0 || f >= f_hi) continue;
        out.welch[static_cast<std::size_t>(f / bin_df)] += welch.continuous_psd[i] * wdf;
    }

    // moments on the Welch grid, one guard point on each side
    const auto n_w = static_cast<std::size_t>(std::llround(f_hi / wdf));
    const auto gm = eval.grid_moments(-wdf, wdf, n_w + 2); // j maps to index q = j - 1
    auto mu2 = [&](std::size_t j) { return std::norm(gm.mean[j]); };

    for (std::size_t q = 0; q < n_w; ++q) {
        const std::size_t j = q + 1;
        const double base =
            (gm.mean_abs2[j - 1] / 6.0 + gm.mean_abs2[j] * (2.0 / 3.0) + gm.mean_abs2[j + 1] / 6.0) /
            ts;
        double coher = 0.0;
        switch (q % 4) {
            case 0: coher = 4.0 * mu2(j); break;
            case 1: coher = mu2(j - 1); break;
            case 2: coher = 0.0; break;
            case 3: coher = mu2(j + 1); break;
        }
        const double w_corr = coher - (mu2(j) + 0.25 * (mu2(j - 1) + mu2(j + 1)));
        const double psd_model = base + w_corr / (1.5 * ts);
        const double f = static_cast<double>(q) * wdf;
        out.analytic[static_cast<std::size_t>(f / bin_df)] += psd_model * wdf;
    }
    return out;
}

} // namespace oracle
