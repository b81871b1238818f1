#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lbphy/channel.hpp"
#include "lbphy/decoder.hpp"
#include "lbphy/rng.hpp"
#include "lbphy/waveform.hpp"

using namespace lbphy;

TEST_CASE("noiseless ML decodes every symbol, any carrier phase") {
    const ModulationConfig cfg(7, 2);
    for (std::int64_t a = 0; a < cfg.M(); a += 7) {
        auto w = lb_waveform(a, cfg);
        for (double theta : {0.0, 0.9, 4.1}) {
            auto r = w.samples;
            for (auto& s : r) s *= std::polar(1.0, theta);
            const auto out = ml_decode(r, cfg);
            CHECK(out.decided_symbol == a);
        }
    }
}

TEST_CASE("noiseless ML bins equal the cross-correlation row") {
    const ModulationConfig cfg(7, 3);
    const auto xi = cross_corr_cached(cfg, DecoderKind::ML);
    const auto w = lb_waveform(42, cfg);
    const auto out = ml_decode(w.samples, cfg);
    for (std::int64_t i = 0; i < cfg.M(); ++i)
        CHECK(out.bin_magnitudes[static_cast<std::size_t>(i)] ==
              doctest::Approx(std::abs(xi->at(42, i))).epsilon(1e-6));
}

TEST_CASE("fft decoder: noiseless LB decodes correctly, diagonal dominates") {
    const ModulationConfig cfg(7, 2);
    const auto xi = cross_corr_cached(cfg, DecoderKind::FFT);
    for (std::int64_t a = 0; a < cfg.M(); ++a) {
        // diagonal strictly maximal in each row
        double best_off = 0.0;
        for (std::int64_t i = 0; i < cfg.M(); ++i)
            if (i != a) best_off = std::max(best_off, std::abs(xi->at(a, i)));
        CHECK(std::abs(xi->at(a, a)) > best_off);
        if (a % 9 == 0) {
            const auto w = lb_waveform(a, cfg);
            CHECK(fft_decode(w.samples, cfg).decided_symbol == a);
        }
    }
    // |xi_aa^FFT| ~ 0.906 at N=2, SF=7
    CHECK(std::abs(xi->at(0, 0)) == doctest::Approx(0.906).epsilon(1e-2));
}

TEST_CASE("decoders coincide on conventional LoRa input") {
    // emulate the unquantized system with a fine grid
    const ModulationConfig cfg(7, 16);
    for (std::int64_t a = 0; a < cfg.M(); a += 11) {
        const auto w = lora_waveform(a, cfg);
        const auto ml = ml_decode(w.samples, cfg);
        const auto ff = fft_decode(w.samples, cfg);
        CHECK(ml.decided_symbol == a);
        CHECK(ff.decided_symbol == a);
    }
}

TEST_CASE("phase and scale invariance of decisions") {
    const ModulationConfig cfg(8, 2);
    Rng rng(17);
    for (int trial = 0; trial < 12; ++trial) {
        const auto a = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(cfg.M())));
        auto w = lb_waveform(a, cfg);
        auto r = awgn_apply(w.samples, {1.0, 0.0}, 1.0, 0.05, rng);
        const auto base_ml = ml_decode(r, cfg);
        const auto base_ff = fft_decode(r, cfg);

        auto rotated = r;
        for (auto& s : rotated) s *= std::polar(1.0, 2.2);
        auto scaled = r;
        for (auto& s : scaled) s *= 37.5;

        CHECK(ml_decode(rotated, cfg).decided_symbol == base_ml.decided_symbol);
        CHECK(fft_decode(rotated, cfg).decided_symbol == base_ff.decided_symbol);
        CHECK(ml_decode(scaled, cfg).decided_symbol == base_ml.decided_symbol);
        CHECK(fft_decode(scaled, cfg).decided_symbol == base_ff.decided_symbol);
        // magnitudes unchanged under rotation
        const auto rot_bins = ml_decode(rotated, cfg).bin_magnitudes;
        for (std::size_t i = 0; i < rot_bins.size(); i += 37)
            CHECK(rot_bins[i] == doctest::Approx(base_ml.bin_magnitudes[i]).epsilon(1e-9));
    }
}

TEST_CASE("decided symbol is the argmax with lowest-index ties") {
    const ModulationConfig cfg(7, 2);
    const auto w = lb_waveform(5, cfg);
    const auto out = ml_decode(w.samples, cfg);
    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < out.bin_magnitudes.size(); ++i) {
        if (out.bin_magnitudes[i] > best) {
            best = out.bin_magnitudes[i];
            best_i = i;
        }
    }
    CHECK(out.decided_symbol == static_cast<std::int64_t>(best_i));
}

TEST_CASE("length mismatch raises") {
    const ModulationConfig cfg(7, 2);
    std::vector<cdouble> bad(17);
    CHECK_THROWS_AS(ml_decode(bad, cfg), std::invalid_argument);
    CHECK_THROWS_AS(fft_decode(bad, cfg), std::invalid_argument);
}

TEST_CASE("batched ML agrees with the scalar path on noisy input") {
    const ModulationConfig cfg(7, 2);
    const auto M = static_cast<std::size_t>(cfg.M());
    auto bank = waveform_bank_cached(cfg);
    Rng rng(29);
    const std::size_t n = 64;
    std::vector<std::complex<float>> rows(n * M);
    std::vector<std::vector<cdouble>> dbl(n, std::vector<cdouble>(M));
    for (std::size_t t = 0; t < n; ++t) {
        const auto a = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(M)));
        const auto w = lb_waveform(a, cfg);
        const auto r = awgn_apply(w.samples, std::polar(1.0, rng.uniform()), 1.0, 0.02, rng);
        for (std::size_t k = 0; k < M; ++k) {
            rows[t * M + k] = std::complex<float>(static_cast<float>(r[k].real()),
                                                  static_cast<float>(r[k].imag()));
            dbl[t][k] = r[k];
        }
    }
    std::vector<std::int64_t> dec(n);
    ml_decode_batch(*bank, rows, n, dec);
    for (std::size_t t = 0; t < n; ++t)
        CHECK(dec[t] == ml_decode(dbl[t], cfg).decided_symbol);
}
