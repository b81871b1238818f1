#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lbphy/kvfile.hpp"
#include "lbphy/rng.hpp"
#include "lbphy/spectral.hpp"
#include "oracles.hpp"
#include "welch_compare.hpp"

using namespace lbphy;

TEST_CASE("breakpoints: structure and scan cross-check") {
    struct Case {
        std::int64_t a;
        int sf, n;
    };
    for (const auto& c : {Case{0, 7, 1}, Case{5, 7, 2}, Case{64, 7, 2}, Case{100, 7, 3},
                          Case{37, 8, 2}}) {
        const ModulationConfig cfg(c.sf, c.n);
        const auto bp = breakpoints(c.a, cfg);
        const double Ts = cfg.symbol_duration();
        REQUIRE(bp.times.size() >= 2);
        CHECK(bp.times.front() == 0.0);
        CHECK(bp.times.back() == doctest::Approx(Ts).epsilon(1e-15));
        for (std::size_t i = 1; i < bp.times.size(); ++i) CHECK(bp.times[i] > bp.times[i - 1]);

        // quantized phase constant on each open interval
        for (std::size_t m = 0; m + 1 < bp.times.size(); ++m) {
            const double lo = bp.times[m], hi = bp.times[m + 1];
            for (double r : {0.25, 0.5, 0.75}) {
                const double q = oracle::quantized_phase_naive(lo + r * (hi - lo), c.a, cfg);
                CHECK(q == doctest::Approx(bp.levels[m]).epsilon(1e-9));
            }
        }

        // every scanned discontinuity coincides with some breakpoint
        const auto jumps = oracle::scan_jumps(c.a, cfg);
        for (double j : jumps) {
            double best = 1e300;
            for (double t : bp.times) best = std::min(best, std::abs(t - j));
            CHECK(best < 1e-8 * Ts);
        }
        // and the number of level changes matches the scan
        std::size_t changes = 0;
        for (std::size_t m = 1; m < bp.levels.size(); ++m)
            if (std::abs(bp.levels[m] - bp.levels[m - 1]) > 1e-9) ++changes;
        CHECK(changes == jumps.size());
    }
}

TEST_CASE("sa_fourier against the brute-force time integral") {
    struct Case {
        std::int64_t a;
        int sf, n;
    };
    for (const auto& c : {Case{5, 7, 2}, Case{100, 7, 3}, Case{37, 8, 2}}) {
        const ModulationConfig cfg(c.sf, c.n);
        const double B = cfg.bandwidth_hz;
        for (double fb : {0.0, 0.37, -1.3, 2.05}) {
            const auto got = sa_fourier(c.a, cfg, fb * B);
            const auto ref = oracle::sa_brute_force(c.a, cfg, fb * B);
            CHECK(std::abs(got - ref) <= 1e-8 * std::abs(ref) + 1e-12 * cfg.symbol_duration());
        }
    }
}

TEST_CASE("sa_fourier continuous at the f->0 limit") {
    const ModulationConfig cfg(7, 2);
    const auto bp = breakpoints(9, cfg);
    const auto lim = sa_fourier(bp, 0.0);
    // S_a itself varies by O(2 pi f T_s) near zero; the branch must shrink
    // into the limit value at that rate, with no jump at the f_eps switch
    const auto near1 = sa_fourier(bp, 1e-7 * cfg.bandwidth_hz);
    const auto near2 = sa_fourier(bp, 1e-8 * cfg.bandwidth_hz);
    CHECK(std::abs(near1 - lim) < 1e-4 * std::abs(lim));
    CHECK(std::abs(near2 - lim) < 0.15 * std::abs(near1 - lim));
}

TEST_CASE("parseval: unit power recovered as the band grows") {
    // the 1/f^2 spectral tail of the piecewise-constant-phase envelope leaves
    // ~0.2% of the energy beyond 50B at N=2 and ~0.05% beyond 200B
    const ModulationConfig cfg(7, 2);
    const double B = cfg.bandwidth_hz;
    const double Ts = cfg.symbol_duration();
    const auto bp = breakpoints(77, cfg);
    const auto band_power = [&](double fmax, std::size_t nf) {
        const double df = 2.0 * fmax / static_cast<double>(nf);
        double acc = 0.0;
        for (std::size_t q = 0; q < nf; ++q) {
            const double f = -fmax + (static_cast<double>(q) + 0.5) * df;
            acc += std::norm(sa_fourier(bp, f)) * df;
        }
        return acc / Ts;
    };
    const double p50 = band_power(50.0 * B, 1 << 17);
    const double p200 = band_power(200.0 * B, 1 << 19);
    CHECK(p50 == doctest::Approx(1.0).epsilon(2.5e-3));
    CHECK(p200 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(p200 > p50);
}

TEST_CASE("continuous PSD: symmetry, positivity, staircase shape") {
    const ModulationConfig cfg9(9, 2);
    auto eval = spectrum_cached(cfg9);
    const double B = cfg9.bandwidth_hz;
    CHECK(eval->continuous(0.7 * B) ==
          doctest::Approx(eval->continuous(-0.7 * B)).epsilon(1e-9));
    const double g05 = eval->continuous(0.5 * B);
    const double g15 = eval->continuous(1.5 * B);
    const double g20 = eval->continuous(2.0 * B);
    CHECK(g05 > 0.0);
    CHECK(10.0 * std::log10(g05 / g15) > 10.0);          // fast drop to the first shelf
    CHECK(std::abs(10.0 * std::log10(g15 / g20)) < 3.0); // then roughly flat
}

TEST_CASE("continuous_grid agrees with pointwise evaluation") {
    const ModulationConfig cfg(7, 3);
    auto eval = spectrum_cached(cfg);
    const double B = cfg.bandwidth_hz;
    const auto grid = eval->continuous_grid(0.1 * B, 0.37 * B, 8);
    for (std::size_t q = 0; q < grid.size(); ++q) {
        const double f = 0.1 * B + static_cast<double>(q) * 0.37 * B;
        CHECK(grid[q] == doctest::Approx(eval->continuous(f)).epsilon(1e-9));
    }
}

TEST_CASE("discrete lines: nonnegative, symmetric, total power ~ 1") {
    const ModulationConfig cfg(7, 2);
    auto eval = spectrum_cached(cfg);
    const auto M = cfg.M();
    const auto lines = eval->line_powers(-3 * M, 3 * M);
    for (double p : lines) CHECK(p >= 0.0);
    for (std::int64_t l = 1; l <= 3 * M; ++l)
        CHECK(lines[static_cast<std::size_t>(3 * M + l)] ==
              doctest::Approx(lines[static_cast<std::size_t>(3 * M - l)]).epsilon(1e-9));

    // lines + continuous integral over |f| <= 50B add up to the unit power
    const double B = cfg.bandwidth_hz;
    const auto all_lines = eval->line_powers(-50 * M, 50 * M);
    double total = 0.0;
    for (double p : all_lines) total += p;
    const std::size_t nf = 1 << 15;
    const double df = 100.0 * B / static_cast<double>(nf);
    const auto g = eval->continuous_grid(-50.0 * B + 0.5 * df, df, nf);
    for (double v : g) total += v * df;
    CHECK(total == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("welch estimate matches the analytic spectrum (small run)") {
    const ModulationConfig cfg(7, 2);
    const auto welch = mc_psd(cfg, 2048, 77);
    auto eval = spectrum_cached(cfg);
    const double B = cfg.bandwidth_hz;
    // bin at the Welch resolution (B/512 at SF=7 with 8x oversampling)
    const double df = B / 512.0;
    const auto nf = static_cast<std::size_t>(3.0 * 512.0);
    const auto binned = oracle::bin_welch_vs_analytic(welch, *eval, df, nf);
    const double peak = *std::max_element(binned.analytic.begin(), binned.analytic.end());

    std::size_t checked = 0, ok = 0;
    for (std::size_t q = 0; q < nf; ++q) {
        if (binned.analytic[q] < peak * 3.16e-6) continue; // -55 dBc
        ++checked;
        const double diff = 10.0 * std::log10(binned.welch[q] / binned.analytic[q]);
        if (std::abs(diff) < 1.5) ++ok;
    }
    REQUIRE(checked > 100);
    CHECK(static_cast<double>(ok) / static_cast<double>(checked) > 0.95);
}

TEST_CASE("welch variance shrinks with more symbols") {
    const ModulationConfig cfg(7, 2);
    const auto a = mc_psd(cfg, 512, 1);
    const auto b = mc_psd(cfg, 512, 2);
    const auto c = mc_psd(cfg, 2048, 3);
    const auto d = mc_psd(cfg, 2048, 4);
    double small_run = 0.0, big_run = 0.0;
    for (std::size_t i = 0; i < a.continuous_psd.size(); ++i) {
        const double ma = 0.5 * (a.continuous_psd[i] + b.continuous_psd[i]);
        small_run += std::pow(a.continuous_psd[i] - b.continuous_psd[i], 2) / (ma * ma + 1e-30);
        const double mc = 0.5 * (c.continuous_psd[i] + d.continuous_psd[i]);
        big_run += std::pow(c.continuous_psd[i] - d.continuous_psd[i], 2) / (mc * mc + 1e-30);
    }
    CHECK(big_run < small_run);
}

TEST_CASE("welch determinism under a fixed seed") {
    const ModulationConfig cfg(7, 2);
    const auto a = mc_psd(cfg, 512, 42);
    const auto b = mc_psd(cfg, 512, 42);
    REQUIRE(a.continuous_psd.size() == b.continuous_psd.size());
    for (std::size_t i = 0; i < a.continuous_psd.size(); ++i)
        CHECK(a.continuous_psd[i] == b.continuous_psd[i]);
}

TEST_CASE("mask: trivial all-pass and step interpolation") {
    MaskSpec open_mask;
    open_mask.name = "open";
    open_mask.vertices = {{0.0, 1e9}, {1e6, 1e9}};
    const ModulationConfig cfg(7, 2, 250e3);
    const auto rep = mask_check(cfg, 14.0, 1000.0, open_mask);
    CHECK(rep.pass);
    CHECK(rep.worst_margin_db > 1e6);

    MaskSpec step;
    step.vertices = {{0.0, 14.0}, {1e5, 14.0}, {1e5, -36.0}, {2e5, -36.0}};
    CHECK(step.limit_at(5e4) == 14.0);
    CHECK(step.limit_at(1e5) == -36.0); // step edges take the tighter limit
    CHECK(step.limit_at(1.5e5) == -36.0);
}

TEST_CASE("mask file loading and malformed input") {
    const auto mask = MaskSpec::load(std::string(LBPHY_SOURCE_DIR) + "/data/etsi_g1.toml");
    CHECK(mask.vertices.size() == 4);
    CHECK(mask.limit_at(0.0) == 14.0);
    CHECK(mask.limit_at(1e6) == -36.0);

    CHECK_THROWS(MaskSpec::load("/nonexistent/mask.toml"));
    const auto kv = KvFile::parse("name = x\nvertex = banana\n", "bad");
    MaskSpec m;
    bool threw = false;
    try {
        for (const auto& v : kv.get_all("vertex")) {
            std::istringstream is(v);
            double f, l;
            if (!(is >> f >> l)) throw std::runtime_error("bad vertex");
            m.vertices.emplace_back(f, l);
        }
    } catch (const std::runtime_error&) {
        threw = true;
    }
    CHECK(threw);
}
