#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lbphy/fft.hpp"
#include "lbphy/waveform.hpp"

using namespace lbphy;

namespace {
constexpr double kPi = std::numbers::pi;

double wrap(double x) { // to (-pi, pi]
    double r = std::remainder(x, 2.0 * kPi);
    if (r <= -kPi) r = kPi;
    return r;
}
} // namespace

TEST_CASE("mid-rise quantizer examples") {
    CHECK(midrise_quantize(0.0, 2) == doctest::Approx(kPi / 4.0).epsilon(1e-15));
    CHECK(midrise_quantize(-0.3, 2) == doctest::Approx(-kPi / 4.0).epsilon(1e-15));
    CHECK(midrise_quantize(0.3 + 2.0 * kPi, 3) ==
          doctest::Approx(midrise_quantize(0.3, 3)).epsilon(1e-12));
    // outputs are odd multiples of pi/2^N
    for (int n : {1, 2, 3, 5}) {
        for (double x : {-3.0, -0.1, 0.0, 0.7, 2.9, 6.0, 12.3}) {
            const double q = midrise_quantize(x, n);
            const double lvl = q * (1 << n) / kPi;
            CHECK(std::abs(lvl - std::round(lvl)) < 1e-9);
            CHECK(std::abs(std::fmod(std::abs(std::round(lvl)), 2.0) - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("lb_phase at t=0 and sample instants") {
    for (int sf : {7, 9, 12}) {
        for (int n : {1, 2, 4}) {
            const ModulationConfig cfg(sf, n);
            for (std::int64_t a : {std::int64_t{0}, cfg.M() / 3, cfg.M() - 1}) {
                CHECK(lb_phase(0.0, a, cfg) ==
                      doctest::Approx(kPi / (1 << n)).epsilon(1e-12));
                // chip-rate samples match the integer-exact discrete formula
                for (std::int64_t k = 0; k < cfg.M(); k += std::max<std::int64_t>(1, cfg.M() / 97)) {
                    const double t = static_cast<double>(k) * cfg.chip_duration();
                    CHECK(wrap(lb_phase(t, a, cfg) - lb_sample_phase(k, a, cfg)) ==
                          doctest::Approx(0.0).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("phase argument continuous across the frequency fold") {
    const ModulationConfig cfg(7, 2);
    const std::int64_t a = cfg.M() / 2;
    const double tau = static_cast<double>(cfg.M() - a) / cfg.bandwidth_hz;
    const double eps = 1e-9 * cfg.symbol_duration();
    const double before = chirp_phase_arg(tau - eps, a, cfg);
    const double after = chirp_phase_arg(tau + eps, a, cfg);
    CHECK(wrap(before - after) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("lb waveform geometry") {
    const ModulationConfig cfg(7, 2);
    const auto w = lb_waveform(0, cfg);
    // all phases in {pi/4, 3pi/4, 5pi/4, 7pi/4} mod 2pi
    for (const auto& s : w.samples) {
        double ph = std::arg(s);
        if (ph < 0) ph += 2.0 * kPi;
        const double lvl = (ph * 4.0 / kPi - 1.0) / 2.0;
        CHECK(std::abs(lvl - std::round(lvl)) < 1e-12);
    }
    const ModulationConfig cfg9(9, 3);
    CHECK(lb_waveform(77, cfg9).energy() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lb converges to lora as N grows") {
    const ModulationConfig coarse(7, 20);
    const ModulationConfig ref(7, 2);
    const auto lb = lb_waveform(3, coarse);
    const auto lo = lora_waveform(3, ref);
    double max_err = 0.0;
    for (std::size_t k = 0; k < lb.samples.size(); ++k)
        max_err = std::max(max_err, std::abs(wrap(std::arg(lb.samples[k]) - std::arg(lo.samples[k]))));
    CHECK(max_err <= kPi / std::ldexp(1.0, 20) + 1e-12);
}

TEST_CASE("lora waveforms are orthogonal at chip rate") {
    const ModulationConfig cfg(7, 2);
    const auto x0 = lora_waveform(0, cfg);
    for (std::int64_t b : {1, 17, 64, 127}) {
        const auto xb = lora_waveform(b, cfg);
        cdouble acc{0, 0};
        for (std::size_t k = 0; k < x0.samples.size(); ++k)
            acc += x0.samples[k] * std::conj(xb.samples[k]);
        CHECK(std::abs(acc) < 1e-10);
    }
    cdouble self{0, 0};
    for (const auto& s : x0.samples) self += s * std::conj(s);
    CHECK(std::abs(self) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dechirped lora concentrates in one DFT bin") {
    const ModulationConfig cfg(8, 2);
    const auto xd = downchirp(cfg);
    Fft<double> fft(static_cast<std::size_t>(cfg.M()));
    for (std::int64_t a : {0, 5, 100, 255}) {
        auto w = lora_waveform(a, cfg);
        std::vector<cdouble> buf(w.samples.size());
        for (std::size_t k = 0; k < buf.size(); ++k) buf[k] = w.samples[k] * xd[k];
        fft.forward(buf);
        for (std::int64_t i = 0; i < cfg.M(); ++i) {
            if (i == a)
                CHECK(std::abs(buf[static_cast<std::size_t>(i)]) ==
                      doctest::Approx(1.0).epsilon(1e-10));
            else
                CHECK(std::abs(buf[static_cast<std::size_t>(i)]) < 1e-10);
        }
    }
}

TEST_CASE("cross correlation: ML structure and golden maxima") {
    const ModulationConfig cfg(7, 2);
    const auto xi = cross_corr(cfg, DecoderKind::ML);
    for (std::int64_t a : {0, 31, 127})
        CHECK(std::abs(xi.at(a, a)) == doctest::Approx(1.0).epsilon(1e-12));
    // Hermitian
    for (std::int64_t a : {1, 40}) {
        for (std::int64_t i : {3, 77}) {
            const auto u = xi.at(a, i), v = std::conj(xi.at(i, a));
            CHECK(u.real() == doctest::Approx(v.real()).epsilon(1e-12));
            CHECK(u.imag() == doctest::Approx(v.imag()).epsilon(1e-12));
        }
    }
    CHECK(xi.max_offdiagonal() == doctest::Approx(0.250).epsilon(5e-4));
    CHECK(cross_corr(ModulationConfig(7, 4), DecoderKind::ML).max_offdiagonal() < 5e-4);
    CHECK(cross_corr(ModulationConfig(9, 4), DecoderKind::ML).max_offdiagonal() ==
          doctest::Approx(0.053).epsilon(1e-2));
}

TEST_CASE("fft-kind cross correlation matches a direct DFT") {
    const ModulationConfig cfg(7, 3);
    const auto xi = cross_corr(cfg, DecoderKind::FFT);
    const auto xd = downchirp(cfg);
    const auto w = lb_waveform(9, cfg);
    const auto M = static_cast<std::size_t>(cfg.M());
    for (std::size_t i : {std::size_t{0}, std::size_t{9}, std::size_t{100}}) {
        cdouble acc{0, 0};
        for (std::size_t k = 0; k < M; ++k)
            acc += w.samples[k] * xd[k] *
                   std::polar(1.0, -2.0 * kPi * static_cast<double>(k * i) / static_cast<double>(M));
        CHECK(std::abs(xi.at(9, static_cast<std::int64_t>(i)) - acc) < 1e-10);
    }
}

TEST_CASE("streaming max matches the full matrix") {
    for (int sf : {7, 8}) {
        for (int n : {2, 3}) {
            const ModulationConfig cfg(sf, n);
            const double full = cross_corr(cfg, DecoderKind::ML).max_offdiagonal();
            CHECK(max_cross_corr(cfg, DecoderKind::ML) == doctest::Approx(full).epsilon(2e-5));
        }
    }
}

TEST_CASE("fft diagonal reproduces the Table III kappa at N=2") {
    const ModulationConfig cfg(7, 2);
    const auto xi = cross_corr_cached(cfg, DecoderKind::FFT);
    const double kappa = std::norm(xi->at(0, 0)) * static_cast<double>(cfg.M()) * 0.1;
    CHECK(kappa == doctest::Approx(10.51).epsilon(1e-3));
}

TEST_CASE("max off-diagonal nonincreasing in N") {
    for (int sf : {7, 8, 9}) {
        double prev = 1.0;
        for (int n : {2, 3, 4, 5}) {
            const double v = max_cross_corr(ModulationConfig(sf, n), DecoderKind::ML);
            CHECK(v <= prev + 5e-4);
            prev = v;
        }
    }
}

TEST_CASE("row profiles cluster the off-diagonals") {
    const ModulationConfig cfg(7, 2);
    const auto xi = cross_corr(cfg, DecoderKind::ML);
    const auto prof = row_profiles(xi);
    REQUIRE(prof.size() == static_cast<std::size_t>(cfg.M()));
    for (const auto& p : prof) {
        std::int64_t total = 0;
        for (const auto& [mag, count] : p.offdiag) total += count;
        CHECK(total == cfg.M() - 1);
    }
    CHECK(prof[0].diag == doctest::Approx(1.0).epsilon(1e-12));
    // degenerate rows collapse far below M-1 distinct values
    CHECK(prof[0].offdiag.size() < 40);
}

TEST_CASE("cross_corr refuses matrices beyond the memory guard") {
    CHECK_THROWS_AS(cross_corr(ModulationConfig(13, 2), DecoderKind::ML), std::invalid_argument);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(ModulationConfig(0, 2), std::invalid_argument);
    CHECK_THROWS_AS(ModulationConfig(7, 0), std::invalid_argument);
    CHECK_THROWS_AS(ModulationConfig(7, 2, -1.0), std::invalid_argument);
    CHECK(ModulationConfig(5, 2).nonstandard_sf);
    CHECK_FALSE(ModulationConfig(9, 2).nonstandard_sf);
}
