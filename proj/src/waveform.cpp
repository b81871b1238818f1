#include "lbphy/waveform.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cblas.h>

#include "blas_guard.hpp"
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "lbphy/fft.hpp"
#include "lbphy/parallel.hpp"

namespace lbphy {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
} // namespace

double midrise_quantize(double x, int n_levels_exp) {
    if (!std::isfinite(x)) throw std::invalid_argument("midrise_quantize: non-finite input");
    // reduce to (-pi, pi] by the 2pi-periodic extension
    double xt = std::remainder(x, kTwoPi); // [-pi, pi]
    if (xt <= -kPi) xt = kPi;
    const double scale = std::ldexp(1.0, n_levels_exp - 1) / kPi; // 2^{N-1}/pi
    return (std::floor(scale * xt) + 0.5) / scale;
}

namespace {

// k pi (2a - M + k) / M  ==  pi q / M with q = k(2a - M + k) mod 2M, exact.
std::int64_t sample_phase_units(std::int64_t k, std::int64_t a, std::int64_t M) {
    const std::int64_t two_m = 2 * M;
    std::int64_t q = (k % two_m) * (((2 * a - M + k) % two_m + two_m) % two_m) % two_m;
    return (q % two_m + two_m) % two_m;
}

// quantizer level of phase (pi q / M): floor(q 2^{N-1} / M), exact
std::int64_t level_of_units(std::int64_t q, const ModulationConfig& cfg) {
    const int shift = cfg.sf + 1 - cfg.n_levels_exp;
    return shift >= 0 ? (q >> shift) : (q << -shift);
}

} // namespace

double lb_sample_phase(std::int64_t k, std::int64_t a, const ModulationConfig& cfg) {
    const std::int64_t q = sample_phase_units(k, a, cfg.M());
    const std::int64_t lvl = level_of_units(q, cfg);
    return static_cast<double>(2 * lvl + 1) * kPi / std::ldexp(1.0, cfg.n_levels_exp);
}

double lora_sample_phase(std::int64_t k, std::int64_t a, const ModulationConfig& cfg) {
    const std::int64_t q = sample_phase_units(k, a, cfg.M());
    return kPi * static_cast<double>(q) / static_cast<double>(cfg.M());
}

double chirp_phase_arg(double t, std::int64_t a, const ModulationConfig& cfg) {
    const auto M = cfg.M();
    const double B = cfg.bandwidth_hz;
    if (t < -1e-12 / B || t > (static_cast<double>(M) + 1e-12) / B)
        throw std::invalid_argument("lb_phase: t outside the symbol interval");
    // phase = (pi / M) * g(s),  s = B t,  g = s^2 + (2a - M - 2M u(t - tau_a)) s
    double s = B * t;
    double si = std::floor(s);
    if (s - si > 0.5) si += 1.0;
    double sf = s - si;
    if (std::abs(sf) < 1e-9) sf = 0.0; // sample-instant snap
    const std::int64_t ki = static_cast<std::int64_t>(si);
    const std::int64_t ustep = (s >= static_cast<double>(M - a)) ? 1 : 0; // u(0) = 1
    const std::int64_t lin = 2 * a - M - 2 * M * ustep;
    const std::int64_t two_m = 2 * M;
    // integer part of g mod 2M, exact
    const std::int64_t gi = ((ki % two_m) * ((ki + lin) % two_m) % two_m + two_m) % two_m;
    // small residual: 2 si sf + sf^2 + lin sf
    double gres = sf * (2.0 * si + sf + static_cast<double>(lin));
    double g = std::fmod(static_cast<double>(gi) + gres, static_cast<double>(two_m));
    if (g < 0.0) g += static_cast<double>(two_m);
    // snap to the lattice so exact cell-edge arguments quantize like the
    // integer path
    const double gr = std::round(g);
    if (std::abs(g - gr) < 1e-6) g = gr;
    return kPi * g / static_cast<double>(M);
}

double lb_phase(double t, std::int64_t a, const ModulationConfig& cfg) {
    const double arg = chirp_phase_arg(t, a, cfg);
    // arg is already in [0, 2pi); quantize on the exact lattice when integral
    const double g = arg * static_cast<double>(cfg.M()) / kPi;
    const double gr = std::round(g);
    if (std::abs(g - gr) < 1e-9) {
        const std::int64_t lvl = level_of_units(static_cast<std::int64_t>(gr), cfg);
        return static_cast<double>(2 * lvl + 1) * kPi / std::ldexp(1.0, cfg.n_levels_exp);
    }
    return midrise_quantize(arg, cfg.n_levels_exp);
}

double Waveform::energy() const {
    double e = 0.0;
    for (const auto& s : samples) e += std::norm(s);
    return e;
}

Waveform lb_waveform(std::int64_t a, const ModulationConfig& cfg) {
    const auto M = cfg.M();
    if (a < 0 || a >= M) throw std::invalid_argument("lb_waveform: symbol out of range");
    Waveform w{cfg, a, WaveKind::LB, {}};
    w.samples.resize(static_cast<std::size_t>(M));
    const double amp = 1.0 / std::sqrt(static_cast<double>(M));
    for (std::int64_t k = 0; k < M; ++k)
        w.samples[static_cast<std::size_t>(k)] = std::polar(amp, lb_sample_phase(k, a, cfg));
    return w;
}

Waveform lora_waveform(std::int64_t a, const ModulationConfig& cfg) {
    const auto M = cfg.M();
    if (a < 0 || a >= M) throw std::invalid_argument("lora_waveform: symbol out of range");
    Waveform w{cfg, a, WaveKind::LoRa, {}};
    w.samples.resize(static_cast<std::size_t>(M));
    const double amp = 1.0 / std::sqrt(static_cast<double>(M));
    for (std::int64_t k = 0; k < M; ++k)
        w.samples[static_cast<std::size_t>(k)] = std::polar(amp, lora_sample_phase(k, a, cfg));
    return w;
}

std::vector<cdouble> downchirp(const ModulationConfig& cfg) {
    const auto M = cfg.M();
    std::vector<cdouble> d(static_cast<std::size_t>(M));
    const double amp = 1.0 / std::sqrt(static_cast<double>(M));
    for (std::int64_t k = 0; k < M; ++k) {
        // -2pi k^2/(2M) + pi k = -pi k (k - M)/M: conjugate of the a=0 upchirp phase
        const std::int64_t q = sample_phase_units(k, 0, M);
        d[static_cast<std::size_t>(k)] = std::polar(amp, -kPi * static_cast<double>(q) /
                                                             static_cast<double>(M));
    }
    return d;
}

double CrossCorrMatrix::max_offdiagonal() const {
    const auto M = config.M();
    double best = 0.0;
    for (std::int64_t a = 0; a < M; ++a)
        for (std::int64_t i = 0; i < M; ++i)
            if (i != a) best = std::max(best, std::abs(at(a, i)));
    return best;
}

CrossCorrMatrix cross_corr(const ModulationConfig& cfg, DecoderKind kind) {
    const auto M = cfg.M();
    if (M > 4096)
        throw std::invalid_argument(
            "cross_corr: M > 4096 would need >256 MiB; use max_cross_corr (streaming) instead");
    const auto m = static_cast<std::size_t>(M);
    CrossCorrMatrix out{cfg, kind, {}};
    out.xi.resize(m * m);

    std::vector<cdouble> bank(m * m);
    parallel_for(m, [&](std::size_t a) {
        const auto w = lb_waveform(static_cast<std::int64_t>(a), cfg);
        std::copy(w.samples.begin(), w.samples.end(), bank.begin() + a * m);
    });

    if (kind == DecoderKind::ML) {
        // xi = X X^H
        using MatC = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        Eigen::Map<const MatC> X(bank.data(), static_cast<Eigen::Index>(m),
                                 static_cast<Eigen::Index>(m));
        Eigen::Map<MatC> XI(out.xi.data(), static_cast<Eigen::Index>(m),
                            static_cast<Eigen::Index>(m));
        const Eigen::Index rows = static_cast<Eigen::Index>(m);
        const Eigen::Index block = 64;
        parallel_for(static_cast<std::size_t>((rows + block - 1) / block), [&](std::size_t bi) {
            const Eigen::Index r0 = static_cast<Eigen::Index>(bi) * block;
            const Eigen::Index nr = std::min(block, rows - r0);
            XI.middleRows(r0, nr).noalias() = X.middleRows(r0, nr) * X.adjoint();
        });
    } else {
        const auto xd = downchirp(cfg);
        Fft<double> fft(m);
        parallel_for(m, [&](std::size_t a) {
            std::vector<cdouble> buf(m);
            for (std::size_t k = 0; k < m; ++k) buf[k] = bank[a * m + k] * xd[k];
            fft.forward(buf);
            std::copy(buf.begin(), buf.end(), out.xi.begin() + a * m);
        });
    }
    return out;
}

std::shared_ptr<const CrossCorrMatrix> cross_corr_cached(const ModulationConfig& cfg,
                                                         DecoderKind kind) {
    struct Key {
        int sf, n, kind;
        auto operator<=>(const Key&) const = default;
    };
    static std::map<Key, std::shared_ptr<const CrossCorrMatrix>> cache;
    static std::mutex mu;
    const Key key{cfg.sf, cfg.n_levels_exp, static_cast<int>(kind)};
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto value = std::make_shared<const CrossCorrMatrix>(cross_corr(cfg, kind));
    std::lock_guard lock(mu);
    return cache.try_emplace(key, std::move(value)).first->second;
}

double max_cross_corr(const ModulationConfig& cfg, DecoderKind kind) {
    const auto M = cfg.M();
    const auto m = static_cast<std::size_t>(M);

    if (kind == DecoderKind::FFT) {
        // rows are independent length-M FFTs; stream them
        const auto xd = downchirp(cfg);
        Fft<double> fft(m);
        std::vector<double> row_max(m, 0.0);
        parallel_for(m, [&](std::size_t a) {
            std::vector<cdouble> buf(m);
            const auto w = lb_waveform(static_cast<std::int64_t>(a), cfg);
            for (std::size_t k = 0; k < m; ++k) buf[k] = w.samples[k] * xd[k];
            fft.forward(buf);
            double best = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                if (i != a) best = std::max(best, std::abs(buf[i]));
            row_max[a] = best;
        });
        return *std::max_element(row_max.begin(), row_max.end());
    }
    if (M <= 512) return cross_corr(cfg, kind).max_offdiagonal();
    // single-precision waveform bank; |xi| only needs ~1e-5 accuracy here
    std::vector<std::complex<float>> bank(m * m);
    parallel_for(m, [&](std::size_t a) {
        for (std::size_t k = 0; k < m; ++k) {
            const double ph = lb_sample_phase(static_cast<std::int64_t>(k),
                                              static_cast<std::int64_t>(a), cfg);
            bank[a * m + k] = std::complex<float>(static_cast<float>(std::cos(ph)),
                                                  static_cast<float>(std::sin(ph)));
        }
    });

    // Hermitian: each row panel only needs columns up to its last row, which
    // halves the work. Panels run in parallel over single-threaded BLAS.
    blas_serial();
    const std::size_t panel = std::min<std::size_t>(m, 256);
    const std::size_t n_panels = (m + panel - 1) / panel;
    std::vector<double> panel_max(n_panels, 0.0);
    parallel_for(n_panels, [&](std::size_t p) {
        const std::size_t r0 = p * panel;
        const std::size_t nr = std::min(panel, m - r0);
        const std::size_t cols = r0 + nr;
        std::vector<std::complex<float>> prod(nr * cols);
        const std::complex<float> one(1.f, 0.f), zero(0.f, 0.f);
        cblas_cgemm3m(CblasRowMajor, CblasNoTrans, CblasConjTrans, static_cast<int>(nr),
                      static_cast<int>(cols), static_cast<int>(m), &one, bank.data() + r0 * m,
                      static_cast<int>(m), bank.data(), static_cast<int>(m), &zero, prod.data(),
                      static_cast<int>(cols));
        double best = 0.0;
        for (std::size_t r = 0; r < nr; ++r)
            for (std::size_t i = 0; i < r0 + r; ++i) // strictly below the diagonal
                best = std::max(best, static_cast<double>(std::abs(prod[r * cols + i])));
        panel_max[p] = best;
    });
    const double best = *std::max_element(panel_max.begin(), panel_max.end());
    return best / static_cast<double>(M); // bank rows were unnormalized (|sample| = 1)
}

std::vector<RowProfile> row_profiles(const CrossCorrMatrix& m) {
    const auto M = m.config.M();
    std::vector<RowProfile> out(static_cast<std::size_t>(M));
    parallel_for(static_cast<std::size_t>(M), [&](std::size_t a) {
        auto row = m.row(static_cast<std::int64_t>(a));
        std::vector<double> mags;
        mags.reserve(row.size() - 1);
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i == a) continue;
            mags.push_back(std::abs(row[i]));
        }
        std::sort(mags.begin(), mags.end());
        RowProfile p;
        p.diag = std::abs(row[a]);
        for (std::size_t i = 0; i < mags.size();) {
            std::size_t j = i + 1;
            while (j < mags.size() && mags[j] - mags[i] < 1e-12 * (1.0 + mags[i])) ++j;
            p.offdiag.emplace_back(mags[i], static_cast<std::int64_t>(j - i));
            i = j;
        }
        out[a] = std::move(p);
    });
    return out;
}

} // namespace lbphy
