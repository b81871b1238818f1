#include "lbphy/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "lbphy/fft.hpp"
#include "lbphy/kvfile.hpp"
#include "lbphy/parallel.hpp"
#include "lbphy/rng.hpp"

namespace lbphy {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
} // namespace

BreakpointSet breakpoints(std::int64_t a, const ModulationConfig& cfg) {
    const std::int64_t M = cfg.M();
    if (a < 0 || a >= M) throw std::invalid_argument("breakpoints: symbol out of range");
    const double B = cfg.bandwidth_hz;
    const double Ts = cfg.symbol_duration();
    const int N = cfg.n_levels_exp;

    // level-crossing condition f1(t) = i pi / 2^{N-1}; integer bounds on i
    const std::int64_t A = (M - 2 * a) * (M - 2 * a);
    std::int64_t i_min, i_max;
    if (N <= 3) {
        const std::int64_t den = M << (3 - N);
        i_min = -(A / den); // ceil(-A/den) for A, den >= 0
    } else {
        i_min = -((A << (N - 3)) / M);
    }
    i_max = ((a * (M - a)) << (N - 1)) / M;

    std::vector<double> ts;
    ts.reserve(static_cast<std::size_t>(i_max - i_min + 4));
    ts.push_back(0.0);
    ts.push_back(Ts);
    const double lo = -static_cast<double>(a) / B;
    const double hi = static_cast<double>(M - a) / B;
    for (std::int64_t i = i_min; i <= i_max; ++i) {
        const double disc =
            static_cast<double>(A) + static_cast<double>(i) * static_cast<double>(M) *
                                         std::ldexp(1.0, 3 - N);
        if (disc < 0.0) continue;
        const double s = std::sqrt(disc);
        for (int sign = -1; sign <= 1; sign += 2) {
            double z = (static_cast<double>(M - 2 * a) + sign * s) / (2.0 * B);
            if (z < lo - 1e-12 * Ts || z > hi + 1e-12 * Ts) continue;
            if (z < 0.0) z += static_cast<double>(M) / B;
            if (z < 0.0) z = 0.0;
            if (z > Ts) z = Ts;
            ts.push_back(z);
        }
    }
    std::sort(ts.begin(), ts.end());
    BreakpointSet out{a, cfg, {}, {}};
    out.times.push_back(ts.front());
    for (double t : ts)
        if (t - out.times.back() > 1e-15 * Ts) out.times.push_back(t);
    if (out.times.back() != Ts) out.times.push_back(Ts);

    out.levels.resize(out.times.size() - 1);
    for (std::size_t m = 0; m + 1 < out.times.size(); ++m) {
        const double mid = 0.5 * (out.times[m] + out.times[m + 1]);
        out.levels[m] = midrise_quantize(chirp_phase_arg(mid, a, cfg), N);
    }
    return out;
}

cdouble sa_fourier(const BreakpointSet& bp, double f) {
    const double B = bp.config.bandwidth_hz;
    const double f_eps = 1e-9 * B;
    cdouble acc{0.0, 0.0};
    if (std::abs(f) < f_eps) {
        for (std::size_t m = 0; m < bp.levels.size(); ++m)
            acc += std::polar(bp.times[m + 1] - bp.times[m], bp.levels[m]);
        return acc;
    }
    // e^{j phi} e^{-j pi f (t_m + t_{m+1})} sin(pi f dt) / (pi f)
    for (std::size_t m = 0; m < bp.levels.size(); ++m) {
        const double tm = bp.times[m], tp = bp.times[m + 1];
        acc += std::polar(std::sin(kPi * f * (tp - tm)) / (kPi * f),
                          bp.levels[m] - kPi * f * (tm + tp));
    }
    return acc;
}

cdouble sa_fourier(std::int64_t a, const ModulationConfig& cfg, double f) {
    return sa_fourier(breakpoints(a, cfg), f);
}

SpectrumEvaluator::SpectrumEvaluator(const ModulationConfig& cfg) : cfg_(cfg) {
    const auto M = static_cast<std::size_t>(cfg.M());
    bps_.resize(M);
    parallel_for(M, [&](std::size_t a) { bps_[a] = breakpoints(static_cast<std::int64_t>(a), cfg); });
}

double SpectrumEvaluator::continuous(double f) const {
    const auto M = static_cast<double>(cfg_.M());
    cdouble mean{0.0, 0.0};
    double mean_abs2 = 0.0;
    for (const auto& bp : bps_) {
        const cdouble s = sa_fourier(bp, f);
        mean += s;
        mean_abs2 += std::norm(s);
    }
    mean /= M;
    mean_abs2 /= M;
    double g = (mean_abs2 - std::norm(mean)) / cfg_.symbol_duration();
    return g < 0.0 ? 0.0 : g;
}

std::vector<std::pair<double, double>> SpectrumEvaluator::lines(std::int64_t l_min,
                                                                std::int64_t l_max) const {
    const auto powers = line_powers(l_min, l_max);
    std::vector<std::pair<double, double>> out(powers.size());
    const double df = cfg_.bandwidth_hz / static_cast<double>(cfg_.M());
    for (std::size_t i = 0; i < powers.size(); ++i)
        out[i] = {static_cast<double>(l_min + static_cast<std::int64_t>(i)) * df, powers[i]};
    return out;
}

void SpectrumEvaluator::accumulate_grid(double f0, double df, std::size_t nf,
                                        std::vector<cdouble>& sum, std::vector<double>& abs2) const {
    sum.assign(nf, {0.0, 0.0});
    abs2.assign(nf, 0.0);
    const double f_eps = 1e-9 * cfg_.bandwidth_hz;
    std::mutex reduce_mu;

    parallel_for(bps_.size(), [&](std::size_t ai) {
        const auto& bp = bps_[ai];
        const std::size_t n_edges = bp.times.size();
        // edge coefficients: S_a(f) = (j / 2 pi f) sum_e c_e e^{-j 2 pi f t_e}
        std::vector<cdouble> coef(n_edges);
        std::vector<cdouble> rot(n_edges), step(n_edges);
        coef[0] = -std::polar(1.0, bp.levels.front());
        coef[n_edges - 1] = std::polar(1.0, bp.levels.back());
        for (std::size_t e = 1; e + 1 < n_edges; ++e)
            coef[e] = std::polar(1.0, bp.levels[e - 1]) - std::polar(1.0, bp.levels[e]);
        for (std::size_t e = 0; e < n_edges; ++e) {
            rot[e] = std::polar(1.0, -kTwoPi * f0 * bp.times[e]);
            step[e] = std::polar(1.0, -kTwoPi * df * bp.times[e]);
        }
        std::vector<cdouble> sa(nf);
        for (std::size_t q = 0; q < nf; ++q) {
            const double f = f0 + static_cast<double>(q) * df;
            cdouble acc{0.0, 0.0};
            for (std::size_t e = 0; e < n_edges; ++e) {
                acc += coef[e] * rot[e];
                rot[e] *= step[e];
            }
            if (std::abs(f) < f_eps) {
                sa[q] = sa_fourier(bp, f); // limit form
            } else {
                sa[q] = cdouble(0.0, 1.0) / (kTwoPi * f) * acc;
            }
            if ((q & 1023u) == 1023u)
                for (auto& r : rot) r /= std::abs(r); // keep rotors on the unit circle
        }
        std::lock_guard lock(reduce_mu);
        for (std::size_t q = 0; q < nf; ++q) {
            sum[q] += sa[q];
            abs2[q] += std::norm(sa[q]);
        }
    });
}

SpectrumEvaluator::GridMoments SpectrumEvaluator::grid_moments(double f0, double df,
                                                               std::size_t nf) const {
    GridMoments gm;
    std::vector<cdouble> sum;
    std::vector<double> abs2;
    accumulate_grid(f0, df, nf, sum, abs2);
    const double M = static_cast<double>(cfg_.M());
    gm.mean.resize(nf);
    gm.mean_abs2.resize(nf);
    for (std::size_t q = 0; q < nf; ++q) {
        gm.mean[q] = sum[q] / M;
        gm.mean_abs2[q] = abs2[q] / M;
    }
    return gm;
}

std::vector<double> SpectrumEvaluator::continuous_grid(double f0, double df, std::size_t nf) const {
    std::vector<cdouble> sum;
    std::vector<double> abs2;
    accumulate_grid(f0, df, nf, sum, abs2);
    const double M = static_cast<double>(cfg_.M());
    std::vector<double> g(nf);
    for (std::size_t q = 0; q < nf; ++q) {
        const double v = (abs2[q] / M - std::norm(sum[q] / M)) / cfg_.symbol_duration();
        g[q] = v < 0.0 ? 0.0 : v;
    }
    return g;
}

std::vector<double> SpectrumEvaluator::line_powers(std::int64_t l_min, std::int64_t l_max) const {
    if (l_max < l_min) return {};
    const double df = cfg_.bandwidth_hz / static_cast<double>(cfg_.M());
    std::vector<cdouble> sum;
    std::vector<double> abs2;
    accumulate_grid(static_cast<double>(l_min) * df, df,
                    static_cast<std::size_t>(l_max - l_min + 1), sum, abs2);
    const double Ts = cfg_.symbol_duration();
    const double M = static_cast<double>(cfg_.M());
    std::vector<double> out(sum.size());
    for (std::size_t i = 0; i < sum.size(); ++i) out[i] = std::norm(sum[i]) / (M * M * Ts * Ts);
    return out;
}

std::vector<double> SpectrumEvaluator::binned_total(double f0, double df, std::size_t nf) const {
    std::vector<double> total = continuous_grid(f0, df, nf);
    for (auto& v : total) v *= df;
    const double line_df = cfg_.bandwidth_hz / static_cast<double>(cfg_.M());
    const auto l_lo = static_cast<std::int64_t>(std::ceil((f0 - 0.5 * df) / line_df));
    const auto l_hi = static_cast<std::int64_t>(std::floor((f0 + (nf - 0.5) * df) / line_df));
    const auto lp = line_powers(l_lo, l_hi);
    for (std::size_t i = 0; i < lp.size(); ++i) {
        const double f = static_cast<double>(l_lo + static_cast<std::int64_t>(i)) * line_df;
        const auto bin = static_cast<std::int64_t>(std::llround((f - f0) / df));
        if (bin >= 0 && bin < static_cast<std::int64_t>(nf)) total[static_cast<std::size_t>(bin)] += lp[i];
    }
    return total;
}

std::shared_ptr<const SpectrumEvaluator> spectrum_cached(const ModulationConfig& cfg) {
    struct Key {
        int sf, n;
        double b;
        auto operator<=>(const Key&) const = default;
    };
    static std::map<Key, std::shared_ptr<const SpectrumEvaluator>> cache;
    static std::mutex mu;
    const Key key{cfg.sf, cfg.n_levels_exp, cfg.bandwidth_hz};
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto value = std::make_shared<const SpectrumEvaluator>(cfg);
    std::lock_guard lock(mu);
    return cache.try_emplace(key, std::move(value)).first->second;
}

double psd_continuous(const ModulationConfig& cfg, double f) {
    return spectrum_cached(cfg)->continuous(f);
}

std::vector<std::pair<double, double>> psd_discrete_lines(const ModulationConfig& cfg,
                                                          std::int64_t l_min, std::int64_t l_max) {
    return spectrum_cached(cfg)->lines(l_min, l_max);
}

// ---------------------------------------------------------------------------
// Welch estimate
// ---------------------------------------------------------------------------

SpectrumResult mc_psd(const ModulationConfig& cfg, std::int64_t n_symbols, std::uint64_t seed,
                      WaveKind kind) {
    if (n_symbols < 256) throw std::invalid_argument("mc_psd: need at least 256 symbols");
    const auto M = cfg.M();
    // The quantized chirp carries switching-image bands out to ~(2^N m + 1)B/2;
    // 64x oversampling pushes every fold past 32B so the band under study
    // (|f| <= 3B) stays alias-free to well below -60 dBc, including the
    // alias cross-interference terms a fold would add.
    const int os = 64;
    const std::size_t sps = static_cast<std::size_t>(M) * os; // samples per symbol
    const std::size_t seg = 4 * sps;
    const std::size_t hop = seg / 2;
    const double fs = os * cfg.bandwidth_hz;

    // oversampled unit-amplitude waveform bank
    std::vector<std::vector<cdouble>> bank(static_cast<std::size_t>(M));
    parallel_for(static_cast<std::size_t>(M), [&](std::size_t a) {
        auto& w = bank[a];
        w.resize(sps);
        for (std::size_t k = 0; k < sps; ++k) {
            const double t = static_cast<double>(k) / fs;
            const auto sym = static_cast<std::int64_t>(a);
            const double ph =
                kind == WaveKind::LB ? lb_phase(t, sym, cfg) : chirp_phase_arg(t, sym, cfg);
            w[k] = std::polar(1.0, ph);
        }
    });

    Rng rng(seed, 0x5057u /* 'PW' */);
    std::vector<std::uint32_t> symbols(static_cast<std::size_t>(n_symbols));
    for (auto& s : symbols) s = static_cast<std::uint32_t>(rng.below(static_cast<std::uint64_t>(M)));

    // periodic Hann: spectral lines land on the FFT grid here, and this
    // window confines an on-grid line to exactly three bins (no sidelobes)
    std::vector<double> window(seg);
    double wsum2 = 0.0;
    for (std::size_t n = 0; n < seg; ++n) {
        window[n] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(n) / seg));
        wsum2 += window[n] * window[n];
    }

    const std::size_t total = static_cast<std::size_t>(n_symbols) * sps;
    const std::size_t n_segs = total >= seg ? (total - seg) / hop + 1 : 0;
    Fft<double> fft(seg);

    // chunked periodograms, reduced in chunk order so the result is
    // bit-identical regardless of the thread count
    const std::size_t chunk = 64;
    const std::size_t n_chunks = (n_segs + chunk - 1) / chunk;
    std::vector<std::vector<double>> partial(n_chunks);
    parallel_for(n_chunks, [&](std::size_t c) {
        std::vector<double> local(seg, 0.0);
        std::vector<cdouble> buf(seg);
        const std::size_t s_end = std::min(n_segs, (c + 1) * chunk);
        for (std::size_t s = c * chunk; s < s_end; ++s) {
            const std::size_t base = s * hop;
            for (std::size_t n = 0; n < seg; ++n) {
                const std::size_t idx = base + n;
                buf[n] = bank[symbols[idx / sps]][idx % sps] * window[n];
            }
            fft.forward(buf);
            for (std::size_t k = 0; k < seg; ++k) local[k] += std::norm(buf[k]);
        }
        partial[c] = std::move(local);
    });
    std::vector<double> psd(seg, 0.0);
    for (const auto& local : partial)
        for (std::size_t k = 0; k < seg; ++k) psd[k] += local[k];

    SpectrumResult out;
    out.config = cfg;
    out.freqs.resize(seg);
    out.continuous_psd.resize(seg);
    const double scale = 1.0 / (static_cast<double>(n_segs) * fs * wsum2);
    for (std::size_t k = 0; k < seg; ++k) {
        const auto idx = static_cast<std::size_t>((k + seg / 2) % seg); // fftshift
        const double f = (static_cast<double>(k) - static_cast<double>(seg) / 2.0) * fs /
                         static_cast<double>(seg);
        out.freqs[k] = f;
        out.continuous_psd[k] = psd[idx] * scale;
    }
    std::ostringstream meta;
    meta << "welch segment=" << seg << " hop=" << hop << " window=hann fs_hz=" << fs
         << " n_symbols=" << n_symbols << " segments=" << n_segs << " seed=" << seed;
    out.normalization = meta.str();
    return out;
}

// ---------------------------------------------------------------------------
// Emission mask
// ---------------------------------------------------------------------------

double MaskSpec::limit_at(double offset_hz) const {
    if (vertices.empty()) throw std::runtime_error("MaskSpec: no vertices");
    if (offset_hz <= vertices.front().first) return vertices.front().second;
    if (offset_hz >= vertices.back().first) return vertices.back().second;
    // a step edge shares its offset between two segments; the tighter limit wins
    double lim = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < vertices.size(); ++i) {
        const auto [f0, l0] = vertices[i - 1];
        const auto [f1, l1] = vertices[i];
        if (offset_hz < f0 || offset_hz > f1) continue;
        lim = std::min(lim, f1 == f0 ? std::min(l0, l1)
                                     : l0 + (l1 - l0) * (offset_hz - f0) / (f1 - f0));
    }
    return lim;
}

MaskSpec MaskSpec::load(const std::string& path) {
    KvFile kv = KvFile::load(path);
    MaskSpec mask;
    mask.name = kv.get_or("name", "mask");
    for (const auto& v : kv.get_all("vertex")) {
        std::istringstream is(v);
        double f, l;
        if (!(is >> f >> l))
            throw std::runtime_error("mask file: bad vertex line '" + v + "' (want: offset_hz limit_dbm)");
        mask.vertices.emplace_back(f, l);
    }
    if (mask.vertices.size() < 2) throw std::runtime_error("mask file: need at least two vertices");
    std::stable_sort(mask.vertices.begin(), mask.vertices.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    return mask;
}

MaskReport mask_check(const ModulationConfig& cfg, double tx_power_dbm, double rbw_hz,
                      const MaskSpec& mask) {
    if (!(rbw_hz > 0.0)) throw std::invalid_argument("mask_check: rbw must be positive");
    const double f_end = mask.vertices.back().first;
    const auto nf = static_cast<std::size_t>(std::ceil(f_end / rbw_hz));
    auto eval = spectrum_cached(cfg);
    // bin q covers [q rbw, (q+1) rbw); PSD sampled at the center
    const auto binned = eval->binned_total(0.5 * rbw_hz, rbw_hz, nf);

    MaskReport rep;
    rep.pass = true;
    rep.worst_margin_db = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < nf; ++q) {
        const double fc = (static_cast<double>(q) + 0.5) * rbw_hz;
        const double p_dbm = tx_power_dbm + 10.0 * std::log10(std::max(binned[q], 1e-300));
        const double lim = mask.limit_at(fc);
        const double margin = lim - p_dbm;
        if (margin < rep.worst_margin_db) rep.worst_margin_db = margin;
        if (margin < 0.0) {
            rep.pass = false;
            if (rep.violations.size() < 64) rep.violations.push_back({fc, p_dbm, lim});
        }
    }
    return rep;
}

} // namespace lbphy
