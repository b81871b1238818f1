#include "lbphy/decoder.hpp"

#include <cblas.h>

#include "blas_guard.hpp"
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "lbphy/fft.hpp"
#include "lbphy/parallel.hpp"
#include "lbphy/waveform.hpp"

namespace lbphy {

namespace {

std::int64_t argmax_lowest(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return static_cast<std::int64_t>(best);
}

} // namespace

DecoderOutput ml_decode(std::span<const std::complex<double>> r, const ModulationConfig& cfg) {
    const auto M = static_cast<std::size_t>(cfg.M());
    if (r.size() != M) throw std::invalid_argument("ml_decode: received vector length != M");
    auto bank = waveform_bank_cached(cfg);
    DecoderOutput out;
    out.decoder_kind = DecoderKind::ML;
    out.bin_magnitudes.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
        std::complex<double> acc{0.0, 0.0};
        const auto* row = bank->conj_waveforms.data() + i * M;
        for (std::size_t k = 0; k < M; ++k)
            acc += r[k] * std::complex<double>(row[k].real(), row[k].imag());
        out.bin_magnitudes[i] = std::abs(acc);
    }
    out.decided_symbol = argmax_lowest(out.bin_magnitudes);
    return out;
}

DecoderOutput fft_decode(std::span<const std::complex<double>> r, const ModulationConfig& cfg) {
    const auto M = static_cast<std::size_t>(cfg.M());
    if (r.size() != M) throw std::invalid_argument("fft_decode: received vector length != M");
    static std::map<std::size_t, std::shared_ptr<Fft<double>>> plans;
    static std::mutex mu;
    std::shared_ptr<Fft<double>> plan;
    {
        std::lock_guard lock(mu);
        auto& p = plans[M];
        if (!p) p = std::make_shared<Fft<double>>(M);
        plan = p;
    }
    const auto xd = downchirp(cfg);
    std::vector<cdouble> buf(M);
    for (std::size_t k = 0; k < M; ++k) buf[k] = r[k] * xd[k];
    plan->forward(buf);
    DecoderOutput out;
    out.decoder_kind = DecoderKind::FFT;
    out.bin_magnitudes.resize(M);
    for (std::size_t i = 0; i < M; ++i) out.bin_magnitudes[i] = std::abs(buf[i]);
    out.decided_symbol = argmax_lowest(out.bin_magnitudes);
    return out;
}

std::shared_ptr<const WaveformBank> waveform_bank_cached(const ModulationConfig& cfg) {
    struct Key {
        int sf, n;
        auto operator<=>(const Key&) const = default;
    };
    static std::map<Key, std::shared_ptr<const WaveformBank>> cache;
    static std::mutex mu;
    const Key key{cfg.sf, cfg.n_levels_exp};
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const auto M = static_cast<std::size_t>(cfg.M());
    auto bank = std::make_shared<WaveformBank>();
    bank->config = cfg;
    bank->conj_waveforms.resize(M * M);
    bank->waveforms.resize(M * M);
    parallel_for(M, [&](std::size_t i) {
        const auto w = lb_waveform(static_cast<std::int64_t>(i), cfg);
        for (std::size_t k = 0; k < M; ++k) {
            const auto v = w.samples[k];
            bank->waveforms[i * M + k] =
                std::complex<float>(static_cast<float>(v.real()), static_cast<float>(v.imag()));
            bank->conj_waveforms[i * M + k] =
                std::complex<float>(static_cast<float>(v.real()), static_cast<float>(-v.imag()));
        }
    });
    std::lock_guard lock(mu);
    return cache.try_emplace(key, std::move(bank)).first->second;
}

void ml_decode_batch(const WaveformBank& bank, std::span<const std::complex<float>> rows,
                     std::size_t n, std::span<std::int64_t> decisions) {
    const auto M = static_cast<std::size_t>(bank.config.M());
    if (rows.size() < n * M || decisions.size() < n)
        throw std::invalid_argument("ml_decode_batch: buffer sizes");
    // bins = R * X^T with X already conjugated: bins[t][i] = sum_k r[t][k] conj(x_i[k])
    std::vector<std::complex<float>> bins(n * M);
    const std::complex<float> one(1.f, 0.f), zero(0.f, 0.f);
    cblas_cgemm(CblasRowMajor, CblasNoTrans, CblasTrans, static_cast<int>(n), static_cast<int>(M),
                static_cast<int>(M), &one, rows.data(), static_cast<int>(M),
                bank.conj_waveforms.data(), static_cast<int>(M), &zero, bins.data(),
                static_cast<int>(M));
    for (std::size_t t = 0; t < n; ++t) {
        const auto* b = bins.data() + t * M;
        std::size_t best = 0;
        float bv = std::norm(b[0]);
        for (std::size_t i = 1; i < M; ++i) {
            const float v = std::norm(b[i]);
            if (v > bv) {
                bv = v;
                best = i;
            }
        }
        decisions[t] = static_cast<std::int64_t>(best);
    }
}

} // namespace lbphy
