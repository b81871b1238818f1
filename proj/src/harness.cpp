#include "lbphy/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

#include "lbphy/decoder.hpp"
#include "lbphy/fft.hpp"
#include "lbphy/kvfile.hpp"
#include "lbphy/parallel.hpp"
#include "lbphy/rng.hpp"
#include "lbphy/spectral.hpp"
#include "blas_guard.hpp"



namespace lbphy {

namespace {

constexpr std::int64_t kBlock = 1024; // trials per RNG block

struct BlockResult {
    std::int64_t errors = 0;
    std::int64_t outage_skips = 0;
};

// One deterministic block of trials for a single SNR point.
BlockResult run_block(const Scenario& sc, double snr_lin, std::size_t point, std::size_t block,
                      double gamma0) {
    const auto& cfg = sc.cfg;
    const auto M = static_cast<std::size_t>(cfg.M());
    auto bank = waveform_bank_cached(cfg);
    Rng rng(sc.seed, point, block);

    const double mean_power = sc.fading.mean_power();
    // gamma grid semantics: AWGN -> instantaneous SNR; fading/waterfill ->
    // mean SNR, so the per-unit-|h|^2 scale divides out the channel power.
    const double gamma_ref = sc.channel == ChannelModel::Awgn ? snr_lin : snr_lin / mean_power;
    const double sigma2 = 1.0 / (2.0 * gamma_ref * static_cast<double>(M));
    const float sd = static_cast<float>(std::sqrt(sigma2));

    BlockResult res;
    std::vector<std::int64_t> tx(kBlock);
    std::vector<std::complex<float>> rows;
    std::vector<std::int64_t> decisions;

    const bool ml = sc.decoder == DecoderKind::ML;
    if (ml) {
        rows.resize(static_cast<std::size_t>(kBlock) * M);
        decisions.resize(kBlock);
    }

    thread_local std::shared_ptr<Fft<float>> fft_plan;
    if (!ml && (!fft_plan || fft_plan->size() != M)) fft_plan = std::make_shared<Fft<float>>(M);
    std::vector<std::complex<float>> dech;
    std::vector<std::complex<float>> xd_f;
    if (!ml) {
        dech.resize(M);
        const auto xd = downchirp(cfg);
        xd_f.resize(M);
        for (std::size_t k = 0; k < M; ++k)
            xd_f[k] = std::complex<float>(static_cast<float>(xd[k].real()),
                                          static_cast<float>(xd[k].imag()));
    }

    for (std::int64_t t = 0; t < kBlock; ++t) {
        const auto a = static_cast<std::int64_t>(rng.below(M));
        tx[static_cast<std::size_t>(t)] = a;

        std::complex<double> h{1.0, 0.0};
        double es = 1.0;
        if (sc.channel == ChannelModel::Fading) {
            h = sample_double_nakagami(sc.fading, rng).h();
        } else if (sc.channel == ChannelModel::Waterfill) {
            // conditional SER: outage draws are skipped, not counted
            for (int guard = 0;; ++guard) {
                const auto d = sample_double_nakagami(sc.fading, rng);
                const double g = gamma_ref * d.h_amp * d.h_amp;
                if (g > gamma0) {
                    h = d.h();
                    es = 1.0 / gamma0 - 1.0 / g;
                    break;
                }
                ++res.outage_skips;
                if (guard > 10000000)
                    throw std::runtime_error("mc_ser: outage probability ~1, water-filling stuck");
            }
        }
        const std::complex<float> scale(static_cast<float>(h.real() * std::sqrt(es)),
                                        static_cast<float>(h.imag() * std::sqrt(es)));

        const auto* w = bank->waveforms.data() + static_cast<std::size_t>(a) * M;
        std::complex<float>* dst =
            ml ? rows.data() + static_cast<std::size_t>(t) * M : dech.data();
        for (std::size_t k = 0; k < M; ++k) {
            const std::complex<float> noise(sd * static_cast<float>(rng.normal()),
                                            sd * static_cast<float>(rng.normal()));
            dst[k] = scale * w[k] + noise;
        }
        if (!ml) {
            for (std::size_t k = 0; k < M; ++k) dech[k] *= xd_f[k];
            fft_plan->forward(dech.data());
            std::size_t best = 0;
            float bv = std::norm(dech[0]);
            for (std::size_t i = 1; i < M; ++i) {
                const float v = std::norm(dech[i]);
                if (v > bv) {
                    bv = v;
                    best = i;
                }
            }
            if (static_cast<std::int64_t>(best) != a) ++res.errors;
        }
    }
    if (ml) {
        ml_decode_batch(*bank, rows, kBlock, decisions);
        for (std::int64_t t = 0; t < kBlock; ++t)
            if (decisions[static_cast<std::size_t>(t)] != tx[static_cast<std::size_t>(t)])
                ++res.errors;
    }
    return res;
}

} // namespace

std::pair<double, double> wilson_interval(std::int64_t errors, std::int64_t trials) {
    if (trials <= 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double z2n = z * z / n;
    const double center = (p + 0.5 * z2n) / (1.0 + z2n);
    const double half = z * std::sqrt(p * (1.0 - p) / n + 0.25 * z2n / n) / (1.0 + z2n);
    double lo = std::max(0.0, center - half);
    double hi = std::min(1.0, center + half);
    if (errors == 0) lo = 0.0;
    if (errors == trials) hi = 1.0;
    return {lo, hi};
}

std::vector<MCEstimate> mc_ser(const Scenario& sc) {
    if (sc.trials < 1) throw ScenarioError("trials: must be >= 1");
    if (sc.snr_db.empty()) throw ScenarioError("snr_db: grid must be nonempty");
    if (!std::is_sorted(sc.snr_db.begin(), sc.snr_db.end()))
        throw ScenarioError("snr_db: grid must be sorted ascending");
    blas_serial();

    std::vector<MCEstimate> out(sc.snr_db.size());
    for (std::size_t pi = 0; pi < sc.snr_db.size(); ++pi) {
        const double snr_lin = std::pow(10.0, sc.snr_db[pi] / 10.0);
        double gamma0 = 0.0;
        if (sc.channel == ChannelModel::Waterfill)
            gamma0 = waterfill_outage(snr_lin / sc.fading.mean_power(), sc.fading);

        std::vector<BlockResult> results;
        std::int64_t done_blocks = 0;
        std::int64_t planned = std::max<std::int64_t>(sc.trials, kBlock);
        std::int64_t errors = 0, skips = 0;
        for (;;) {
            const auto want_blocks = (planned + kBlock - 1) / kBlock;
            results.resize(static_cast<std::size_t>(want_blocks));
            const std::int64_t first = done_blocks;
            parallel_for(static_cast<std::size_t>(want_blocks - first), [&](std::size_t i) {
                const auto b = static_cast<std::size_t>(first) + i;
                results[b] = run_block(sc, snr_lin, pi, b, gamma0);
            });
            errors = 0;
            skips = 0;
            for (const auto& r : results) { // ordered deterministic reduction
                errors += r.errors;
                skips += r.outage_skips;
            }
            done_blocks = want_blocks;
            const std::int64_t trials_done = done_blocks * kBlock;
            if (trials_done >= sc.trial_cap) break;
            if (errors >= sc.target_errors && trials_done >= sc.trials) break;
            planned = std::min(sc.trial_cap, std::max(trials_done * 2, trials_done + kBlock));
        }
        MCEstimate e;
        e.snr_db = sc.snr_db[pi];
        e.trials = done_blocks * kBlock;
        e.errors = errors;
        e.outage_skips = skips;
        e.ser_hat = static_cast<double>(errors) / static_cast<double>(e.trials);
        std::tie(e.ci_lo, e.ci_hi) = wilson_interval(errors, e.trials);
        out[pi] = e;
    }
    return out;
}

std::vector<SerPoint> analytic_curve(const Scenario& sc) {
    std::vector<SerPoint> pts(sc.snr_db.size());
    parallel_for(sc.snr_db.size(), [&](std::size_t i) {
        const double lin = std::pow(10.0, sc.snr_db[i] / 10.0);
        switch (sc.channel) {
            case ChannelModel::Awgn:
                pts[i] = ser_awgn(lin, sc.cfg, sc.decoder, sc.analytic);
                break;
            case ChannelModel::Fading:
                pts[i] = ser_fading_fixed(lin, sc.cfg, sc.decoder, sc.fading, sc.analytic);
                break;
            case ChannelModel::Waterfill:
                pts[i] = ser_fading_waterfill(lin / sc.fading.mean_power(), sc.cfg, sc.decoder,
                                              sc.fading, sc.analytic);
                break;
        }
    });
    return pts;
}

static Scenario parse_scenario_impl(const std::string& path);

std::vector<double> parse_snr_grid(const std::string& text) {
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        double start, stop, step;
        char c1, c2;
        std::istringstream is(text);
        if (!(is >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0)
            throw ScenarioError("snr_db: expected start:stop:step, got '" + text + "'");
        for (double v = start; v <= stop + 1e-9; v += step) grid.push_back(v);
    } else {
        std::istringstream is(text);
        double v;
        while (is >> v) grid.push_back(v);
    }
    if (grid.empty()) throw ScenarioError("snr_db: empty grid '" + text + "'");
    return grid;
}

Scenario parse_scenario(const std::string& path) {
    try {
        return parse_scenario_impl(path);
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::runtime_error& e) {
        throw ScenarioError(e.what());
    }
}

static Scenario parse_scenario_impl(const std::string& path) {
    KvFile kv = KvFile::load(path);
    Scenario sc;
    try {
        const int sf = static_cast<int>(kv.get_int("sf"));
        const int n = static_cast<int>(kv.get_int("n"));
        const double bw = kv.get_double_or("bandwidth_hz", 125e3);
        sc.cfg = ModulationConfig(sf, n, bw);
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(std::string("sf/n/bandwidth_hz: ") + e.what());
    }

    const std::string mode = kv.get_or("mode", "awgn");
    if (mode == "awgn")
        sc.channel = ChannelModel::Awgn;
    else if (mode == "fading")
        sc.channel = ChannelModel::Fading;
    else if (mode == "waterfill")
        sc.channel = ChannelModel::Waterfill;
    else
        throw ScenarioError("mode: expected awgn|fading|waterfill, got '" + mode + "'");

    const std::string dec = kv.get_or("decoder", "ml");
    if (dec == "ml")
        sc.decoder = DecoderKind::ML;
    else if (dec == "fft")
        sc.decoder = DecoderKind::FFT;
    else
        throw ScenarioError("decoder: expected ml|fft, got '" + dec + "'");

    sc.snr_db = parse_snr_grid(kv.get("snr_db"));
    std::sort(sc.snr_db.begin(), sc.snr_db.end());
    sc.trials = kv.get_int_or("trials", 100000);
    sc.trial_cap = kv.get_int_or("trial_cap", 2000000);
    sc.target_errors = kv.get_int_or("target_errors", 100);
    sc.seed = static_cast<std::uint64_t>(kv.get_int_or("seed", 1));
    sc.with_analytic = kv.get_or("analytic", "true") != "false";
    sc.analytic.n_gh = static_cast<int>(kv.get_int_or("n_gh", 64));
    sc.analytic.n_gl = static_cast<int>(kv.get_int_or("n_gl", 64));
    sc.analytic.symbol_stride = kv.get_int_or("symbol_stride", 1);
    sc.out_prefix = kv.get_or("out", "");

    if (sc.channel != ChannelModel::Awgn) {
        const double m1 = kv.get_double_or("m1", 1.0);
        const double m2 = kv.get_double_or("m2", 1.0);
        try {
            if (kv.has("d_ratio")) {
                const double rho = kv.get_double("d_ratio");
                if (!(rho > 0.0)) throw ScenarioError("d_ratio: must be positive");
                // total reflected path fixed at 2 so rho = 1 gives unit spreads
                sc.fading = FadingParams::from_distances(m1, m2, 2.0 / (1.0 + rho),
                                                         2.0 * rho / (1.0 + rho));
            } else if (kv.has("d1") || kv.has("d2")) {
                sc.fading = FadingParams::from_distances(m1, m2, kv.get_double("d1"),
                                                         kv.get_double("d2"));
            } else {
                sc.fading = FadingParams(m1, kv.get_double_or("omega1", 1.0), m2,
                                         kv.get_double_or("omega2", 1.0));
            }
        } catch (const std::invalid_argument& e) {
            throw ScenarioError(std::string("fading parameters: ") + e.what());
        }
        sc.fading.monostatic = kv.get_or("monostatic", "false") == "true";
    }
    return sc;
}

namespace {

std::string git_describe() {
    std::FILE* p = popen("git describe --always --dirty 2>/dev/null", "r");
    if (!p) return "unknown";
    char buf[128] = {0};
    std::string out;
    if (std::fgets(buf, sizeof buf, p)) out = buf;
    pclose(p);
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
    return out.empty() ? "unknown" : out;
}

void write_dat(const std::string& path, const std::vector<std::pair<double, double>>& rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f.precision(10);
    for (const auto& [x, y] : rows) f << x << " " << y << "\n";
}

nlohmann::json scenario_json(const Scenario& sc) {
    nlohmann::json j;
    j["sf"] = sc.cfg.sf;
    j["n"] = sc.cfg.n_levels_exp;
    j["bandwidth_hz"] = sc.cfg.bandwidth_hz;
    j["mode"] = sc.channel == ChannelModel::Awgn      ? "awgn"
                : sc.channel == ChannelModel::Fading ? "fading"
                                                      : "waterfill";
    j["decoder"] = to_string(sc.decoder);
    j["snr_db"] = sc.snr_db;
    j["trials_min"] = sc.trials;
    j["trial_cap"] = sc.trial_cap;
    j["target_errors"] = sc.target_errors;
    j["seed"] = sc.seed;
    j["n_gh"] = sc.analytic.n_gh;
    j["n_gl"] = sc.analytic.n_gl;
    if (sc.channel != ChannelModel::Awgn) {
        j["m1"] = sc.fading.m1;
        j["m2"] = sc.fading.m2;
        j["omega1"] = sc.fading.omega1;
        j["omega2"] = sc.fading.omega2;
        j["monostatic"] = sc.fading.monostatic;
    }
    j["git"] = git_describe();
    return j;
}

} // namespace

void run_scenario(const Scenario& sc) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string prefix = sc.out_prefix.empty() ? "scenario" : sc.out_prefix;

    auto mc = mc_ser(sc);
    std::vector<std::pair<double, double>> mc_rows;
    for (const auto& e : mc) mc_rows.emplace_back(e.snr_db, e.ser_hat);
    write_dat(prefix + "_mc.dat", mc_rows);

    nlohmann::json meta = scenario_json(sc);
    meta["mc"] = nlohmann::json::array();
    for (const auto& e : mc)
        meta["mc"].push_back({{"snr_db", e.snr_db},
                              {"ser", e.ser_hat},
                              {"trials", e.trials},
                              {"errors", e.errors},
                              {"ci_lo", e.ci_lo},
                              {"ci_hi", e.ci_hi},
                              {"outage_skips", e.outage_skips}});

    if (sc.with_analytic) {
        auto an = analytic_curve(sc);
        std::vector<std::pair<double, double>> an_rows;
        for (const auto& p : an) an_rows.emplace_back(10.0 * std::log10(p.snr), p.ser);
        write_dat(prefix + "_analytic.dat", an_rows);
        meta["analytic_method"] = an.empty() ? "" : an.front().method;
        meta["analytic_branch"] = an.empty() ? "" : an.front().branch;
    }

    meta["elapsed_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream mf(prefix + "_meta.json");
    mf << meta.dump(2) << "\n";
    std::cout << "wrote " << prefix << "_mc.dat";
    if (sc.with_analytic) std::cout << " and " << prefix << "_analytic.dat";
    std::cout << "\n";
}

void run_scenario_file(const std::string& path, const std::string& out_dir) {
    Scenario sc = parse_scenario(path);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const std::string base =
            sc.out_prefix.empty() ? std::filesystem::path(path).stem().string() : sc.out_prefix;
        sc.out_prefix = (std::filesystem::path(out_dir) / base).string();
    } else if (sc.out_prefix.empty()) {
        sc.out_prefix = std::filesystem::path(path).stem().string();
    }
    run_scenario(sc);
}

} // namespace lbphy
