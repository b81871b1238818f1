#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>

#include "lbphy/harness.hpp"
#include "lbphy/spectral.hpp"
#include "lbphy/waveform.hpp"

using namespace lbphy;

namespace {

int run_waveform(int sf, int n, std::int64_t symbol, const std::string& kind,
                 const std::string& out) {
    const ModulationConfig cfg(sf, n);
    const Waveform w = kind == "lora" ? lora_waveform(symbol, cfg) : lb_waveform(symbol, cfg);
    std::ofstream f(out);
    if (!f) {
        std::cerr << "cannot write " << out << "\n";
        return 1;
    }
    f.precision(12);
    f << "k,re,im,phase\n";
    for (std::size_t k = 0; k < w.samples.size(); ++k)
        f << k << "," << w.samples[k].real() << "," << w.samples[k].imag() << ","
          << std::arg(w.samples[k]) << "\n";
    std::cout << "wrote " << out << " (" << w.samples.size() << " samples)\n";
    return 0;
}

int run_psd(int sf, int n, double fmax, std::size_t points, bool continuous_only,
            const std::string& out) {
    const ModulationConfig cfg(sf, n);
    auto eval = spectrum_cached(cfg);
    const double B = cfg.bandwidth_hz;
    const double df = fmax * B / static_cast<double>(points);
    std::ofstream f(out);
    if (!f) {
        std::cerr << "cannot write " << out << "\n";
        return 1;
    }
    f.precision(10);
    if (continuous_only) {
        const auto g = eval->continuous_grid(0.5 * df, df, points);
        for (std::size_t q = 0; q < points; ++q)
            f << (0.5 * df + q * df) / B << " " << 10.0 * std::log10(std::max(g[q] * B, 1e-30))
              << "\n";
    } else {
        const auto tot = eval->binned_total(0.5 * df, df, points);
        for (std::size_t q = 0; q < points; ++q)
            f << (0.5 * df + q * df) / B << " "
              << 10.0 * std::log10(std::max(tot[q] / df * B, 1e-30)) << "\n";
    }
    std::cout << "wrote " << out << "\n";
    return 0;
}

int run_mask(int sf, int n, double bw, double power_dbm, double rbw, const std::string& mask_path) {
    const ModulationConfig cfg(sf, n, bw);
    const MaskSpec mask = MaskSpec::load(mask_path);
    const auto rep = mask_check(cfg, power_dbm, rbw, mask);
    std::cout << (rep.pass ? "PASS" : "FAIL") << ": worst margin " << rep.worst_margin_db
              << " dB against '" << mask.name << "'\n";
    for (const auto& v : rep.violations)
        std::cout << "  violation at " << v.freq_hz / 1e3 << " kHz: " << v.power_dbm
                  << " dBm > limit " << v.limit_dbm << " dBm\n";
    return rep.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LoRa-backscatter physical layer analysis"};
    app.require_subcommand(1);

    // waveform
    auto* wv = app.add_subcommand("waveform", "emit one symbol waveform as CSV");
    int w_sf = 7, w_n = 2;
    std::int64_t w_symbol = 0;
    std::string w_kind = "lb", w_out = "wave.csv";
    wv->add_option("--sf", w_sf, "spreading factor");
    wv->add_option("--n", w_n, "phase levels exponent");
    wv->add_option("--symbol", w_symbol, "symbol index");
    wv->add_option("--kind", w_kind, "lb|lora")->check(CLI::IsMember({"lb", "lora"}));
    wv->add_option("--out", w_out, "output csv path");

    // psd
    auto* ps = app.add_subcommand("psd", "power spectrum data (f/B, dB)");
    int p_sf = 9, p_n = 2;
    double p_fmax = 3.5;
    std::size_t p_points = 4096;
    bool p_cont = false;
    std::string p_out = "psd.dat";
    ps->add_option("--sf", p_sf);
    ps->add_option("--n", p_n);
    ps->add_option("--fmax", p_fmax, "max frequency in units of B");
    ps->add_option("--points", p_points);
    ps->add_flag("--continuous-only", p_cont, "omit discrete spectral lines");
    ps->add_option("--out", p_out);

    // mask
    auto* mk = app.add_subcommand("mask", "check emissions against a spectral mask");
    int m_sf = 7, m_n = 4;
    double m_bw = 250e3, m_power = 14.0, m_rbw = 1000.0;
    std::string m_mask = "data/etsi_g1.toml";
    mk->add_option("--sf", m_sf);
    mk->add_option("--n", m_n);
    mk->add_option("--bandwidth", m_bw, "signal bandwidth Hz");
    mk->add_option("--power-dbm", m_power);
    mk->add_option("--rbw", m_rbw, "resolution bandwidth Hz");
    mk->add_option("--mask", m_mask, "mask vertex file");

    // ser (analytic)
    auto* se = app.add_subcommand("ser", "analytic SER curve");
    std::string s_mode = "awgn", s_dec = "ml", s_grid = "-20:-8:1", s_out = "ser.dat";
    int s_sf = 7, s_n = 2, s_ngh = 64, s_ngl = 64;
    double s_m1 = 1.0, s_m2 = 1.0, s_dratio = 1.0;
    se->add_option("--mode", s_mode)->check(CLI::IsMember({"awgn", "fading", "waterfill"}));
    se->add_option("--sf", s_sf);
    se->add_option("--n", s_n);
    se->add_option("--decoder", s_dec)->check(CLI::IsMember({"ml", "fft"}));
    se->add_option("--snr-db", s_grid, "start:stop:step or list");
    se->add_option("--m1", s_m1);
    se->add_option("--m2", s_m2);
    se->add_option("--d-ratio", s_dratio, "d2/d1 with d1+d2 fixed");
    se->add_option("--n-gh", s_ngh);
    se->add_option("--n-gl", s_ngl);
    se->add_option("--out", s_out);

    // mc
    auto* mc = app.add_subcommand("mc", "Monte Carlo SER sweep");
    std::string c_mode = "awgn", c_dec = "ml", c_grid = "-20:-8:1", c_out = "mc";
    int c_sf = 7, c_n = 2;
    std::int64_t c_trials = 100000, c_cap = 2000000;
    std::uint64_t c_seed = 1;
    double c_m1 = 1.0, c_m2 = 1.0, c_dratio = 1.0;
    mc->add_option("--mode", c_mode)->check(CLI::IsMember({"awgn", "fading", "waterfill"}));
    mc->add_option("--sf", c_sf);
    mc->add_option("--n", c_n);
    mc->add_option("--decoder", c_dec)->check(CLI::IsMember({"ml", "fft"}));
    mc->add_option("--snr-db", c_grid);
    mc->add_option("--trials", c_trials, "minimum trials per point");
    mc->add_option("--trial-cap", c_cap);
    mc->add_option("--seed", c_seed);
    mc->add_option("--m1", c_m1);
    mc->add_option("--m2", c_m2);
    mc->add_option("--d-ratio", c_dratio);
    mc->add_option("--out", c_out, "output prefix");

    // run
    auto* rn = app.add_subcommand("run", "execute a scenario file");
    std::string r_path, r_outdir;
    rn->add_option("scenario", r_path, "scenario .toml path")->required();
    rn->add_option("--out-dir", r_outdir);

    // repro
    auto* rp = app.add_subcommand("repro", "rebuild shipped figure/table data");
    std::string f_id, f_outdir;
    rp->add_option("figure", f_id, "one of: table2 table3 fig4 fig5 fig6 fig7 fig8a fig8b fig9 fig10")
        ->required();
    rp->add_option("--out-dir", f_outdir);

    CLI11_PARSE(app, argc, argv);

    try {
        if (wv->parsed()) return run_waveform(w_sf, w_n, w_symbol, w_kind, w_out);
        if (ps->parsed()) return run_psd(p_sf, p_n, p_fmax, p_points, p_cont, p_out);
        if (mk->parsed()) return run_mask(m_sf, m_n, m_bw, m_power, m_rbw, m_mask);
        if (se->parsed()) {
            Scenario sc;
            sc.cfg = ModulationConfig(s_sf, s_n);
            sc.channel = s_mode == "awgn"      ? ChannelModel::Awgn
                         : s_mode == "fading" ? ChannelModel::Fading
                                               : ChannelModel::Waterfill;
            sc.decoder = s_dec == "ml" ? DecoderKind::ML : DecoderKind::FFT;
            sc.snr_db = parse_snr_grid(s_grid);
            sc.analytic.n_gh = s_ngh;
            sc.analytic.n_gl = s_ngl;
            if (sc.channel != ChannelModel::Awgn)
                sc.fading = FadingParams::from_distances(s_m1, s_m2, 2.0 / (1.0 + s_dratio),
                                                         2.0 * s_dratio / (1.0 + s_dratio));
            const auto pts = analytic_curve(sc);
            std::ofstream f(s_out);
            f.precision(10);
            for (const auto& p : pts) f << 10.0 * std::log10(p.snr) << " " << p.ser << "\n";
            std::cout << "wrote " << s_out << "\n";
            return 0;
        }
        if (mc->parsed()) {
            Scenario sc;
            sc.cfg = ModulationConfig(c_sf, c_n);
            sc.channel = c_mode == "awgn"      ? ChannelModel::Awgn
                         : c_mode == "fading" ? ChannelModel::Fading
                                               : ChannelModel::Waterfill;
            sc.decoder = c_dec == "ml" ? DecoderKind::ML : DecoderKind::FFT;
            sc.snr_db = parse_snr_grid(c_grid);
            sc.trials = c_trials;
            sc.trial_cap = c_cap;
            sc.seed = c_seed;
            sc.out_prefix = c_out;
            if (sc.channel != ChannelModel::Awgn)
                sc.fading = FadingParams::from_distances(c_m1, c_m2, 2.0 / (1.0 + c_dratio),
                                                         2.0 * c_dratio / (1.0 + c_dratio));
            run_scenario(sc);
            return 0;
        }
        if (rn->parsed()) {
            run_scenario_file(r_path, r_outdir);
            return 0;
        }
        if (rp->parsed()) {
            repro(f_id, f_outdir);
            return 0;
        }
    } catch (const ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
