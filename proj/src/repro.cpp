#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "lbphy/harness.hpp"
#include "lbphy/spectral.hpp"

namespace lbphy {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f.precision(10);
    return f;
}

void table2(const fs::path& dir) {
    auto f = open_out(dir, "table2.dat");
    std::cout << "max |xi_ML| off-diagonal, rows N=2..5, cols SF=7..12\n";
    for (int n = 2; n <= 5; ++n) {
        for (int sf = 7; sf <= 12; ++sf) {
            const double v = max_cross_corr(ModulationConfig(sf, n), DecoderKind::ML);
            f << v << (sf < 12 ? ' ' : '\n');
            std::printf("%.3f ", v);
        }
        std::printf("\n");
    }
}

void table3(const fs::path& dir) {
    auto f = open_out(dir, "table3.dat");
    const double gamma = 0.1; // -10 dB
    std::cout << "kappa at SF=7, gamma=-10 dB (rows N=2..5: ML FFT)\n";
    for (int n = 2; n <= 5; ++n) {
        const ModulationConfig cfg(7, n);
        const double m = static_cast<double>(cfg.M());
        const double kml =
            std::norm(cross_corr_cached(cfg, DecoderKind::ML)->at(0, 0)) * m * gamma;
        const double kfft =
            std::norm(cross_corr_cached(cfg, DecoderKind::FFT)->at(0, 0)) * m * gamma;
        f << n << " " << kml << " " << kfft << "\n";
        std::printf("N=%d  %.2f  %.2f\n", n, kml, kfft);
    }
}

void psd_files(const fs::path& dir) {
    // continuous and discrete parts, SF in {7,9}, N in {2,3}
    for (const auto& [sf, n] : {std::pair{7, 2}, {9, 2}, {9, 3}}) {
        const ModulationConfig cfg(sf, n);
        auto eval = spectrum_cached(cfg);
        const double B = cfg.bandwidth_hz;
        const std::size_t pts = 1024;
        const double df = 3.5 * B / static_cast<double>(pts);
        const auto g = eval->continuous_grid(0.5 * df, df, pts);
        auto fc = open_out(dir, "psd_cont_sf" + std::to_string(sf) + "_n" + std::to_string(n) +
                                    ".dat");
        for (std::size_t q = 0; q < pts; ++q)
            fc << (0.5 * df + q * df) / B << " " << 10.0 * std::log10(std::max(g[q] * B, 1e-30))
               << "\n";
        const auto l_max = static_cast<std::int64_t>(3.5 * static_cast<double>(cfg.M()));
        const auto lines = eval->lines(0, l_max);
        auto fd = open_out(dir, "psd_disc_sf" + std::to_string(sf) + "_n" + std::to_string(n) +
                                    ".dat");
        for (const auto& [freq, pw] : lines)
            fd << freq / B << " " << 10.0 * std::log10(std::max(pw, 1e-30)) << "\n";
    }
    std::cout << "wrote continuous/discrete psd files\n";
}

void total_psd_files(const fs::path& dir) {
    // binned total spectrum, SF=9, N in {2,3,4}; Welch MC for N in {2,4}; LoRa baseline
    const int sf = 9;
    const double bin_div = 1024.0;
    for (int n : {2, 3, 4}) {
        const ModulationConfig cfg(sf, n);
        auto eval = spectrum_cached(cfg);
        const double B = cfg.bandwidth_hz;
        const double df = B / bin_div;
        const auto nf = static_cast<std::size_t>(3.0 * bin_div);
        const auto tot = eval->binned_total(0.5 * df, df, nf);
        auto f = open_out(dir, "ps_total_sf9_n" + std::to_string(n) + ".dat");
        for (std::size_t q = 0; q < nf; ++q)
            f << (0.5 * df + q * df) / B << " "
              << 10.0 * std::log10(std::max(tot[q] / df * B, 1e-30)) << "\n";
    }
    for (int n : {2, 4}) {
        const ModulationConfig cfg(sf, n);
        const auto welch = mc_psd(cfg, 1 << 14, 2024);
        const double B = cfg.bandwidth_hz;
        auto f = open_out(dir, "ps_welch_sf9_n" + std::to_string(n) + ".dat");
        for (std::size_t i = 0; i < welch.freqs.size(); ++i) {
            const double fb = welch.freqs[i] / B;
            if (fb < 0.0 || fb > 3.0) continue;
            f << fb << " " << 10.0 * std::log10(std::max(welch.continuous_psd[i] * B, 1e-30))
              << "\n";
        }
    }
    {
        const ModulationConfig cfg(sf, 2);
        const auto welch = mc_psd(cfg, 1 << 14, 2024, WaveKind::LoRa);
        const double B = cfg.bandwidth_hz;
        auto f = open_out(dir, "ps_welch_sf9_lora.dat");
        for (std::size_t i = 0; i < welch.freqs.size(); ++i) {
            const double fb = welch.freqs[i] / B;
            if (fb < 0.0 || fb > 3.0) continue;
            f << fb << " " << 10.0 * std::log10(std::max(welch.continuous_psd[i] * B, 1e-30))
              << "\n";
        }
    }
    std::cout << "wrote total/welch psd files\n";
}

void mask_files(const fs::path& dir) {
    const MaskSpec mask = MaskSpec::load("data/etsi_g1.toml");
    for (int n : {3, 4}) {
        const ModulationConfig cfg(7, n, 250e3);
        const auto rep = mask_check(cfg, 14.0, 1000.0, mask);
        std::cout << "SF=7 N=" << n << ": " << (rep.pass ? "PASS" : "FAIL")
                  << " worst margin " << rep.worst_margin_db << " dB\n";
        auto eval = spectrum_cached(cfg);
        const double rbw = 1000.0;
        const double f_end = mask.vertices.back().first;
        const auto nf = static_cast<std::size_t>(f_end / rbw);
        const auto binned = eval->binned_total(0.5 * rbw, rbw, nf);
        auto f = open_out(dir, "mask_psd_sf7_n" + std::to_string(n) + ".dat");
        for (std::size_t q = 0; q < nf; ++q)
            f << (q + 0.5) * rbw << " " << 14.0 + 10.0 * std::log10(std::max(binned[q], 1e-30))
              << "\n";
    }
    auto fm = open_out(dir, "mask_etsi_g1.dat");
    for (const auto& [off, lim] : mask.vertices) fm << off << " " << lim << "\n";
}

Scenario base_scenario(int sf, int n, DecoderKind dec, ChannelModel ch, const std::string& grid,
                       const fs::path& dir, const std::string& name) {
    Scenario sc;
    sc.cfg = ModulationConfig(sf, n);
    sc.decoder = dec;
    sc.channel = ch;
    sc.snr_db = parse_snr_grid(grid);
    sc.out_prefix = (dir / name).string();
    return sc;
}

void fig7(const fs::path& dir) {
    // LoRa reference curves + LB ML Monte Carlo, SF in {7,8,9}, N in {2,3,4}
    for (int sf : {7, 8, 9}) {
        auto f = open_out(dir, "ser_lora_ref_sf" + std::to_string(sf) + ".dat");
        for (double db = -18.0; db <= -6.0 + 1e-9; db += 0.5) {
            const auto p = lora_ser_reference(std::pow(10.0, db / 10.0), sf);
            f << db << " " << p.ser << "\n";
        }
        for (int n : {2, 3, 4}) {
            auto sc = base_scenario(sf, n, DecoderKind::ML, ChannelModel::Awgn, "-18:-6:1", dir,
                                    "ser_sf" + std::to_string(sf) + "_lbml" + std::to_string(n));
            sc.with_analytic = false;
            sc.trials = 20000;
            sc.trial_cap = 200000;
            run_scenario(sc);
        }
    }
}

void fig8(const fs::path& dir, int n) {
    for (int sf : {8, 9}) {
        for (auto dec : {DecoderKind::ML, DecoderKind::FFT}) {
            auto sc = base_scenario(sf, n, dec, ChannelModel::Awgn, "-20:-8:1", dir,
                                    "ser_awgn_sf" + std::to_string(sf) + "_n" + std::to_string(n) +
                                        "_" + to_string(dec));
            run_scenario(sc);
        }
    }
}

void fig9(const fs::path& dir) {
    for (int n : {2, 4}) {
        for (double rho : {1.0, 4.0, 16.0}) {
            Scenario sc = base_scenario(7, n, DecoderKind::ML, ChannelModel::Fading, "5:25:2", dir,
                                        "ser_fading_n" + std::to_string(n) + "_r" +
                                            std::to_string(static_cast<int>(rho)));
            sc.fading = FadingParams::from_distances(2.0, 1.0, 2.0 / (1.0 + rho),
                                                     2.0 * rho / (1.0 + rho));
            run_scenario(sc);
        }
    }
}

void fig10(const fs::path& dir) {
    for (int sf : {7, 8}) {
        for (int n : {2, 4}) {
            Scenario sc = base_scenario(sf, n, DecoderKind::FFT, ChannelModel::Waterfill,
                                        "5:25:2", dir,
                                        "ser_wf_sf" + std::to_string(sf) + "_n" +
                                            std::to_string(n));
            sc.fading = FadingParams(2.0, 1.0, 1.0, 1.0);
            run_scenario(sc);
        }
    }
}

} // namespace

std::vector<std::string> repro_ids() {
    return {"table2", "table3", "fig4", "fig5", "fig6", "fig7", "fig8a", "fig8b", "fig9", "fig10"};
}

void repro(const std::string& id, const std::string& out_dir) {
    const fs::path dir = out_dir.empty() ? fs::path("repro_" + id) : fs::path(out_dir);
    if (id == "table2")
        table2(dir);
    else if (id == "table3")
        table3(dir);
    else if (id == "fig4")
        psd_files(dir);
    else if (id == "fig5")
        total_psd_files(dir);
    else if (id == "fig6")
        mask_files(dir);
    else if (id == "fig7")
        fig7(dir);
    else if (id == "fig8a")
        fig8(dir, 2);
    else if (id == "fig8b")
        fig8(dir, 4);
    else if (id == "fig9")
        fig9(dir);
    else if (id == "fig10")
        fig10(dir);
    else
        throw std::invalid_argument("unknown figure id '" + id + "'; known: table2 table3 fig4 "
                                    "fig5 fig6 fig7 fig8a fig8b fig9 fig10");
}

} // namespace lbphy
