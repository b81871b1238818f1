#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lbphy/analytic.hpp"
#include "lbphy/channel.hpp"
#include "lbphy/config.hpp"

namespace lbphy {

enum class ChannelModel { Awgn, Fading, Waterfill };

struct Scenario {
    ModulationConfig cfg;
    ChannelModel channel = ChannelModel::Awgn;
    FadingParams fading;
    DecoderKind decoder = DecoderKind::ML;
    std::vector<double> snr_db; // sorted grid; mean SNR for fading modes
    std::int64_t trials = 100000;      // minimum per point
    std::int64_t trial_cap = 2000000;  // escalation ceiling
    std::int64_t target_errors = 100;  // escalate until this many error events
    std::uint64_t seed = 1;
    bool with_analytic = true;
    AnalyticOptions analytic;
    std::string out_prefix; // output path prefix; empty = no files
};

struct MCEstimate {
    double snr_db = 0.0;
    double ser_hat = 0.0;
    std::int64_t trials = 0;
    std::int64_t errors = 0;
    double ci_lo = 0.0; // Wilson 95%
    double ci_hi = 1.0;
    std::int64_t outage_skips = 0; // water-filling only
};

/// Wilson score interval at 95% confidence.
std::pair<double, double> wilson_interval(std::int64_t errors, std::int64_t trials);

/// Monte Carlo SER sweep, deterministic under (seed, point, block) stream
/// derivation; escalates trials per point until target_errors error events
/// or the cap.
std::vector<MCEstimate> mc_ser(const Scenario& sc);

/// Analytic curve matching the scenario's channel model.
std::vector<SerPoint> analytic_curve(const Scenario& sc);

/// Error carrying the offending configuration key, mapped to exit code 2.
struct ScenarioError : std::runtime_error {
    explicit ScenarioError(const std::string& msg) : std::runtime_error(msg) {}
};

Scenario parse_scenario(const std::string& path);

/// Runs the scenario, writes <prefix>_mc.dat / <prefix>_analytic.dat (two
/// space-separated columns, no header) plus a JSON metadata sidecar.
void run_scenario(const Scenario& sc);
void run_scenario_file(const std::string& path, const std::string& out_dir = "");

/// Shipped figure/table presets: table2, table3, fig4, fig5, fig6, fig7,
/// fig8a, fig8b, fig9, fig10.
std::vector<std::string> repro_ids();
void repro(const std::string& figure_id, const std::string& out_dir);

/// "start:stop:step" or whitespace-separated list, in dB.
std::vector<double> parse_snr_grid(const std::string& text);

} // namespace lbphy
