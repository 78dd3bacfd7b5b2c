#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fagci/config.hpp"
#include "fagci/miso.hpp"
#include "fagci/rates.hpp"

namespace fagci {

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

/// Power sweep over one channel parameter for a list of metrics.
struct RatesSweepConfig {
    enum class Param { XPowerDb, IPowerDb, JPowerDb };

    Channel base;
    Param param = Param::XPowerDb;
    double start_db = 0.0;
    double stop_db = 0.0;
    double step_db = 1.0;
    std::vector<std::string> metric_names;  // mi | approx_partial | approx_full | metric tokens
    QuadratureSpec quad;
    STiltSearch s_search;
    std::string out_path;

    static RatesSweepConfig from_config(const KeyValueConfig& cfg);
    std::vector<double> grid() const;
};

struct SweepRow {
    double param_db = 0.0;
    std::string metric;
    double bits = 0.0;
    std::optional<double> std_err;
    std::optional<double> s_opt;
};

/// One row per (grid point x metric), grid-major, metrics in listed order.
/// Deterministic for a fixed config regardless of the thread count.
std::vector<SweepRow> run_rates_sweep(const RatesSweepConfig& cfg, int threads = 1);
std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows);

/// Ergodic MU-MISO precoder optimization over seeded channel draws.
struct MisoRunConfig {
    int n_tx = 4;
    int users = 3;
    Constellation constellation;  // unit power
    double theta = 0.0;
    double spread = 0.5;
    double power_budget = 1.0;
    double noise_var = 1.0;
    std::string strategy_name = "full";  // mi | partial-cycle | full
    int draws = 1;
    int restarts = 1;  // optimizer starts per draw, best kept by objective
    std::uint64_t seed = 1;
    QuadratureSpec quad;
    STiltSearch s_search;
    miso::OptimizerConfig opt;
    std::string out_path;

    static MisoRunConfig from_config(const KeyValueConfig& cfg);
    miso::DecodingStrategy strategy() const;
};

struct MisoDrawRow {
    int draw = 0;
    std::uint64_t seed = 0;
    double objective_bits = 0.0;  // approximate sum GMI at the optimum
    double sum_rate_bits = 0.0;   // exact evaluation
    std::vector<double> user_bits;
    int iterations = 0;
};

std::vector<MisoDrawRow> run_miso_optimize(const MisoRunConfig& cfg, int threads = 1);
std::string miso_rows_to_csv(const std::vector<MisoDrawRow>& rows, int users);

/// Demodulator batch run: posterior + LLRs for (y, scenario) pairs.
struct DemodRunConfig {
    Channel chan;
    std::string metric_name = "matched";
    std::string input_path;  // CSV rows: y_re, y_im
    std::string out_path;

    static DemodRunConfig from_config(const KeyValueConfig& cfg);
};

std::string run_demod_posterior(const DemodRunConfig& cfg);

}  // namespace fagci
