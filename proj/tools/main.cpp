#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fagci/config.hpp"
#include "fagci/sweep.hpp"
#include "fagci/verify.hpp"

namespace {

// Exit codes: 0 ok, 1 config error, 2 check failure, 3 runtime error.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitCheckFailed = 2;
constexpr int kExitRuntime = 3;

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) throw fagci::ConfigError("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

struct CommonArgs {
    std::string config_path;
    std::string out_override;
    int threads = 1;
    std::optional<long> seed_override;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "fagci: achievable rates of finite-alphabet Gaussian channels under interference.\n"
        "Powers in configs are dB relative to unit linear power (0 dB = variance 1)."};
    app.require_subcommand(1);

    CommonArgs rates_args, miso_args, demod_args;
    std::string verify_out;
    long verify_seed = 7;

    auto* rates = app.add_subcommand("rates", "Rate computations over a scalar channel");
    auto* rates_sweep = rates->add_subcommand("sweep", "Sweep one power parameter, emit CSV");
    rates_sweep->add_option("config", rates_args.config_path, "flat key-value config file")
        ->required();
    rates_sweep->add_option("--out", rates_args.out_override, "output CSV path (default stdout)");
    rates_sweep->add_option("--threads", rates_args.threads, "worker threads");
    rates_sweep->add_option("--seed", rates_args.seed_override, "override quad.seed");

    auto* miso = app.add_subcommand("miso", "Multi-user MISO precoding");
    auto* miso_opt = miso->add_subcommand("optimize", "Optimize precoders over channel draws");
    miso_opt->add_option("config", miso_args.config_path, "flat key-value config file")
        ->required();
    miso_opt->add_option("--out", miso_args.out_override, "output CSV path (default stdout)");
    miso_opt->add_option("--threads", miso_args.threads, "worker threads");
    miso_opt->add_option("--seed", miso_args.seed_override, "override the config seed");

    auto* demod = app.add_subcommand("demod", "Demodulator posteriors and bit LLRs");
    auto* demod_post = demod->add_subcommand("posterior", "Posterior/LLR CSV for observations");
    demod_post->add_option("config", demod_args.config_path, "flat key-value config file")
        ->required();
    demod_post->add_option("--out", demod_args.out_override, "output CSV path (default stdout)");

    auto* verify = app.add_subcommand("verify", "Run the built-in consistency checks");
    verify->add_option("--out", verify_out, "JSON report path (default stdout)");
    verify->add_option("--seed", verify_seed, "seed for randomized checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (rates_sweep->parsed()) {
            fagci::KeyValueConfig cfg = fagci::KeyValueConfig::parse_file(rates_args.config_path);
            fagci::RatesSweepConfig sweep = fagci::RatesSweepConfig::from_config(cfg);
            if (rates_args.seed_override)
                sweep.quad.seed = static_cast<std::uint64_t>(*rates_args.seed_override);
            const auto rows = fagci::run_rates_sweep(sweep, rates_args.threads);
            const std::string path =
                rates_args.out_override.empty() ? sweep.out_path : rates_args.out_override;
            write_output(path, fagci::sweep_rows_to_csv(rows));
            return kExitOk;
        }
        if (miso_opt->parsed()) {
            fagci::KeyValueConfig cfg = fagci::KeyValueConfig::parse_file(miso_args.config_path);
            fagci::MisoRunConfig run = fagci::MisoRunConfig::from_config(cfg);
            if (miso_args.seed_override)
                run.seed = static_cast<std::uint64_t>(*miso_args.seed_override);
            const auto rows = fagci::run_miso_optimize(run, miso_args.threads);
            const std::string path =
                miso_args.out_override.empty() ? run.out_path : miso_args.out_override;
            write_output(path, fagci::miso_rows_to_csv(rows, run.users));
            return kExitOk;
        }
        if (demod_post->parsed()) {
            fagci::KeyValueConfig cfg = fagci::KeyValueConfig::parse_file(demod_args.config_path);
            fagci::DemodRunConfig run = fagci::DemodRunConfig::from_config(cfg);
            const std::string path =
                demod_args.out_override.empty() ? run.out_path : demod_args.out_override;
            write_output(path, fagci::run_demod_posterior(run));
            return kExitOk;
        }
        if (verify->parsed()) {
            fagci::VerifyOptions opts;
            opts.seed = static_cast<std::uint64_t>(verify_seed);
            const fagci::VerifyReport report = fagci::run_verify(opts);
            write_output(verify_out, fagci::verify_report_to_json(report));
            for (const fagci::VerifyCheck& c : report.checks)
                std::cerr << (c.pass ? "[pass] " : "[FAIL] ") << c.name
                          << " measured=" << c.measured << " tol=" << c.tolerance << '\n';
            return report.all_pass ? kExitOk : kExitCheckFailed;
        }
    } catch (const fagci::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}
