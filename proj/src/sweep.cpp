#include "fagci/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "fagci/demod.hpp"

namespace fagci {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Runs fn(i) for i in [0, n) on `threads` workers; exceptions propagate.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

QuadratureSpec quadrature_from_config(const KeyValueConfig& cfg) {
    const std::string method = cfg.get_string_or("quad.method", "gauss_hermite");
    if (method == "gauss_hermite") {
        QuadratureSpec q = QuadratureSpec::gauss_hermite(
            static_cast<int>(cfg.get_long_or("quad.nodes", 40)));
        if (q.nodes < 2) throw ConfigError("quad.nodes must be at least 2");
        return q;
    }
    if (method == "monte_carlo") {
        const long samples = cfg.get_long_or("quad.samples", 100000);
        if (samples < 1) throw ConfigError("quad.samples must be positive");
        return QuadratureSpec::monte_carlo(
            samples, static_cast<std::uint64_t>(cfg.get_long_or("quad.seed", 1)));
    }
    throw ConfigError("quad.method must be gauss_hermite or monte_carlo");
}

STiltSearch tilt_from_config(const KeyValueConfig& cfg) {
    STiltSearch s;
    s.lo = cfg.get_double_or("s.lo", s.lo);
    s.hi = cfg.get_double_or("s.hi", s.hi);
    s.rel_tol = cfg.get_double_or("s.tol", s.rel_tol);
    if (s.hi < s.lo) throw ConfigError("s.hi must not be below s.lo");
    return s;
}

void reject_unread(const KeyValueConfig& cfg) {
    const std::vector<std::string> leftover = cfg.unread_keys();
    if (!leftover.empty()) {
        std::string msg = "unknown config keys:";
        for (const std::string& k : leftover) msg += " " + k;
        throw ConfigError(msg);
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

RatesSweepConfig RatesSweepConfig::from_config(const KeyValueConfig& cfg) {
    RatesSweepConfig out;
    out.base = Channel(constellation_from_config(cfg, "x"), constellation_from_config(cfg, "i"),
                       constellation_from_config(cfg, "j"),
                       db_to_linear(cfg.get_double_or("noise_db", 0.0)));

    const std::string param = cfg.get_string("sweep.param");
    if (param == "x_power_db")
        out.param = Param::XPowerDb;
    else if (param == "i_power_db")
        out.param = Param::IPowerDb;
    else if (param == "j_power_db")
        out.param = Param::JPowerDb;
    else
        throw ConfigError("sweep.param must be x_power_db|i_power_db|j_power_db");

    out.start_db = cfg.get_double("sweep.start");
    out.stop_db = cfg.get_double("sweep.stop");
    out.step_db = cfg.get_double_or("sweep.step", 1.0);
    if (!(out.step_db > 0.0)) throw ConfigError("sweep.step must be positive");
    if (out.stop_db < out.start_db) throw ConfigError("sweep.stop must not be below sweep.start");

    out.metric_names = cfg.get_list("metrics");
    if (out.metric_names.empty()) throw ConfigError("metrics list must be non-empty");
    out.quad = quadrature_from_config(cfg);
    out.s_search = tilt_from_config(cfg);
    out.out_path = cfg.get_string_or("out", "");
    reject_unread(cfg);
    return out;
}

std::vector<double> RatesSweepConfig::grid() const {
    std::vector<double> g;
    for (double v = start_db; v <= stop_db + 1e-9; v += step_db) g.push_back(v);
    return g;
}

std::vector<SweepRow> run_rates_sweep(const RatesSweepConfig& cfg, int threads) {
    const std::vector<double> grid = cfg.grid();
    const std::size_t n_metrics = cfg.metric_names.size();
    const std::size_t n_rows = grid.size() * n_metrics;
    std::vector<SweepRow> rows(n_rows);

    parallel_for(n_rows, threads, [&](std::size_t idx) {
        const std::size_t gi = idx / n_metrics;
        const std::size_t mi = idx % n_metrics;
        const double pdb = grid[gi];
        const std::string& name = cfg.metric_names[mi];
        try {
            Channel chan = cfg.base;
            const double power = db_to_linear(pdb);
            switch (cfg.param) {
                case RatesSweepConfig::Param::XPowerDb: chan.x = chan.x.scaled_to_power(power); break;
                case RatesSweepConfig::Param::IPowerDb: chan.i = chan.i.scaled_to_power(power); break;
                case RatesSweepConfig::Param::JPowerDb: chan.j = chan.j.scaled_to_power(power); break;
            }
            SweepRow row;
            row.param_db = pdb;
            row.metric = name;
            if (name == "mi") {
                const MutualInformationResult r = mutual_information(chan, cfg.quad);
                row.bits = r.rate.bits;
                row.std_err = r.rate.std_err_bits;
            } else if (name == "approx_partial" || name == "approx_full") {
                row.bits = gmi_approx(chan, name == "approx_partial" ? ApproxVariant::Partial
                                                                     : ApproxVariant::Full)
                               .bits;
                row.s_opt = 1.0;
            } else {
                const RateEstimate r =
                    gmi(chan, metric_from_name(name, chan), cfg.quad, cfg.s_search);
                row.bits = r.bits;
                row.std_err = r.std_err_bits;
                row.s_opt = r.s_opt;
            }
            rows[idx] = std::move(row);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            std::ostringstream os;
            os << "sweep failed at grid point " << format_double(pdb) << " dB, metric " << name
               << ": " << e.what();
            throw std::runtime_error(os.str());
        }
    });
    return rows;
}

std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "param_db,metric,bits,std_err,s_opt\n";
    for (const SweepRow& r : rows) {
        os << format_double(r.param_db) << ',' << r.metric << ',' << format_double(r.bits) << ',';
        if (r.std_err) os << format_double(*r.std_err);
        os << ',';
        if (r.s_opt) os << format_double(*r.s_opt);
        os << '\n';
    }
    return os.str();
}

MisoRunConfig MisoRunConfig::from_config(const KeyValueConfig& cfg) {
    MisoRunConfig out;
    out.n_tx = static_cast<int>(cfg.get_long("n_tx"));
    out.users = static_cast<int>(cfg.get_long("users"));
    if (out.n_tx < 1 || out.users < 1) throw ConfigError("n_tx and users must be positive");

    Constellation c = constellation_from_config(cfg, "constellation");
    if (c.is_zero()) throw ConfigError("miso runs need a non-degenerate constellation");
    out.constellation = c.scaled_to_power(1.0);  // E[s s^H] = I convention

    out.theta = cfg.get_double_or("theta", 0.0);
    out.spread = cfg.get_double("spread");
    out.power_budget = db_to_linear(cfg.get_double("power_budget_db"));
    out.noise_var = db_to_linear(cfg.get_double_or("noise_db", 0.0));
    out.strategy_name = cfg.get_string_or("strategy", "full");
    out.draws = static_cast<int>(cfg.get_long_or("draws", 1));
    if (out.draws < 1) throw ConfigError("draws must be positive");
    out.restarts = static_cast<int>(cfg.get_long_or("restarts", 1));
    if (out.restarts < 1) throw ConfigError("restarts must be positive");
    out.seed = static_cast<std::uint64_t>(cfg.get_long_or("seed", 1));
    out.quad = quadrature_from_config(cfg);
    out.s_search = tilt_from_config(cfg);

    out.opt.barrier_tau0 = cfg.get_double_or("opt.tau0", out.opt.barrier_tau0);
    out.opt.barrier_multiplier = cfg.get_double_or("opt.multiplier", out.opt.barrier_multiplier);
    out.opt.tau_max = cfg.get_double_or("opt.tau_max", out.opt.tau_max);
    out.opt.inner_tol = cfg.get_double_or("opt.inner_tol", out.opt.inner_tol);
    out.opt.max_inner_iters =
        static_cast<int>(cfg.get_long_or("opt.v_max", out.opt.max_inner_iters));
    out.opt.backtrack_shrink = cfg.get_double_or("opt.shrink", out.opt.backtrack_shrink);
    out.opt.sufficient_increase =
        cfg.get_double_or("opt.sufficient_increase", out.opt.sufficient_increase);
    out.opt.initial_step = cfg.get_double_or("opt.step0", out.opt.initial_step);
    try {
        out.opt.validate();
        out.strategy();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    out.out_path = cfg.get_string_or("out", "");
    reject_unread(cfg);
    return out;
}

miso::DecodingStrategy MisoRunConfig::strategy() const {
    if (strategy_name == "mi") return miso::DecodingStrategy::mi(users);
    if (strategy_name == "partial-cycle") return miso::DecodingStrategy::partial_cycle(users);
    if (strategy_name == "full") return miso::DecodingStrategy::full(users);
    throw std::invalid_argument("strategy must be mi|partial-cycle|full");
}

std::vector<MisoDrawRow> run_miso_optimize(const MisoRunConfig& cfg, int threads) {
    const miso::DecodingStrategy strategy = cfg.strategy();
    const miso::CovarianceModel cov =
        miso::one_ring_covariance({cfg.n_tx, cfg.theta, cfg.spread});

    std::vector<MisoDrawRow> rows(static_cast<std::size_t>(cfg.draws));
    parallel_for(rows.size(), threads, [&](std::size_t d) {
        const std::uint64_t seed = derive_seed(cfg.seed, d);
        std::mt19937_64 rng(seed);
        Eigen::MatrixXcd channel(cfg.users, cfg.n_tx);
        for (int k = 0; k < cfg.users; ++k)
            channel.row(k) = miso::sample_channel(cov, rng).adjoint();

        miso::OptimizeResult opt;
        for (int r = 0; r < cfg.restarts; ++r) {
            std::mt19937_64 opt_rng(derive_seed(seed, 1 + r));
            miso::OptimizeResult cand =
                miso::optimize_precoder(channel, cfg.constellation, strategy, cfg.power_budget,
                                        cfg.noise_var, cfg.opt, opt_rng);
            if (r == 0 || cand.objective_nats > opt.objective_nats) opt = std::move(cand);
        }

        miso::MisoScenario sc;
        sc.channel = channel;
        sc.precoder = opt.precoder;
        sc.constellation = cfg.constellation;
        sc.strategy = strategy;
        sc.noise_var = cfg.noise_var;
        sc.power_budget = cfg.power_budget;
        const miso::SumRateResult sr = miso::sum_rate(sc, cfg.quad, cfg.s_search);

        MisoDrawRow row;
        row.draw = static_cast<int>(d);
        row.seed = seed;
        row.objective_bits = opt.objective_nats / kLn2;
        row.sum_rate_bits = sr.total_bits;
        for (const RateEstimate& r : sr.per_user) row.user_bits.push_back(r.bits);
        row.iterations = opt.total_inner_iterations;
        rows[d] = std::move(row);
    });
    return rows;
}

std::string miso_rows_to_csv(const std::vector<MisoDrawRow>& rows, int users) {
    std::ostringstream os;
    os << "draw,seed,objective_bits,sum_rate_bits";
    for (int k = 0; k < users; ++k) os << ",user" << (k + 1) << "_bits";
    os << ",iterations\n";
    double obj = 0.0, rate = 0.0;
    std::vector<double> user_means(static_cast<std::size_t>(users), 0.0);
    double iters = 0.0;
    for (const MisoDrawRow& r : rows) {
        os << r.draw << ',' << r.seed << ',' << format_double(r.objective_bits) << ','
           << format_double(r.sum_rate_bits);
        for (double b : r.user_bits) os << ',' << format_double(b);
        os << ',' << r.iterations << '\n';
        obj += r.objective_bits;
        rate += r.sum_rate_bits;
        for (int k = 0; k < users; ++k) user_means[k] += r.user_bits[k];
        iters += r.iterations;
    }
    const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
    os << "mean,," << format_double(obj / n) << ',' << format_double(rate / n);
    for (int k = 0; k < users; ++k) os << ',' << format_double(user_means[k] / n);
    os << ',' << format_double(iters / n) << '\n';
    return os.str();
}

DemodRunConfig DemodRunConfig::from_config(const KeyValueConfig& cfg) {
    DemodRunConfig out;
    out.chan = Channel(constellation_from_config(cfg, "x"), constellation_from_config(cfg, "i"),
                       constellation_from_config(cfg, "j"),
                       db_to_linear(cfg.get_double_or("noise_db", 0.0)));
    out.metric_name = cfg.get_string_or("metric", "matched");
    out.input_path = cfg.get_string("input");
    out.out_path = cfg.get_string_or("out", "");
    reject_unread(cfg);
    return out;
}

std::string run_demod_posterior(const DemodRunConfig& cfg) {
    std::ifstream in(cfg.input_path);
    if (!in) throw ConfigError("cannot open demod input: " + cfg.input_path);

    const DecodingMetric metric = metric_from_name(cfg.metric_name, cfg.chan);
    const std::size_t n = cfg.chan.x.size();
    const bool power_of_two = n > 0 && (n & (n - 1)) == 0;

    std::ostringstream os;
    os << "y_re,y_im";
    for (std::size_t k = 0; k < n; ++k) os << ",p" << k;
    if (power_of_two) {
        const Labeling lab = cfg.chan.x.labeling();
        for (int b = 0; b < lab.bits; ++b) os << ",llr" << b;
    }
    os << '\n';

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = line;
        for (char& c : body)
            if (c == ',') c = ' ';
        std::istringstream ls(body);
        double re, im;
        if (!(ls >> re >> im)) {
            if (body.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw ConfigError(cfg.input_path + ":" + std::to_string(lineno) +
                              ": expected `y_re, y_im`");
        }
        const cplx y(re, im);
        const PosteriorVector p = posterior(metric, cfg.chan, y);
        os << format_double(re) << ',' << format_double(im);
        for (double v : p.probs) os << ',' << format_double(v);
        if (power_of_two) {
            for (double v : bit_llrs(p, cfg.chan.x.labeling())) os << ',' << format_double(v);
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace fagci
