#include "fagci/miso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fagci::miso {

namespace {

// Adaptive Simpson on a complex integrand, absolute tolerance on |error|.
template <typename F>
cplx adaptive_simpson(F&& f, double a, double b, cplx fa, cplx fm, cplx fb, cplx whole,
                      double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const cplx flm = f(lm);
    const cplx frm = f(rm);
    const cplx left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const cplx right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const cplx delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

template <typename F>
cplx integrate(F&& f, double a, double b, double tol) {
    const cplx fa = f(a);
    const cplx fb = f(b);
    const cplx fm = f(0.5 * (a + b));
    const cplx whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Odometer over m digits in [0, base); returns false after the last state.
bool advance(std::vector<int>& digits, int base) {
    for (std::size_t k = 0; k < digits.size(); ++k) {
        if (++digits[k] < base) return true;
        digits[k] = 0;
    }
    return false;
}

std::size_t checked_product_size(std::size_t base, std::size_t count, std::size_t cap) {
    std::size_t out = 1;
    for (std::size_t k = 0; k < count; ++k) {
        if (out > cap / std::max<std::size_t>(base, 1)) return cap + 1;
        out *= base;
    }
    return out;
}

}  // namespace

CovarianceModel one_ring_covariance(const OneRingConfig& cfg) {
    if (cfg.n_tx < 1) throw std::invalid_argument("one-ring model needs at least one antenna");
    if (!(cfg.spread > 0.0) || cfg.spread > 3.14159265358979323846 + 1e-12)
        throw std::invalid_argument("angular spread must lie in (0, pi]");

    const double lo = cfg.theta - cfg.spread;
    const double hi = cfg.theta + cfg.spread;
    const double norm = 1.0 / (2.0 * cfg.spread);
    const int n = cfg.n_tx;

    // entries depend on the antenna index difference only
    std::vector<cplx> lag(n);
    lag[0] = 1.0;
    for (int d = 1; d < n; ++d) {
        const double pd = 3.14159265358979323846 * d;
        auto f = [pd](double alpha) {
            const double ph = -pd * std::sin(alpha);
            return cplx(std::cos(ph), std::sin(ph));
        };
        lag[d] = norm * integrate(f, lo, hi, 1e-12);
    }

    CovarianceModel model;
    model.r.resize(n, n);
    for (int m = 0; m < n; ++m)
        for (int c = 0; c < n; ++c)
            model.r(m, c) = m >= c ? lag[m - c] : std::conj(lag[c - m]);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(model.r);
    const Eigen::VectorXd evals = es.eigenvalues();  // ascending
    const double lam_max = std::max(evals(n - 1), 0.0);
    const double cutoff = 1e-10 * std::max(lam_max, 1.0);
    int rank = 0;
    for (int k = 0; k < n; ++k)
        if (evals(k) > cutoff) ++rank;
    model.u.resize(n, rank);
    model.lambda.resize(rank);
    for (int k = 0; k < rank; ++k) {
        const int src = n - 1 - k;  // descending order
        model.lambda(k) = evals(src);
        model.u.col(k) = es.eigenvectors().col(src);
    }
    return model;
}

Eigen::VectorXcd sample_channel(const CovarianceModel& cov, std::mt19937_64& rng) {
    const int rank = static_cast<int>(cov.lambda.size());
    Eigen::VectorXcd w(rank);
    for (int k = 0; k < rank; ++k) w(k) = complex_normal(rng, 1.0) * std::sqrt(cov.lambda(k));
    return cov.u * w;
}

DecodingStrategy DecodingStrategy::mi(int users) {
    DecodingStrategy s;
    s.opt_sets.resize(users);
    s.gauss_sets.resize(users);
    for (int k = 0; k < users; ++k)
        for (int l = 0; l < users; ++l)
            if (l != k) s.opt_sets[k].push_back(l);
    return s;
}

DecodingStrategy DecodingStrategy::partial_cycle(int users) {
    DecodingStrategy s;
    s.opt_sets.resize(users);
    s.gauss_sets.resize(users);
    for (int k = 0; k < users; ++k) {
        if (users >= 2) s.opt_sets[k].push_back((k + 1) % users);
        for (int l = 0; l < users; ++l)
            if (l != k && l != (k + 1) % users) s.gauss_sets[k].push_back(l);
    }
    return s;
}

DecodingStrategy DecodingStrategy::full(int users) {
    DecodingStrategy s;
    s.opt_sets.resize(users);
    s.gauss_sets.resize(users);
    for (int k = 0; k < users; ++k)
        for (int l = 0; l < users; ++l)
            if (l != k) s.gauss_sets[k].push_back(l);
    return s;
}

void DecodingStrategy::validate(int n_users) const {
    if (static_cast<int>(opt_sets.size()) != n_users ||
        static_cast<int>(gauss_sets.size()) != n_users)
        throw std::invalid_argument("decoding strategy must list every user");
    for (int k = 0; k < n_users; ++k) {
        std::vector<bool> seen(n_users, false);
        seen[k] = true;
        for (const auto* set : {&opt_sets[k], &gauss_sets[k]})
            for (int l : *set) {
                if (l < 0 || l >= n_users || seen[l])
                    throw std::invalid_argument(
                        "decoding strategy sets must partition the other users");
                seen[l] = true;
            }
        if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
            throw std::invalid_argument("decoding strategy leaves some interferer unassigned");
    }
}

void validate_scenario(const MisoScenario& sc) {
    const int users = static_cast<int>(sc.channel.rows());
    if (sc.precoder.rows() != sc.channel.cols() || sc.precoder.cols() != users)
        throw std::invalid_argument("precoder dimensions do not match the channel");
    sc.strategy.validate(users);
    if (!(sc.noise_var > 0.0)) throw std::invalid_argument("noise variance must be positive");
    if (std::abs(sc.constellation.power() - 1.0) > 1e-9)
        throw std::invalid_argument("scenario constellation must have unit power");
}

Channel induced_channel(const MisoScenario& sc, int user, std::size_t term_cap) {
    validate_scenario(sc);
    const int users = static_cast<int>(sc.channel.rows());
    if (user < 0 || user >= users) throw std::invalid_argument("user index out of range");

    const Eigen::RowVectorXcd gains = sc.channel.row(user) * sc.precoder;

    auto combine = [&](const std::vector<int>& set) {
        Constellation acc = Constellation::zero();
        for (int l : set) {
            acc = minkowski_sum(acc, sc.constellation.scaled_by(gains(l)));
            if (acc.size() > term_cap)
                throw ResourceLimitError("induced interference alphabet exceeds the term cap");
        }
        return acc;
    };

    const Constellation own = sc.constellation.scaled_by(gains(user));
    const Constellation opt = combine(sc.strategy.opt_sets[user]);
    const Constellation gauss = combine(sc.strategy.gauss_sets[user]);
    if (own.size() * opt.size() * gauss.size() > term_cap)
        throw ResourceLimitError("induced product alphabet exceeds the term cap");
    return Channel(own, opt, gauss, sc.noise_var);
}

RateEstimate user_gmi(const MisoScenario& sc, int user, const QuadratureSpec& quad,
                      const STiltSearch& search, std::size_t term_cap) {
    return gmi(induced_channel(sc, user, term_cap), DecodingMetric::partial_gaussian(), quad,
               search);
}

RateEstimate user_gmi_approx(const MisoScenario& sc, int user, std::size_t term_cap) {
    return gmi_approx(induced_channel(sc, user, term_cap), ApproxVariant::Partial);
}

namespace {

double user_gmi_approx_raw(const MisoScenario& sc, int user, std::size_t term_cap) {
    return gmi_approx_raw_nats(induced_channel(sc, user, term_cap), ApproxVariant::Partial);
}

}  // namespace

Eigen::MatrixXcd user_gmi_approx_grad(const MisoScenario& sc, int user, std::size_t term_cap) {
    validate_scenario(sc);
    const int users = static_cast<int>(sc.channel.rows());
    if (user < 0 || user >= users) throw std::invalid_argument("user index out of range");
    const int n_tx = static_cast<int>(sc.precoder.rows());

    const std::vector<int>& opt = sc.strategy.opt_sets[user];
    const std::vector<int>& gss = sc.strategy.gauss_sets[user];
    const int n_opt = static_cast<int>(opt.size());
    const int n_gss = static_cast<int>(gss.size());

    // permuted column order [own, opt..., gauss...]
    std::vector<int> perm;
    perm.reserve(users);
    perm.push_back(user);
    perm.insert(perm.end(), opt.begin(), opt.end());
    perm.insert(perm.end(), gss.begin(), gss.end());

    const std::vector<cplx>& pts = sc.constellation.points();
    const int card = static_cast<int>(pts.size());
    if (checked_product_size(card, 1 + n_opt + n_gss, term_cap) > term_cap)
        throw ResourceLimitError("product alphabet exceeds the term cap");

    Eigen::RowVectorXcd q_row(users);  // h^H P-tilde
    {
        const Eigen::RowVectorXcd gains = sc.channel.row(user) * sc.precoder;
        for (int c = 0; c < users; ++c) q_row(c) = gains(perm[c]);
    }
    Eigen::RowVectorXcd r_gauss = Eigen::RowVectorXcd::Zero(users);
    for (int c = 1 + n_opt; c < users; ++c) r_gauss(c) = q_row(c);
    const double denom = r_gauss.squaredNorm() + 2.0 * sc.noise_var;

    Eigen::RowVectorXcd total = Eigen::RowVectorXcd::Zero(users);
    std::vector<int> i_idx(n_opt, 0), j_idx(n_gss, 0), ib_idx(n_opt, 0);
    std::vector<cplx> v(users);

    // first term: outer (x, i, j), inner (x-bar, i-bar)
    do {  // j
        do {  // i
            for (int x = 0; x < card; ++x) {
                double sum_g = 0.0;
                Eigen::RowVectorXcd sum_row = Eigen::RowVectorXcd::Zero(users);
                std::fill(ib_idx.begin(), ib_idx.end(), 0);
                do {  // i-bar
                    for (int t = 0; t < n_opt; ++t)
                        v[1 + t] = pts[i_idx[t]] - pts[ib_idx[t]];
                    for (int t = 0; t < n_gss; ++t) v[1 + n_opt + t] = pts[j_idx[t]];
                    for (int xb = 0; xb < card; ++xb) {  // x-bar
                        v[0] = pts[x] - pts[xb];
                        cplx u = 0.0;
                        for (int c = 0; c < users; ++c) u += q_row(c) * v[c];
                        const double usq = std::norm(u);
                        const double g = std::exp(-usq / denom);
                        sum_g += g;
                        const cplx a = g * (-u / denom);
                        const double b = g * usq / (denom * denom);
                        for (int c = 0; c < users; ++c)
                            sum_row(c) += a * std::conj(v[c]) + b * r_gauss(c);
                    }
                } while (advance(ib_idx, card));
                total -= sum_row / sum_g;
            }
        } while (advance(i_idx, card));
    } while (advance(j_idx, card));
    const double n_outer1 = std::pow(static_cast<double>(card), 1 + n_opt + n_gss);
    total /= n_outer1;

    // second term: outer (i, j), inner i-bar, own-stream slot zeroed
    Eigen::RowVectorXcd total2 = Eigen::RowVectorXcd::Zero(users);
    std::fill(i_idx.begin(), i_idx.end(), 0);
    std::fill(j_idx.begin(), j_idx.end(), 0);
    do {  // j
        do {  // i
            double sum_h = 0.0;
            Eigen::RowVectorXcd sum_row = Eigen::RowVectorXcd::Zero(users);
            std::fill(ib_idx.begin(), ib_idx.end(), 0);
            do {  // i-bar
                v[0] = 0.0;
                for (int t = 0; t < n_opt; ++t) v[1 + t] = pts[i_idx[t]] - pts[ib_idx[t]];
                for (int t = 0; t < n_gss; ++t) v[1 + n_opt + t] = pts[j_idx[t]];
                cplx u = 0.0;
                for (int c = 0; c < users; ++c) u += q_row(c) * v[c];
                const double usq = std::norm(u);
                const double g = std::exp(-usq / denom);
                sum_h += g;
                const cplx a = g * (-u / denom);
                const double b = g * usq / (denom * denom);
                for (int c = 0; c < users; ++c)
                    sum_row(c) += a * std::conj(v[c]) + b * r_gauss(c);
            } while (advance(ib_idx, card));
            total2 += sum_row / sum_h;
        } while (advance(i_idx, card));
    } while (advance(j_idx, card));
    const double n_outer2 = std::pow(static_cast<double>(card), n_opt + n_gss);
    total2 /= n_outer2;

    const Eigen::VectorXcd h_k = sc.channel.row(user).adjoint();
    Eigen::MatrixXcd grad_tilde = h_k * (total + total2);

    // undo the column permutation and switch to the real-pair convention
    Eigen::MatrixXcd grad = Eigen::MatrixXcd::Zero(n_tx, users);
    for (int c = 0; c < users; ++c) grad.col(perm[c]) = 2.0 * grad_tilde.col(c);
    return grad;
}

void OptimizerConfig::validate() const {
    if (!(barrier_tau0 > 0.0) || !(barrier_multiplier > 1.0) || !(tau_max >= barrier_tau0) ||
        !(inner_tol > 0.0) || max_inner_iters < 1 || !(backtrack_shrink > 0.0) ||
        !(backtrack_shrink < 1.0) || !(sufficient_increase > 0.0) ||
        !(sufficient_increase < 1.0) || !(initial_step > 0.0))
        throw std::invalid_argument("invalid optimizer configuration");
}

OptimizeResult optimize_precoder(const Eigen::MatrixXcd& channel,
                                 const Constellation& constellation,
                                 const DecodingStrategy& strategy, double power_budget,
                                 double noise_var, const OptimizerConfig& cfg,
                                 std::mt19937_64& rng, std::size_t term_cap) {
    cfg.validate();
    if (!(power_budget > 0.0)) throw std::invalid_argument("power budget must be positive");
    const int users = static_cast<int>(channel.rows());
    const int n_tx = static_cast<int>(channel.cols());
    strategy.validate(users);

    MisoScenario sc;
    sc.channel = channel;
    sc.constellation = constellation;
    sc.strategy = strategy;
    sc.noise_var = noise_var;
    sc.power_budget = power_budget;

    // random start at half the power budget
    Eigen::MatrixXcd p(n_tx, users);
    double nrm = 0.0;
    while (nrm <= 0.0) {
        for (int r = 0; r < n_tx; ++r)
            for (int c = 0; c < users; ++c) p(r, c) = complex_normal(rng, 1.0);
        nrm = p.squaredNorm();
    }
    p *= std::sqrt(0.5 * power_budget / nrm);
    if (p.squaredNorm() >= power_budget)
        throw std::invalid_argument("initialization infeasible after rescale");

    auto sum_approx = [&](const Eigen::MatrixXcd& pc) {
        sc.precoder = pc;
        double acc = 0.0;
        for (int k = 0; k < users; ++k) acc += user_gmi_approx_raw(sc, k, term_cap);
        return acc;
    };
    auto omega = [&](const Eigen::MatrixXcd& pc, double tau) {
        const double slack = power_budget - pc.squaredNorm();
        if (slack <= 0.0) return -std::numeric_limits<double>::infinity();
        return tau * sum_approx(pc) + std::log(slack);
    };

    OptimizeResult result;
    result.max_power_seen = p.squaredNorm();

    double tau = cfg.barrier_tau0;
    while (true) {
        std::vector<double> segment;
        double cur = omega(p, tau);
        segment.push_back(cur);
        for (int v = 0; v < cfg.max_inner_iters; ++v) {
            sc.precoder = p;
            Eigen::MatrixXcd step = Eigen::MatrixXcd::Zero(n_tx, users);
            for (int k = 0; k < users; ++k) step += user_gmi_approx_grad(sc, k, term_cap);
            step *= tau;
            step += 2.0 * p / (p.squaredNorm() - power_budget);

            const double step_sq = step.squaredNorm();
            if (step_sq <= 0.0) break;

            double alpha = cfg.initial_step;
            double next = -std::numeric_limits<double>::infinity();
            bool accepted = false;
            while (alpha > 1e-16 * cfg.initial_step) {
                const Eigen::MatrixXcd cand = p + alpha * step;
                next = omega(cand, tau);
                if (next >= cur + cfg.sufficient_increase * alpha * step_sq) {
                    p = cand;
                    accepted = true;
                    break;
                }
                alpha *= cfg.backtrack_shrink;
            }
            if (!accepted) break;

            result.max_power_seen = std::max(result.max_power_seen, p.squaredNorm());
            segment.push_back(next);
            ++result.total_inner_iterations;
            const double delta = std::abs(next - cur);
            cur = next;
            if (delta < cfg.inner_tol) break;
        }
        result.omega_trace.push_back(std::move(segment));
        tau *= cfg.barrier_multiplier;
        if (tau >= cfg.tau_max) break;
    }

    result.precoder = p;
    result.objective_nats = sum_approx(p);
    return result;
}

SumRateResult sum_rate(const MisoScenario& sc, const QuadratureSpec& quad,
                       const STiltSearch& search, std::size_t term_cap) {
    validate_scenario(sc);
    SumRateResult out;
    const int users = static_cast<int>(sc.channel.rows());
    out.per_user.reserve(users);
    for (int k = 0; k < users; ++k) {
        out.per_user.push_back(user_gmi(sc, k, quad, search, term_cap));
        out.total_nats += out.per_user.back().nats;
        out.total_bits += out.per_user.back().bits;
    }
    return out;
}

}  // namespace fagci::miso
