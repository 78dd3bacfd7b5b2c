#include "fagci/rates.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fagci {

namespace {

constexpr double kLn2 = 0.6931471805599453;

std::atomic<long> g_clamp_count{0};

double clamp_rate(double nats) {
    if (nats < 0.0) {
        g_clamp_count.fetch_add(1, std::memory_order_relaxed);
        return 0.0;
    }
    return nats;
}

RateEstimate make_estimate(double nats, std::optional<double> s_opt,
                           std::optional<double> std_err_bits) {
    RateEstimate r;
    r.nats = clamp_rate(nats);
    r.bits = r.nats / kLn2;
    r.s_opt = s_opt;
    r.std_err_bits = std_err_bits;
    return r;
}

// Average over c in pts of the quadrature expectation of
// log sum_w exp(-|c + z - w|^2 / var), with w running over the same pts.
// Optionally accumulates the per-node averages for Monte Carlo error bars.
double avg_log_sum_term(const std::vector<cplx>& pts, double inv_var, const NoiseQuadrature& quad,
                        std::vector<double>* node_avg) {
    const std::size_t n = pts.size();
    const std::size_t nz = quad.nodes.size();
    if (node_avg) node_avg->assign(nz, 0.0);
    double total = 0.0;
    std::vector<double> e(n);
    for (std::size_t ci = 0; ci < n; ++ci) {
        const cplx c = pts[ci];
        for (std::size_t zi = 0; zi < nz; ++zi) {
            const cplx v = c + quad.nodes[zi];
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t wi = 0; wi < n; ++wi) {
                const double dr = v.real() - pts[wi].real();
                const double di = v.imag() - pts[wi].imag();
                const double ex = -(dr * dr + di * di) * inv_var;
                e[wi] = ex;
                if (ex > best) best = ex;
            }
            double acc = 0.0;
            for (std::size_t wi = 0; wi < n; ++wi) acc += std::exp(e[wi] - best);
            const double lse = best + std::log(acc);
            total += quad.weights[zi] * lse;
            if (node_avg) (*node_avg)[zi] += lse;
        }
    }
    if (node_avg)
        for (double& a : *node_avg) a /= static_cast<double>(n);
    return total / static_cast<double>(n);
}

double monte_carlo_std_err(const std::vector<double>& node_terms) {
    const std::size_t n = node_terms.size();
    if (n < 2) return 0.0;
    double mean = std::accumulate(node_terms.begin(), node_terms.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : node_terms) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (static_cast<double>(n) * (n - 1)));
}

struct GoldenResult {
    double x = 0.0;
    double value = 0.0;
};

// Golden-section maximization of a unimodal f on [lo, hi].
template <typename F>
GoldenResult golden_section_max(F&& f, double lo, double hi, double rel_tol) {
    if (hi < lo) throw std::invalid_argument("search bracket upper bound below lower bound");
    if (hi == lo) return {lo, f(lo)};
    constexpr double kInvPhi = 0.6180339887498949;
    const double tol = rel_tol * (hi - lo);
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    GoldenResult best = f1 >= f2 ? GoldenResult{x1, f1} : GoldenResult{x2, f2};
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
            if (f2 > best.value) best = {x2, f2};
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
            if (f1 > best.value) best = {x1, f1};
        }
    }
    return best;
}

// Distinct values of {a - b} over a constellation, with per-pair column
// indices. Near-coincident differences collapse to one representative so the
// cached metric table stays small.
struct DiffTable {
    std::vector<cplx> diffs;
    std::vector<int> index;  // [k * n + l] -> column of pts[k] - pts[l]
    std::size_t zero_col = 0;
};

DiffTable build_diff_table(const std::vector<cplx>& pts) {
    const std::size_t n = pts.size();
    double scale = 1.0;
    for (const cplx& p : pts) scale = std::max({scale, std::abs(p.real()), std::abs(p.imag())});
    const double tol = 1e-12 * 2.0 * scale;

    struct Entry {
        cplx d;
        std::size_t pair;
    };
    std::vector<Entry> entries;
    entries.reserve(n * n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) entries.push_back({pts[k] - pts[l], k * n + l});
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.d.real() != b.d.real()) return a.d.real() < b.d.real();
        return a.d.imag() < b.d.imag();
    });

    DiffTable table;
    table.index.assign(n * n, -1);
    cplx rep{0.0, 0.0};
    for (const Entry& e : entries) {
        if (table.diffs.empty() || std::abs(e.d.real() - rep.real()) > tol ||
            std::abs(e.d.imag() - rep.imag()) > tol) {
            rep = e.d;
            table.diffs.push_back(rep);
        }
        table.index[e.pair] = static_cast<int>(table.diffs.size() - 1);
    }
    // the k == l pairs all map to the exact zero difference
    table.zero_col = static_cast<std::size_t>(table.index[0]);
    return table;
}

}  // namespace

long negative_rate_clamp_count() { return g_clamp_count.load(std::memory_order_relaxed); }
void reset_negative_rate_clamp_count() { g_clamp_count.store(0, std::memory_order_relaxed); }

MutualInformationResult mutual_information(const Channel& chan, const QuadratureSpec& quad) {
    const NoiseQuadrature nq = make_noise_quadrature(quad, chan.noise_var);
    const double inv_var = 1.0 / chan.noise_var;

    const std::vector<cplx> sum_ij = minkowski_sum(chan.i, chan.j).points();
    const std::vector<cplx> sum_xij = minkowski_sum(chan.x, minkowski_sum(chan.i, chan.j)).points();

    std::vector<double> node2, node3;
    std::vector<double>* p2 = nq.is_monte_carlo ? &node2 : nullptr;
    std::vector<double>* p3 = nq.is_monte_carlo ? &node3 : nullptr;

    const double t_joint = avg_log_sum_term(sum_xij, inv_var, nq, p2);
    const double t_intf = avg_log_sum_term(sum_ij, inv_var, nq, p3);
    const double log_card = std::log(static_cast<double>(chan.x.size()));

    MutualInformationResult res;
    std::optional<double> se;
    if (nq.is_monte_carlo) {
        std::vector<double> diff(node2.size());
        for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = node3[k] - node2[k];
        se = monte_carlo_std_err(diff) / kLn2;
    }
    res.rate = make_estimate(log_card - t_joint + t_intf, std::nullopt, se);
    // E|Z|^2 / var_z contributes exactly 1 nat to each conditional entropy
    res.h_xij_given_y_bits = (t_joint + 1.0) / kLn2;
    res.h_ij_given_yx_bits = (t_intf + 1.0) / kLn2;
    return res;
}

GmiObjective::GmiObjective(const Channel& chan, const DecodingMetric& metric,
                           const QuadratureSpec& quad) {
    const NoiseQuadrature nq = make_noise_quadrature(quad, chan.noise_var);
    const MetricEvaluator eval(metric, chan);

    const std::vector<cplx>& xp = chan.x.points();
    n_x_ = static_cast<int>(xp.size());
    log_card_x_ = std::log(static_cast<double>(n_x_));

    DiffTable table = build_diff_table(xp);
    diff_index_ = std::move(table.index);
    zero_col_ = table.zero_col;
    n_cols_ = table.diffs.size();

    n_nodes_ = nq.nodes.size();
    node_weights_ = nq.weights;
    monte_carlo_ = nq.is_monte_carlo;

    const std::vector<cplx>& ip = chan.i.points();
    const std::vector<cplx>& jp = chan.j.points();
    n_blocks_ = ip.size() * jp.size();

    log_q_.resize(n_blocks_ * n_nodes_ * n_cols_);
    std::size_t pos = 0;
    for (const cplx& iv : ip)
        for (const cplx& jv : jp) {
            const cplx base = iv + jv;
            for (std::size_t zi = 0; zi < n_nodes_; ++zi) {
                const cplx u = base + nq.nodes[zi];
                for (std::size_t c = 0; c < n_cols_; ++c)
                    log_q_[pos++] = eval.log_q_diff(table.diffs[c] + u);
            }
        }
}

void GmiObjective::add_log_metric_offset(double c) {
    for (double& v : log_q_) v += c;
}

double GmiObjective::value_and_node_terms(double s, std::vector<double>* node_terms) const {
    if (node_terms) node_terms->assign(n_nodes_, 0.0);
    std::vector<double> scaled(n_cols_);
    double total = 0.0;
    const double* row = log_q_.data();
    for (std::size_t b = 0; b < n_blocks_; ++b) {
        for (std::size_t zi = 0; zi < n_nodes_; ++zi, row += n_cols_) {
            for (std::size_t c = 0; c < n_cols_; ++c) scaled[c] = s * row[c];
            const double true_term = scaled[zero_col_];
            double row_sum = 0.0;
            for (int x = 0; x < n_x_; ++x) {
                const int* di = diff_index_.data() + static_cast<std::size_t>(x) * n_x_;
                double best = -std::numeric_limits<double>::infinity();
                for (int xb = 0; xb < n_x_; ++xb) {
                    const double v = scaled[di[xb]];
                    if (v > best) best = v;
                }
                double acc = 0.0;
                for (int xb = 0; xb < n_x_; ++xb) acc += std::exp(scaled[di[xb]] - best);
                row_sum += best + std::log(acc) - true_term;
            }
            total += node_weights_[zi] * row_sum;
            if (node_terms) (*node_terms)[zi] += row_sum;
        }
    }
    const double denom = static_cast<double>(n_blocks_) * n_x_;
    if (node_terms)
        for (double& v : *node_terms) v /= denom;
    return log_card_x_ - total / denom;
}

double GmiObjective::operator()(double s) const { return value_and_node_terms(s, nullptr); }

RateEstimate GmiObjective::maximize(const STiltSearch& search) const {
    if (!(search.lo >= 0.0)) throw std::invalid_argument("tilt bracket must be nonnegative");
    GoldenResult best =
        golden_section_max([this](double s) { return (*this)(s); }, search.lo, search.hi,
                           search.rel_tol);
    std::optional<double> se;
    if (monte_carlo_) {
        std::vector<double> node_terms;
        value_and_node_terms(best.x, &node_terms);
        se = monte_carlo_std_err(node_terms) / kLn2;
    }
    return make_estimate(best.value, best.x, se);
}

RateEstimate gmi(const Channel& chan, const DecodingMetric& metric, const QuadratureSpec& quad,
                 const STiltSearch& search) {
    return GmiObjective(chan, metric, quad).maximize(search);
}

RateEstimate gmi_approx(const Channel& chan, ApproxVariant variant) {
    return make_estimate(gmi_approx_raw_nats(chan, variant), std::nullopt, std::nullopt);
}

double gmi_approx_raw_nats(const Channel& chan, ApproxVariant variant) {
    const double var_i = chan.i.power();
    const double var_j = chan.j.power();
    const double denom = variant == ApproxVariant::Partial
                             ? var_j + 2.0 * chan.noise_var
                             : var_i + var_j + 2.0 * chan.noise_var;
    const double inv = 1.0 / denom;

    const std::vector<cplx> sum_xij = minkowski_sum(chan.x, minkowski_sum(chan.i, chan.j)).points();
    const std::vector<cplx> sum_ij = minkowski_sum(chan.i, chan.j).points();
    const std::vector<cplx> inner_first = variant == ApproxVariant::Partial
                                              ? minkowski_sum(chan.x, chan.i).points()
                                              : chan.x.points();

    auto avg_lse = [inv](const std::vector<cplx>& outer, const std::vector<cplx>& inner) {
        double total = 0.0;
        for (const cplx& c : outer) {
            double best = -std::numeric_limits<double>::infinity();
            for (const cplx& w : inner) {
                double e = -std::norm(c - w) * inv;
                if (e > best) best = e;
            }
            double acc = 0.0;
            for (const cplx& w : inner) acc += std::exp(-std::norm(c - w) * inv - best);
            total += best + std::log(acc);
        }
        return total / static_cast<double>(outer.size());
    };

    const double first = avg_lse(sum_xij, inner_first);
    double second;
    if (variant == ApproxVariant::Partial) {
        second = avg_lse(sum_ij, chan.i.points());
    } else {
        double acc = 0.0;
        for (const cplx& c : sum_ij) acc += -std::norm(c) * inv;
        second = acc / static_cast<double>(sum_ij.size());
    }

    const double log_card = std::log(static_cast<double>(chan.x.size()));
    return log_card - first + second;
}

ShapeSearchResult optimize_shape(const Channel& chan, const QuadratureSpec& quad,
                                 const ShapeGrid& grid, const STiltSearch& search) {
    if (!(grid.lo > 0.0) || grid.hi > 50.0 || grid.hi < grid.lo || !(grid.step > 0.0))
        throw std::invalid_argument("shape grid must lie within (0, 50] with positive step");
    ShapeSearchResult best;
    bool have = false;
    for (double beta = grid.lo; beta <= grid.hi + 1e-12; beta += grid.step) {
        GmiObjective obj(chan, DecodingMetric::generalized_gaussian(beta), quad);
        RateEstimate r = obj.maximize(search);
        if (!have || r.nats > best.rate.nats) {
            best.beta = beta;
            best.rate = r;
            have = true;
        }
    }
    return best;
}

}  // namespace fagci
