#include "fagci/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace fagci {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInvPiQuarter = 0.7511255444649425;  // pi^(-1/4)

}  // namespace

// Nodes by Newton iteration on the orthonormal Hermite recurrence
// (weight exp(-t^2)); largest roots first within each half.
GaussHermiteRule gauss_hermite_rule(int n) {
    if (n < 2) throw std::invalid_argument("Gauss-Hermite rule needs at least 2 nodes");
    GaussHermiteRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);

    int half = (n + 1) / 2;
    double x = 0.0;
    for (int i = 0; i < half; ++i) {
        if (i == 0) {
            x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            x -= 1.14 * std::pow(static_cast<double>(n), 0.426) / x;
        } else if (i == 2) {
            x = 1.86 * x - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            x = 1.91 * x - 0.91 * rule.nodes[1];
        } else {
            x = 2.0 * x - rule.nodes[i - 2];
        }
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = kInvPiQuarter;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = x * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) <= 1e-15 * std::max(1.0, std::abs(x))) break;
        }
        rule.nodes[i] = x;
        rule.nodes[n - 1 - i] = -x;
        rule.weights[i] = 2.0 / (pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

NoiseQuadrature make_noise_quadrature(const QuadratureSpec& spec, double variance) {
    if (variance <= 0.0) throw std::invalid_argument("noise variance must be positive");
    NoiseQuadrature q;
    if (spec.method == QuadratureSpec::Method::GaussHermite) {
        GaussHermiteRule rule = gauss_hermite_rule(spec.nodes);
        int n = spec.nodes;
        q.nodes.reserve(static_cast<std::size_t>(n) * n);
        q.weights.reserve(static_cast<std::size_t>(n) * n);
        // Z = sqrt(variance) * (t_a + i t_b) with weight w_a w_b / pi
        double s = std::sqrt(variance);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                q.nodes.emplace_back(s * rule.nodes[a], s * rule.nodes[b]);
                q.weights.push_back(rule.weights[a] * rule.weights[b] / kPi);
            }
    } else {
        if (spec.samples < 1) throw std::invalid_argument("Monte Carlo needs at least 1 sample");
        q.is_monte_carlo = true;
        std::mt19937_64 rng(spec.seed);
        q.nodes.reserve(spec.samples);
        double w = 1.0 / static_cast<double>(spec.samples);
        q.weights.assign(spec.samples, w);
        for (long i = 0; i < spec.samples; ++i) q.nodes.push_back(complex_normal(rng, variance));
    }
    return q;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    // via the unit double; bias is < 2^-53 per draw for the alphabet sizes here
    double u = (rng() >> 11) * 0x1.0p-53;
    auto idx = static_cast<std::size_t>(u * static_cast<double>(n));
    return idx < n ? idx : n - 1;
}

double standard_normal(std::mt19937_64& rng) {
    // Box-Muller, one value per call (the sine branch is discarded)
    double u1 = ((rng() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = (rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

cplx complex_normal(std::mt19937_64& rng, double variance) {
    double s = std::sqrt(variance / 2.0);
    double re = standard_normal(rng);
    double im = standard_normal(rng);
    return {s * re, s * im};
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    // splitmix64 over base xor a stride of the index
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace fagci
