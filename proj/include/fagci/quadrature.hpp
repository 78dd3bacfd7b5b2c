#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fagci/constellation.hpp"

namespace fagci {

/// How expectations over the complex Gaussian noise are realized.
struct QuadratureSpec {
    enum class Method { GaussHermite, MonteCarlo };

    Method method = Method::GaussHermite;
    int nodes = 40;            // per real axis (GaussHermite)
    long samples = 100000;     // MonteCarlo
    std::uint64_t seed = 1;    // MonteCarlo

    static QuadratureSpec gauss_hermite(int nodes_per_axis) {
        QuadratureSpec q;
        q.method = Method::GaussHermite;
        q.nodes = nodes_per_axis;
        return q;
    }
    static QuadratureSpec monte_carlo(long samples, std::uint64_t seed) {
        QuadratureSpec q;
        q.method = Method::MonteCarlo;
        q.samples = samples;
        q.seed = seed;
        return q;
    }
};

/// Nodes and weights of a Gauss-Hermite rule for weight exp(-t^2); weights
/// sum to sqrt(pi).
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussHermiteRule gauss_hermite_rule(int n);

/// Discretization of E_Z[f(Z)] for Z ~ CN(0, variance): weighted complex
/// nodes with weights summing to 1. Deterministic tensor Gauss-Hermite, or
/// seeded Monte Carlo draws (is_monte_carlo flags the latter so callers can
/// attach standard errors).
struct NoiseQuadrature {
    std::vector<cplx> nodes;
    std::vector<double> weights;
    bool is_monte_carlo = false;
};
NoiseQuadrature make_noise_quadrature(const QuadratureSpec& spec, double variance);

/// Deterministic uniform index / Gaussian transforms on top of mt19937_64 so
/// sampled streams are bit-identical across standard libraries.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);
double standard_normal(std::mt19937_64& rng);
cplx complex_normal(std::mt19937_64& rng, double variance);

/// Stream splitting: derived seed for a task index under a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace fagci
