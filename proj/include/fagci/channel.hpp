#pragma once

#include <random>
#include <string>
#include <vector>

#include "fagci/constellation.hpp"

namespace fagci {

/// Scalar channel y = x + i + j + z with finite alphabets X, I, J and
/// circular symmetric complex Gaussian noise of total variance noise_var.
struct Channel {
    Constellation x;
    Constellation i;
    Constellation j;
    double noise_var = 1.0;

    Channel() = default;
    Channel(Constellation x_, Constellation i_, Constellation j_, double noise_var_);
};

/// Decoding metric q(x, y). All evaluation happens in the natural-log
/// domain; normalization constants that do not depend on (x, y) are dropped.
class DecodingMetric {
  public:
    enum class Variant {
        Matched,                    // enumerate I and J exactly
        PartialGaussian,            // enumerate I, Gaussianize J
        FullGaussian,               // Gaussianize I and J
        GeneralizedGaussian,        // enumerate I; J+Z per axis as generalized Gaussian
        InterferenceDecomposition,  // enumerate I and J-plus, Gaussianize J-minus
    };

    static DecodingMetric matched() { return DecodingMetric(Variant::Matched); }
    static DecodingMetric partial_gaussian() { return DecodingMetric(Variant::PartialGaussian); }
    static DecodingMetric full_gaussian() { return DecodingMetric(Variant::FullGaussian); }
    static DecodingMetric generalized_gaussian(double shape);
    static DecodingMetric interference_decomposition(Decomposition d);

    Variant variant() const { return variant_; }
    double shape() const { return shape_; }
    const Decomposition& decomposition() const { return decomposition_; }

    /// Short name for reports: matched | partial | full | ggauss:<beta> |
    /// decomp:<split-power-fraction>.
    std::string name() const;

  private:
    explicit DecodingMetric(Variant v) : variant_(v) {}
    Variant variant_;
    double shape_ = 0.0;
    Decomposition decomposition_;
};

/// ln q(x, y). Any complex x is accepted, not just alphabet points.
double log_metric(const DecodingMetric& m, const Channel& chan, cplx x, cplx y);

/// One-shot precomputed evaluator for a (metric, channel) pair. Every metric
/// here depends on (x, y) only through y - x, so the hot path evaluates
/// ln q(0, u) with u = y - x.
class MetricEvaluator {
  public:
    MetricEvaluator(const DecodingMetric& m, const Channel& chan);

    double log_q_diff(cplx u) const;
    double log_q(cplx x, cplx y) const { return log_q_diff(y - x); }

  private:
    DecodingMetric::Variant variant_;
    std::vector<cplx> shifts_;  // enumerated offsets (i-bar [+ j-bar or j-plus])
    double inv_var_ = 1.0;      // Gaussian variants: 1 / effective variance
    double beta_ = 0.0;         // generalized Gaussian shape
    double alpha_pow_beta_ = 1.0;
};

struct ChannelSample {
    cplx x, i, j, y;
};

/// Uniform (x, i, j) draw plus CN(0, noise_var) noise; y = x + i + j + z.
ChannelSample sample_output(const Channel& chan, std::mt19937_64& rng);

}  // namespace fagci
