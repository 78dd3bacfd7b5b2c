#pragma once

#include <vector>

#include "fagci/channel.hpp"

namespace fagci {

/// Posterior over the input alphabet, aligned with the constellation's point
/// order; entries are nonnegative and sum to 1.
struct PosteriorVector {
    std::vector<double> probs;
};

/// Normalizes a vector of log scores into a probability vector; invariant
/// under adding a constant to the scores.
PosteriorVector posterior_from_log_scores(const std::vector<double>& log_scores);

/// Symbol posterior under the given decoding metric: probs[k] proportional
/// to q(x_k, y). Constant prefactors cancel in the normalization.
PosteriorVector posterior(const DecodingMetric& m, const Channel& chan, cplx y);

/// Per-bit log-likelihood ratios, ln P(bit = 0) - ln P(bit = 1), bit 0 being
/// the most significant label bit. Clamped to +-50.
std::vector<double> bit_llrs(const PosteriorVector& p, const Labeling& labeling);

inline constexpr double kLlrClamp = 50.0;

}  // namespace fagci
