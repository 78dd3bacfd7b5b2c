#include "fagci/demod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fagci {

PosteriorVector posterior_from_log_scores(const std::vector<double>& log_scores) {
    if (log_scores.empty()) throw std::invalid_argument("empty log-score vector");
    const double best = *std::max_element(log_scores.begin(), log_scores.end());
    PosteriorVector p;
    p.probs.resize(log_scores.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < log_scores.size(); ++k) {
        p.probs[k] = std::exp(log_scores[k] - best);
        acc += p.probs[k];
    }
    for (double& v : p.probs) v /= acc;
    return p;
}

PosteriorVector posterior(const DecodingMetric& m, const Channel& chan, cplx y) {
    const MetricEvaluator eval(m, chan);
    std::vector<double> scores(chan.x.size());
    for (std::size_t k = 0; k < scores.size(); ++k)
        scores[k] = eval.log_q(chan.x.points()[k], y);
    return posterior_from_log_scores(scores);
}

std::vector<double> bit_llrs(const PosteriorVector& p, const Labeling& labeling) {
    const std::size_t n = p.probs.size();
    if (n == 0 || (n & (n - 1)) != 0 || labeling.labels.size() != n ||
        (1u << labeling.bits) != n)
        throw std::invalid_argument("bit LLRs need a power-of-two alphabet with matching labels");

    std::vector<double> llrs(labeling.bits);
    for (int bit = 0; bit < labeling.bits; ++bit) {
        const std::uint32_t mask = 1u << (labeling.bits - 1 - bit);  // bit 0 = MSB
        double p0 = 0.0, p1 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (labeling.labels[k] & mask)
                p1 += p.probs[k];
            else
                p0 += p.probs[k];
        }
        double llr;
        if (p0 <= 0.0 && p1 <= 0.0)
            llr = 0.0;
        else if (p0 <= 0.0)
            llr = -kLlrClamp;
        else if (p1 <= 0.0)
            llr = kLlrClamp;
        else
            llr = std::log(p0) - std::log(p1);
        llrs[bit] = std::clamp(llr, -kLlrClamp, kLlrClamp);
    }
    return llrs;
}

}  // namespace fagci
