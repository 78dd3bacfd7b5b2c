#include "fagci/channel.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fagci/quadrature.hpp"

namespace fagci {

Channel::Channel(Constellation x_, Constellation i_, Constellation j_, double noise_var_)
    : x(std::move(x_)), i(std::move(i_)), j(std::move(j_)), noise_var(noise_var_) {
    if (noise_var <= 0.0) throw std::invalid_argument("noise variance must be positive");
}

DecodingMetric DecodingMetric::generalized_gaussian(double shape) {
    if (!(shape > 0.0))
        throw std::invalid_argument("generalized Gaussian shape must be positive");
    DecodingMetric m(Variant::GeneralizedGaussian);
    m.shape_ = shape;
    return m;
}

DecodingMetric DecodingMetric::interference_decomposition(Decomposition d) {
    DecodingMetric m(Variant::InterferenceDecomposition);
    m.decomposition_ = std::move(d);
    return m;
}

std::string DecodingMetric::name() const {
    switch (variant_) {
        case Variant::Matched: return "matched";
        case Variant::PartialGaussian: return "partial";
        case Variant::FullGaussian: return "full";
        case Variant::GeneralizedGaussian: {
            std::ostringstream os;
            os << "ggauss:" << shape_;
            return os.str();
        }
        case Variant::InterferenceDecomposition: {
            std::ostringstream os;
            os << "decomp:" << decomposition_.power_split;
            return os.str();
        }
    }
    return "?";
}

MetricEvaluator::MetricEvaluator(const DecodingMetric& m, const Channel& chan)
    : variant_(m.variant()) {
    double var_i = chan.i.power();
    double var_j = chan.j.power();
    switch (variant_) {
        case DecodingMetric::Variant::Matched:
            shifts_ = minkowski_sum(chan.i, chan.j).points();
            inv_var_ = 1.0 / chan.noise_var;
            break;
        case DecodingMetric::Variant::PartialGaussian:
            shifts_ = chan.i.points();
            inv_var_ = 1.0 / (var_j + chan.noise_var);
            break;
        case DecodingMetric::Variant::FullGaussian:
            inv_var_ = 1.0 / (var_i + var_j + chan.noise_var);
            break;
        case DecodingMetric::Variant::GeneralizedGaussian: {
            shifts_ = chan.i.points();
            beta_ = m.shape();
            // variance-matched scale: alpha^2 = (var_j + var_z) G(1/b) / (2 G(3/b))
            double lg = std::lgamma(1.0 / beta_) - std::lgamma(3.0 / beta_);
            double alpha_sq = (var_j + chan.noise_var) / 2.0 * std::exp(lg);
            alpha_pow_beta_ = std::pow(alpha_sq, beta_ / 2.0);
            break;
        }
        case DecodingMetric::Variant::InterferenceDecomposition: {
            const Decomposition& d = m.decomposition();
            double sum_pow = d.plus.power() + d.minus.power();
            if (std::abs(sum_pow - var_j) > 1e-9 * std::max(1.0, var_j))
                throw std::invalid_argument(
                    "interference decomposition does not match the channel's J power");
            shifts_ = minkowski_sum(chan.i, d.plus).points();
            inv_var_ = 1.0 / (d.minus.power() + chan.noise_var);
            break;
        }
    }
}

double MetricEvaluator::log_q_diff(cplx u) const {
    switch (variant_) {
        case DecodingMetric::Variant::FullGaussian:
            return -std::norm(u) * inv_var_;
        case DecodingMetric::Variant::GeneralizedGaussian: {
            // log-sum-exp over the enumerated I with generalized Gaussian exponent
            double best = -std::numeric_limits<double>::infinity();
            for (const cplx& t : shifts_) {
                cplx d = u - t;
                double e = -(std::pow(std::abs(d.real()), beta_) +
                             std::pow(std::abs(d.imag()), beta_)) /
                           alpha_pow_beta_;
                if (e > best) best = e;
            }
            double acc = 0.0;
            for (const cplx& t : shifts_) {
                cplx d = u - t;
                double e = -(std::pow(std::abs(d.real()), beta_) +
                             std::pow(std::abs(d.imag()), beta_)) /
                           alpha_pow_beta_;
                acc += std::exp(e - best);
            }
            return best + std::log(acc);
        }
        default: {
            // Gaussian mixture over the enumerated shifts
            double best = -std::numeric_limits<double>::infinity();
            for (const cplx& t : shifts_) {
                double e = -std::norm(u - t) * inv_var_;
                if (e > best) best = e;
            }
            double acc = 0.0;
            for (const cplx& t : shifts_) {
                double e = -std::norm(u - t) * inv_var_;
                acc += std::exp(e - best);
            }
            return best + std::log(acc);
        }
    }
}

double log_metric(const DecodingMetric& m, const Channel& chan, cplx x, cplx y) {
    return MetricEvaluator(m, chan).log_q(x, y);
}

ChannelSample sample_output(const Channel& chan, std::mt19937_64& rng) {
    ChannelSample s;
    s.x = chan.x.points()[uniform_index(rng, chan.x.size())];
    s.i = chan.i.points()[uniform_index(rng, chan.i.size())];
    s.j = chan.j.points()[uniform_index(rng, chan.j.size())];
    s.y = s.x + s.i + s.j + complex_normal(rng, chan.noise_var);
    return s;
}

}  // namespace fagci
