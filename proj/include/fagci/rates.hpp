#pragma once

#include <optional>
#include <vector>

#include "fagci/channel.hpp"
#include "fagci/quadrature.hpp"

namespace fagci {

struct RateEstimate {
    double nats = 0.0;
    double bits = 0.0;  // nats / ln 2
    std::optional<double> s_opt;
    std::optional<double> std_err_bits;  // Monte Carlo quadrature only
};

/// Count of rate results clamped up to 0 since process start (mismatched GMI
/// can come out numerically negative in the strong-interference regime).
long negative_rate_clamp_count();
void reset_negative_rate_clamp_count();

struct MutualInformationResult {
    RateEstimate rate;
    double h_xij_given_y_bits = 0.0;  // H(X, I, J | Y)
    double h_ij_given_yx_bits = 0.0;  // H(I, J | Y - X)
};

/// Constellation-constrained mutual information: log|X| minus the joint
/// conditional entropy term plus the interference-only term, alphabets
/// enumerated exactly and the noise expectation realized by `quad`.
MutualInformationResult mutual_information(const Channel& chan, const QuadratureSpec& quad);

/// Bracketed golden-section search for the GMI tilt s >= 0. lo == hi pins s.
struct STiltSearch {
    double lo = 1e-3;
    double hi = 4.0;
    double rel_tol = 1e-4;  // on the bracket width
};

/// GMI objective with the alphabet enumeration and noise quadrature baked
/// in; cheap to evaluate at many s (shared nodes make the curve smooth).
class GmiObjective {
  public:
    GmiObjective(const Channel& chan, const DecodingMetric& metric, const QuadratureSpec& quad);

    /// Objective of the sup in nats at tilt s (not clamped).
    double operator()(double s) const;

    /// Maximize over the bracket; result clamped at 0, Monte Carlo standard
    /// error attached when applicable.
    RateEstimate maximize(const STiltSearch& search) const;

    /// Adds a constant to every stored log-metric value (scales q by e^c);
    /// the objective is invariant, which tests rely on.
    void add_log_metric_offset(double c);

  private:
    double value_and_node_terms(double s, std::vector<double>* node_terms) const;

    int n_x_ = 0;
    std::size_t n_cols_ = 0;
    std::size_t n_nodes_ = 0;
    std::size_t n_blocks_ = 0;  // |I| * |J|
    std::size_t zero_col_ = 0;
    std::vector<int> diff_index_;  // [x * n_x + xbar] -> column
    std::vector<double> log_q_;    // [(block * n_nodes + node) * n_cols + col]
    std::vector<double> node_weights_;
    bool monte_carlo_ = false;
    double log_card_x_ = 0.0;
};

RateEstimate gmi(const Channel& chan, const DecodingMetric& metric, const QuadratureSpec& quad,
                 const STiltSearch& search = {});

/// Closed-form approximations of the partial- and full-Gaussian GMI
/// (deterministic, s = 1 baked in).
enum class ApproxVariant { Partial, Full };
RateEstimate gmi_approx(const Channel& chan, ApproxVariant variant);

/// Unclamped variant of gmi_approx in nats; optimization objectives use this
/// so the gradient stays consistent where the approximation dips below 0.
double gmi_approx_raw_nats(const Channel& chan, ApproxVariant variant);

/// Exhaustive grid search over the generalized-Gaussian shape, maximizing
/// the GMI with shared quadrature nodes across candidates.
struct ShapeGrid {
    double lo = 1.0;
    double hi = 10.0;
    double step = 0.25;
};
struct ShapeSearchResult {
    double beta = 0.0;
    RateEstimate rate;
};
ShapeSearchResult optimize_shape(const Channel& chan, const QuadratureSpec& quad,
                                 const ShapeGrid& grid, const STiltSearch& search = {});

}  // namespace fagci
