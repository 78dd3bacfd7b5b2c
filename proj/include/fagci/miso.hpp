#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <vector>

#include "fagci/rates.hpp"

namespace fagci::miso {

/// Thrown when a product alphabet would exceed the enumeration cap.
class ResourceLimitError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultTermCap = 1'000'000;

/// One-ring scattering geometry: uniform linear array at half-wavelength
/// spacing, scatterers uniform over [theta - spread, theta + spread].
struct OneRingConfig {
    int n_tx = 1;
    double theta = 0.0;   // center angle of departure, radians
    double spread = 0.1;  // angular spread, radians, in (0, pi]
};

/// Transmit covariance with its eigenfactors; r = u diag(lambda) u^H up to
/// the discarded near-zero eigenvalues.
struct CovarianceModel {
    Eigen::MatrixXcd r;
    Eigen::MatrixXcd u;       // n_tx x rank
    Eigen::VectorXd lambda;   // positive eigenvalues, descending
};

CovarianceModel one_ring_covariance(const OneRingConfig& cfg);

/// Karhunen-Loeve draw h = u diag(sqrt(lambda)) w with w ~ CN(0, I).
Eigen::VectorXcd sample_channel(const CovarianceModel& cov, std::mt19937_64& rng);

/// Per-user partition of the interfering streams into enumerated (opt) and
/// Gaussianized (gauss) sets.
struct DecodingStrategy {
    std::vector<std::vector<int>> opt_sets;
    std::vector<std::vector<int>> gauss_sets;

    static DecodingStrategy mi(int users);
    static DecodingStrategy partial_cycle(int users);
    static DecodingStrategy full(int users);

    int users() const { return static_cast<int>(opt_sets.size()); }
    void validate(int users) const;
};

struct MisoScenario {
    Eigen::MatrixXcd channel;   // K x N_T, row k is h_k^H
    Eigen::MatrixXcd precoder;  // N_T x K
    Constellation constellation;  // shared by all users, unit power
    DecodingStrategy strategy;
    double noise_var = 1.0;
    double power_budget = 1.0;
};

void validate_scenario(const MisoScenario& sc);

/// The scalar channel seen by one user: own stream as X, enumerated
/// interferers folded into I, Gaussianized interferers into J.
Channel induced_channel(const MisoScenario& sc, int user,
                        std::size_t term_cap = kDefaultTermCap);

/// Exact per-user GMI under the scenario's decoding strategy; equals the
/// scalar-channel GMI with the partial-Gaussian metric on induced_channel().
RateEstimate user_gmi(const MisoScenario& sc, int user, const QuadratureSpec& quad,
                      const STiltSearch& search = {}, std::size_t term_cap = kDefaultTermCap);

/// Closed-form approximation of user_gmi (deterministic, s = 1).
RateEstimate user_gmi_approx(const MisoScenario& sc, int user,
                             std::size_t term_cap = kDefaultTermCap);

/// Gradient of the approximate per-user GMI with respect to the precoder,
/// N_T x K aligned with the precoder's columns. Real-pair convention: for a
/// perturbation d, the first-order change is Re tr(grad^H d), i.e. the real
/// and imaginary parts of each entry are the partial derivatives w.r.t. the
/// real and imaginary parts of the corresponding precoder entry.
Eigen::MatrixXcd user_gmi_approx_grad(const MisoScenario& sc, int user,
                                      std::size_t term_cap = kDefaultTermCap);

/// Gradient-ascent-with-barrier settings. barrier_multiplier is the growth
/// factor of the barrier weight tau between outer stages (distinct from the
/// generalized-Gaussian shape).
struct OptimizerConfig {
    double barrier_tau0 = 1.0;
    double barrier_multiplier = 10.0;
    double tau_max = 1e4;
    double inner_tol = 1e-5;
    int max_inner_iters = 500;
    double backtrack_shrink = 0.5;
    double sufficient_increase = 1e-4;
    double initial_step = 1.0;

    void validate() const;
};

struct OptimizeResult {
    Eigen::MatrixXcd precoder;
    /// Objective values per accepted iterate, one segment per barrier stage;
    /// non-decreasing within each segment.
    std::vector<std::vector<double>> omega_trace;
    int total_inner_iterations = 0;
    double max_power_seen = 0.0;  // max ||P||_F^2 over accepted iterates
    double objective_nats = 0.0;  // sum of approximate user GMIs at the result
};

/// Sum-rate maximization under a transmit power budget: gradient ascent on
/// tau * sum_k I_approx + log(power_budget - ||P||_F^2) with backtracking
/// line search, tau escalated geometrically.
OptimizeResult optimize_precoder(const Eigen::MatrixXcd& channel,
                                 const Constellation& constellation,
                                 const DecodingStrategy& strategy, double power_budget,
                                 double noise_var, const OptimizerConfig& cfg,
                                 std::mt19937_64& rng,
                                 std::size_t term_cap = kDefaultTermCap);

struct SumRateResult {
    std::vector<RateEstimate> per_user;
    double total_nats = 0.0;
    double total_bits = 0.0;
};

/// Exact GMI per user under the scenario's strategy, plus the total.
SumRateResult sum_rate(const MisoScenario& sc, const QuadratureSpec& quad,
                       const STiltSearch& search = {}, std::size_t term_cap = kDefaultTermCap);

}  // namespace fagci::miso
