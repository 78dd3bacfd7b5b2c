#include <doctest.h>

#include <cmath>
#include <random>

#include "fagci/miso.hpp"

using namespace fagci;
using namespace fagci::miso;

namespace {

constexpr double kPi = 3.14159265358979323846;

Constellation unit_qpsk() { return Constellation::standard(ConstellationKind::Psk, 4, 1.0); }

MisoScenario random_scenario(int users, int n_tx, const DecodingStrategy& strategy,
                             std::uint64_t seed, double precoder_power = 2.0) {
    MisoScenario sc;
    sc.channel.resize(users, n_tx);
    sc.precoder.resize(n_tx, users);
    std::mt19937_64 rng(seed);
    for (int r = 0; r < users; ++r)
        for (int c = 0; c < n_tx; ++c) sc.channel(r, c) = complex_normal(rng, 1.0);
    for (int r = 0; r < n_tx; ++r)
        for (int c = 0; c < users; ++c) sc.precoder(r, c) = complex_normal(rng, 1.0);
    sc.precoder *= std::sqrt(precoder_power / sc.precoder.squaredNorm());
    sc.constellation = unit_qpsk();
    sc.strategy = strategy;
    sc.noise_var = 1.0;
    sc.power_budget = 2.0 * precoder_power;
    return sc;
}

}  // namespace

TEST_CASE("one-ring covariance has unit diagonal and matches the Bessel identity") {
    const CovarianceModel cov = one_ring_covariance({2, 0.0, kPi});
    CHECK(cov.r(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(cov.r(0, 0).imag()) < 1e-12);
    // full-circle spread integrates to the zeroth-order Bessel function
    const double expected = std::cyl_bessel_j(0.0, kPi);
    CHECK(cov.r(0, 1).real() == doctest::Approx(expected).epsilon(1e-9));
    CHECK(std::abs(cov.r(0, 1).imag()) < 1e-9);
}

TEST_CASE("one-ring covariance matches a brute-force Riemann sum") {
    const OneRingConfig cfg{4, kPi / 3.0, kPi / 6.0};
    const CovarianceModel cov = one_ring_covariance(cfg);
    const int panels = 1000000;
    for (int d = 1; d < 4; ++d) {
        cplx acc = 0.0;
        const double lo = cfg.theta - cfg.spread;
        const double width = 2.0 * cfg.spread;
        for (int k = 0; k < panels; ++k) {
            const double a = lo + (k + 0.5) * width / panels;
            const double ph = -kPi * d * std::sin(a);
            acc += cplx(std::cos(ph), std::sin(ph));
        }
        acc /= static_cast<double>(panels);
        CHECK(std::abs(cov.r(d, 0) - acc) < 1e-8);
        CHECK(std::abs(cov.r(0, d) - std::conj(acc)) < 1e-8);
    }
    // Hermitian, PSD, and factorization consistency
    CHECK((cov.r - cov.r.adjoint()).norm() < 1e-12);
    for (int k = 0; k < cov.lambda.size(); ++k) CHECK(cov.lambda(k) > 0.0);
    const Eigen::MatrixXcd recon =
        cov.u * cov.lambda.asDiagonal() * cov.u.adjoint();
    CHECK((recon - cov.r).norm() < 1e-8);
}

TEST_CASE("channel draws are reproducible and match the covariance") {
    const CovarianceModel cov = one_ring_covariance({3, kPi / 4.0, kPi / 8.0});
    std::mt19937_64 a(5), b(5);
    CHECK((sample_channel(cov, a) - sample_channel(cov, b)).norm() == 0.0);

    std::mt19937_64 rng(17);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(3, 3);
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) {
        const Eigen::VectorXcd h = sample_channel(cov, rng);
        acc += h * h.adjoint();
    }
    acc /= static_cast<double>(draws);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) CHECK(std::abs(acc(r, c) - cov.r(r, c)) < 0.02);
}

TEST_CASE("rank-one covariance produces colinear draws") {
    CovarianceModel cov;
    cov.r = Eigen::MatrixXcd::Ones(2, 2);
    cov.u = Eigen::MatrixXcd(2, 1);
    cov.u << cplx(std::sqrt(0.5), 0.0), cplx(std::sqrt(0.5), 0.0);
    cov.lambda = Eigen::VectorXd(1);
    cov.lambda << 2.0;
    std::mt19937_64 rng(3);
    for (int k = 0; k < 10; ++k) {
        const Eigen::VectorXcd h = sample_channel(cov, rng);
        CHECK(std::abs(h(0) - h(1)) < 1e-12);
    }
}

TEST_CASE("identity covariance gives unit-variance entries") {
    CovarianceModel cov;
    cov.r = Eigen::MatrixXcd::Identity(2, 2);
    cov.u = Eigen::MatrixXcd::Identity(2, 2);
    cov.lambda = Eigen::VectorXd::Ones(2);
    std::mt19937_64 rng(29);
    double acc = 0.0;
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) acc += sample_channel(cov, rng).squaredNorm();
    CHECK(acc / draws == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("strategy constructors partition the users") {
    for (int users : {1, 2, 3, 4}) {
        DecodingStrategy::mi(users).validate(users);
        DecodingStrategy::partial_cycle(users).validate(users);
        DecodingStrategy::full(users).validate(users);
    }
    DecodingStrategy bad = DecodingStrategy::full(3);
    bad.gauss_sets[0] = {1};  // user 2 unassigned
    CHECK_THROWS_AS(bad.validate(3), std::invalid_argument);
    bad.gauss_sets[0] = {1, 1, 2};
    CHECK_THROWS_AS(bad.validate(3), std::invalid_argument);
}

TEST_CASE("single-user link saturates at the alphabet entropy") {
    MisoScenario sc;
    sc.channel = Eigen::MatrixXcd::Zero(1, 2);
    sc.channel(0, 0) = 1.0;
    sc.precoder = Eigen::MatrixXcd::Zero(2, 1);
    sc.precoder(0, 0) = 1.0;
    sc.constellation = unit_qpsk();
    sc.strategy = DecodingStrategy::full(1);
    sc.noise_var = 1e-4;
    sc.power_budget = 2.0;
    const RateEstimate r = user_gmi(sc, 0, QuadratureSpec::gauss_hermite(24));
    CHECK(r.bits == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("two-user scenarios reduce to the scalar channel exactly") {
    const QuadratureSpec quad = QuadratureSpec::gauss_hermite(16);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        for (bool gaussianize : {true, false}) {
            const DecodingStrategy strategy =
                gaussianize ? DecodingStrategy::full(2) : DecodingStrategy::mi(2);
            const MisoScenario sc = random_scenario(2, 2, strategy, seed);
            for (int k = 0; k < 2; ++k) {
                const Eigen::RowVectorXcd gains = sc.channel.row(k) * sc.precoder;
                Constellation opt = Constellation::zero();
                Constellation gauss = Constellation::zero();
                if (gaussianize)
                    gauss = sc.constellation.scaled_by(gains(1 - k));
                else
                    opt = sc.constellation.scaled_by(gains(1 - k));
                const Channel manual(sc.constellation.scaled_by(gains(k)), opt, gauss,
                                     sc.noise_var);
                const double direct =
                    gmi(manual, DecodingMetric::partial_gaussian(), quad).bits;
                const double through = user_gmi(sc, k, quad).bits;
                CHECK(std::abs(direct - through) < 1e-9);

                const double direct_approx = gmi_approx(manual, ApproxVariant::Partial).bits;
                const double through_approx = user_gmi_approx(sc, k).bits;
                CHECK(std::abs(direct_approx - through_approx) < 1e-9);
            }
        }
    }
}

TEST_CASE("zero-forcing makes the strategy irrelevant") {
    MisoScenario sc;
    sc.channel = Eigen::MatrixXcd::Identity(2, 2);
    sc.precoder = Eigen::MatrixXcd::Zero(2, 2);
    sc.precoder(0, 0) = cplx(1.3, 0.2);
    sc.precoder(1, 1) = cplx(0.4, -1.1);
    sc.constellation = unit_qpsk();
    sc.noise_var = 0.5;
    sc.power_budget = 10.0;
    const QuadratureSpec quad = QuadratureSpec::gauss_hermite(16);
    double lo = 1e300, hi = -1e300;
    for (const DecodingStrategy& strategy :
         {DecodingStrategy::mi(2), DecodingStrategy::partial_cycle(2),
          DecodingStrategy::full(2)}) {
        sc.strategy = strategy;
        const double bits = user_gmi(sc, 0, quad).bits;
        lo = std::min(lo, bits);
        hi = std::max(hi, bits);
    }
    CHECK(hi - lo < 1e-6);
}

TEST_CASE("the MI strategy reproduces the induced-channel mutual information") {
    const MisoScenario sc = random_scenario(3, 3, DecodingStrategy::mi(3), 7);
    const QuadratureSpec quad = QuadratureSpec::gauss_hermite(16);
    for (int k = 0; k < 3; ++k) {
        const Channel induced = induced_channel(sc, k);
        const double mi_bits = mutual_information(induced, quad).rate.bits;
        const double gmi_bits = user_gmi(sc, k, quad, STiltSearch{1.0, 1.0, 1e-4}).bits;
        CHECK(std::abs(mi_bits - gmi_bits) < 1e-6);
    }
}

TEST_CASE("approximate user rate respects the alphabet entropy bound") {
    for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
        const MisoScenario sc = random_scenario(3, 4, DecodingStrategy::partial_cycle(3), seed);
        for (int k = 0; k < 3; ++k) {
            const double bits = user_gmi_approx(sc, k).bits;
            CHECK(std::isfinite(bits));
            CHECK(bits <= 2.0 + 1e-9);
        }
    }
}

TEST_CASE("interference-free approximation reaches the alphabet entropy at high SNR") {
    MisoScenario sc;
    sc.channel = Eigen::MatrixXcd::Identity(1, 1);
    sc.precoder = Eigen::MatrixXcd::Identity(1, 1) * 30.0;
    sc.constellation = unit_qpsk();
    sc.strategy = DecodingStrategy::full(1);
    sc.noise_var = 1.0;
    sc.power_budget = 1000.0;
    CHECK(user_gmi_approx(sc, 0).bits == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("analytic gradients match finite differences tightly on small scenarios") {
    const double step = 1e-5;
    for (std::uint64_t seed : {21ULL, 22ULL, 23ULL, 24ULL, 25ULL}) {
        const MisoScenario base = random_scenario(2, 2, DecodingStrategy::partial_cycle(2), seed);
        for (int k = 0; k < 2; ++k) {
            const Eigen::MatrixXcd analytic = user_gmi_approx_grad(base, k);
            Eigen::MatrixXcd fd(2, 2);
            MisoScenario sc = base;
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) {
                    double parts[2];
                    for (int axis = 0; axis < 2; ++axis) {
                        const cplx delta =
                            axis == 0 ? cplx(step, 0.0) : cplx(0.0, step);
                        sc.precoder = base.precoder;
                        sc.precoder(r, c) += delta;
                        const double up = gmi_approx_raw_nats(induced_channel(sc, k),
                                                              ApproxVariant::Partial);
                        sc.precoder = base.precoder;
                        sc.precoder(r, c) -= delta;
                        const double dn = gmi_approx_raw_nats(induced_channel(sc, k),
                                                              ApproxVariant::Partial);
                        parts[axis] = (up - dn) / (2.0 * step);
                    }
                    fd(r, c) = cplx(parts[0], parts[1]);
                }
            const double rel = (analytic - fd).norm() / std::max(fd.norm(), 1e-12);
            CHECK(rel < 1e-5);
        }
    }
}

TEST_CASE("a dead channel has a zero gradient") {
    MisoScenario sc = random_scenario(2, 3, DecodingStrategy::full(2), 31);
    sc.channel.row(0).setZero();
    CHECK(user_gmi_approx_grad(sc, 0).norm() == 0.0);
}

TEST_CASE("zero-forcing zeroes the co-user gradient columns") {
    MisoScenario sc;
    sc.channel = Eigen::MatrixXcd::Identity(2, 2);
    sc.precoder = Eigen::MatrixXcd::Zero(2, 2);
    sc.precoder(0, 0) = cplx(0.9, 0.1);
    sc.precoder(1, 1) = cplx(-0.3, 0.8);
    sc.constellation = unit_qpsk();
    sc.noise_var = 1.0;
    sc.power_budget = 10.0;
    for (const DecodingStrategy& strategy :
         {DecodingStrategy::full(2), DecodingStrategy::mi(2)}) {
        sc.strategy = strategy;
        const Eigen::MatrixXcd g = user_gmi_approx_grad(sc, 0);
        CHECK(g.col(1).norm() < 1e-10);
        CHECK(g.col(0).norm() > 1e-6);
    }
}

TEST_CASE("permuting users permutes the per-user rates") {
    const QuadratureSpec quad = QuadratureSpec::gauss_hermite(12);
    const MisoScenario sc = random_scenario(3, 3, DecodingStrategy::partial_cycle(3), 41);
    // swap users 0 and 2 everywhere
    const std::vector<int> perm{2, 1, 0};
    MisoScenario swapped = sc;
    for (int k = 0; k < 3; ++k) {
        swapped.channel.row(k) = sc.channel.row(perm[k]);
        swapped.precoder.col(k) = sc.precoder.col(perm[k]);
    }
    std::vector<int> inverse(3);
    for (int k = 0; k < 3; ++k) inverse[perm[k]] = k;
    for (int k = 0; k < 3; ++k) {
        swapped.strategy.opt_sets[k].clear();
        swapped.strategy.gauss_sets[k].clear();
        for (int l : sc.strategy.opt_sets[perm[k]])
            swapped.strategy.opt_sets[k].push_back(inverse[l]);
        for (int l : sc.strategy.gauss_sets[perm[k]])
            swapped.strategy.gauss_sets[k].push_back(inverse[l]);
    }
    for (int k = 0; k < 3; ++k) {
        const double a = user_gmi(sc, perm[k], quad).bits;
        const double b = user_gmi(swapped, k, quad).bits;
        CHECK(std::abs(a - b) < 1e-9);
    }
}

TEST_CASE("the enumeration cap trips on oversized products") {
    const MisoScenario sc = random_scenario(3, 3, DecodingStrategy::mi(3), 51);
    CHECK_THROWS_AS(user_gmi(sc, 0, QuadratureSpec::gauss_hermite(8), {}, 10),
                    ResourceLimitError);
    CHECK_THROWS_AS(user_gmi_approx_grad(sc, 0, 10), ResourceLimitError);
}

TEST_CASE("scenario validation catches mismatched shapes and powers") {
    MisoScenario sc = random_scenario(2, 2, DecodingStrategy::full(2), 61);
    sc.constellation = Constellation::standard(ConstellationKind::Psk, 4, 2.0);
    CHECK_THROWS_AS(validate_scenario(sc), std::invalid_argument);
    MisoScenario sc2 = random_scenario(2, 2, DecodingStrategy::full(2), 62);
    sc2.precoder.resize(3, 2);
    CHECK_THROWS_AS(validate_scenario(sc2), std::invalid_argument);
}

TEST_CASE("the optimizer keeps iterates feasible and the trace monotone") {
    const CovarianceModel cov = one_ring_covariance({3, kPi / 3.0, kPi / 6.0});
    OptimizerConfig cfg;
    cfg.tau_max = 100.0;  // short run for the unit suite
    cfg.max_inner_iters = 60;
    for (std::uint64_t seed : {71ULL, 72ULL, 73ULL}) {
        std::mt19937_64 rng(seed);
        Eigen::MatrixXcd channel(2, 3);
        for (int k = 0; k < 2; ++k) channel.row(k) = sample_channel(cov, rng).adjoint();
        const double budget = 4.0;
        const OptimizeResult res =
            optimize_precoder(channel, unit_qpsk(), DecodingStrategy::partial_cycle(2), budget,
                              1.0, cfg, rng);
        CHECK(res.precoder.squaredNorm() < budget);
        CHECK(res.max_power_seen < budget);
        for (const std::vector<double>& segment : res.omega_trace) {
            for (std::size_t v = 1; v < segment.size(); ++v)
                CHECK(segment[v] >= segment[v - 1] - 1e-12);
        }
        CHECK(res.total_inner_iterations > 0);
    }
}

TEST_CASE("the single-user optimum aligns with the channel") {
    std::mt19937_64 rng(81);
    Eigen::MatrixXcd channel(1, 4);
    for (int c = 0; c < 4; ++c) channel(0, c) = complex_normal(rng, 1.0);
    OptimizerConfig cfg;
    const double budget = 0.5;  // keeps the rate away from saturation
    const OptimizeResult res = optimize_precoder(channel, unit_qpsk(),
                                                 DecodingStrategy::full(1), budget, 1.0, cfg, rng);
    const Eigen::VectorXcd h = channel.row(0).adjoint();
    const double cosine =
        std::abs((h.adjoint() * res.precoder.col(0))(0)) / (h.norm() * res.precoder.norm());
    CHECK(cosine > 0.99);
}

TEST_CASE("orthogonal high-SNR links reach the full alphabet entropy per user") {
    MisoScenario sc;
    sc.channel = Eigen::MatrixXcd::Identity(2, 2);
    sc.precoder = Eigen::MatrixXcd::Identity(2, 2) * 10.0;
    sc.constellation = unit_qpsk();
    sc.strategy = DecodingStrategy::full(2);
    sc.noise_var = 0.01;
    sc.power_budget = 300.0;
    const SumRateResult r = sum_rate(sc, QuadratureSpec::gauss_hermite(24));
    CHECK(r.total_bits == doctest::Approx(4.0).epsilon(0.05 / 4.0));
}

TEST_CASE("sum rate adds the per-user rates and vanishes for a zero precoder") {
    MisoScenario sc = random_scenario(2, 2, DecodingStrategy::full(2), 91);
    const QuadratureSpec quad = QuadratureSpec::gauss_hermite(12);
    const SumRateResult r = sum_rate(sc, quad);
    double acc = 0.0;
    for (const RateEstimate& u : r.per_user) acc += u.bits;
    CHECK(r.total_bits == doctest::Approx(acc).epsilon(1e-12));

    sc.precoder.setZero();
    const SumRateResult zero = sum_rate(sc, quad);
    CHECK(zero.total_bits == 0.0);
}
