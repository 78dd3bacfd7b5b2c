#include "fagci/verify.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fagci/miso.hpp"
#include "fagci/rates.hpp"

namespace fagci {

namespace {

VerifyCheck make_check(std::string name, double measured, double tolerance, std::string detail) {
    VerifyCheck c;
    c.name = std::move(name);
    c.measured = measured;
    c.tolerance = tolerance;
    c.pass = measured < tolerance;
    c.detail = std::move(detail);
    return c;
}

Constellation random_alphabet(std::mt19937_64& rng, bool allow_zero, double power) {
    switch (uniform_index(rng, allow_zero ? 4 : 3)) {
        case 0: return Constellation::standard(ConstellationKind::Psk, 2, power);
        case 1: return Constellation::standard(ConstellationKind::Psk, 4, power);
        case 2: return Constellation::standard(ConstellationKind::Pam, 4, power);
        default: return Constellation::zero();
    }
}

// Central finite differences of the approximate per-user GMI over every
// real/imaginary precoder coordinate.
Eigen::MatrixXcd fd_gradient(miso::MisoScenario sc, int user, double step) {
    const Eigen::MatrixXcd base = sc.precoder;
    Eigen::MatrixXcd grad(base.rows(), base.cols());
    for (int r = 0; r < base.rows(); ++r)
        for (int c = 0; c < base.cols(); ++c) {
            double parts[2];
            for (int axis = 0; axis < 2; ++axis) {
                const cplx delta = axis == 0 ? cplx(step, 0.0) : cplx(0.0, step);
                sc.precoder = base;
                sc.precoder(r, c) += delta;
                const double hi = gmi_approx_raw_nats(miso::induced_channel(sc, user),
                                                      ApproxVariant::Partial);
                sc.precoder = base;
                sc.precoder(r, c) -= delta;
                const double lo = gmi_approx_raw_nats(miso::induced_channel(sc, user),
                                                      ApproxVariant::Partial);
                parts[axis] = (hi - lo) / (2.0 * step);
            }
            grad(r, c) = cplx(parts[0], parts[1]);
        }
    return grad;
}

}  // namespace

VerifyReport run_verify(const VerifyOptions& opts) {
    VerifyReport report;
    const QuadratureSpec quad = QuadratureSpec::gauss_hermite(opts.gh_nodes);

    // Interference saturation: very weak and very strong enumerated
    // interference both match removing it outright.
    {
        const Constellation x = Constellation::standard(ConstellationKind::Qam, 16, 100.0);
        const Constellation j =
            Constellation::standard(ConstellationKind::Psk, 4, db_to_linear(15.0));
        const Channel none(x, Constellation::zero(), j, 1.0);
        const double mi_none = mutual_information(none, quad).rate.bits;
        const double gmi_none =
            gmi(none, DecodingMetric::partial_gaussian(), quad).bits;
        for (double var_i : {1e-6, 1e6}) {
            const Channel chan(x, Constellation::standard(ConstellationKind::Psk, 4, var_i), j,
                               1.0);
            const double mi_val = mutual_information(chan, quad).rate.bits;
            const double gmi_val = gmi(chan, DecodingMetric::partial_gaussian(), quad).bits;
            std::ostringstream tag;
            tag << (var_i < 1.0 ? "weak" : "strong");
            report.checks.push_back(make_check(
                "saturation_mi_" + tag.str(), std::abs(mi_val - mi_none), 0.02,
                "MI at var_i=" + std::to_string(var_i) + " vs interference-free"));
            report.checks.push_back(make_check(
                "saturation_gmi_partial_" + tag.str(), std::abs(gmi_val - gmi_none), 0.02,
                "partial GMI at var_i=" + std::to_string(var_i) + " vs interference-free"));
        }
    }

    // Vanishing limit: the partial-Gaussian GMI collapses as J blows up.
    {
        const Channel chan(Constellation::standard(ConstellationKind::Qam, 16, 100.0),
                           Constellation::standard(ConstellationKind::Psk, 4, 100.0),
                           Constellation::standard(ConstellationKind::Psk, 4, 1e6), 1.0);
        const double bits = gmi(chan, DecodingMetric::partial_gaussian(), quad).bits;
        report.checks.push_back(
            make_check("vanishing_gmi_partial", bits, 0.05, "partial GMI at var_j=1e6"));
    }

    // Matched metric at s = 1 reproduces the mutual information.
    {
        std::mt19937_64 rng(derive_seed(opts.seed, 1));
        double worst = 0.0;
        for (int n = 0; n < opts.remark4_scenarios; ++n) {
            const double px = db_to_linear(8.0 + 3.0 * (n % 5));
            const Constellation x =
                (n % 2 == 0) ? Constellation::standard(ConstellationKind::Qam, 16, px)
                             : Constellation::standard(ConstellationKind::Psk, 4, px);
            const Channel chan(x, random_alphabet(rng, true, db_to_linear(10.0)),
                               random_alphabet(rng, true, db_to_linear(5.0)), 1.0);
            const double mi_val = mutual_information(chan, quad).rate.bits;
            const double gmi_val =
                gmi(chan, DecodingMetric::matched(), quad, STiltSearch{1.0, 1.0, 1e-4}).bits;
            worst = std::max(worst, std::abs(mi_val - gmi_val));
        }
        report.checks.push_back(make_check("matched_gmi_equals_mi", worst, 1e-3,
                                           "max |GMI(matched, s=1) - MI| over scenarios"));
    }

    // Analytic precoder gradient vs central finite differences.
    {
        std::mt19937_64 rng(derive_seed(opts.seed, 2));
        const Constellation qpsk = Constellation::standard(ConstellationKind::Psk, 4, 1.0);
        double worst = 0.0;
        for (int n = 0; n < opts.gradient_scenarios; ++n) {
            const int users = 2 + static_cast<int>(uniform_index(rng, 2));
            const int n_tx = 2 + static_cast<int>(uniform_index(rng, 3));
            miso::MisoScenario sc;
            sc.channel.resize(users, n_tx);
            sc.precoder.resize(n_tx, users);
            for (int r = 0; r < users; ++r)
                for (int c = 0; c < n_tx; ++c) sc.channel(r, c) = complex_normal(rng, 1.0);
            for (int r = 0; r < n_tx; ++r)
                for (int c = 0; c < users; ++c) sc.precoder(r, c) = complex_normal(rng, 1.0);
            sc.constellation = qpsk;
            sc.strategy = (n % 2 == 0) ? miso::DecodingStrategy::partial_cycle(users)
                                       : miso::DecodingStrategy::full(users);
            sc.noise_var = 1.0;
            sc.power_budget = 4.0 * sc.precoder.squaredNorm();
            for (int k = 0; k < users; ++k) {
                Eigen::MatrixXcd analytic = miso::user_gmi_approx_grad(sc, k);
                analytic.array() += opts.gradient_perturbation;
                const Eigen::MatrixXcd fd = fd_gradient(sc, k, 1e-5);
                const double rel = (analytic - fd).norm() / std::max(fd.norm(), 1e-12);
                worst = std::max(worst, rel);
            }
        }
        report.checks.push_back(make_check("gradient_finite_difference", worst, 1e-4,
                                           "max relative gradient error over scenarios"));
    }

    // Two-user MISO GMI equals the scalar-channel GMI built by hand.
    {
        std::mt19937_64 rng(derive_seed(opts.seed, 3));
        const Constellation qpsk = Constellation::standard(ConstellationKind::Psk, 4, 1.0);
        double worst = 0.0;
        for (int n = 0; n < opts.reduction_scenarios; ++n) {
            miso::MisoScenario sc;
            sc.channel.resize(2, 2);
            sc.precoder.resize(2, 2);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) {
                    sc.channel(r, c) = complex_normal(rng, 1.0);
                    sc.precoder(r, c) = complex_normal(rng, 2.0);
                }
            sc.constellation = qpsk;
            sc.strategy = (n % 2 == 0) ? miso::DecodingStrategy::full(2)
                                       : miso::DecodingStrategy::mi(2);
            sc.noise_var = 1.0;
            sc.power_budget = 2.0 * sc.precoder.squaredNorm();
            const QuadratureSpec q16 = QuadratureSpec::gauss_hermite(16);
            for (int k = 0; k < 2; ++k) {
                const Eigen::RowVectorXcd gains = sc.channel.row(k) * sc.precoder;
                const int other = 1 - k;
                Constellation opt = Constellation::zero();
                Constellation gauss = Constellation::zero();
                if (sc.strategy.opt_sets[k].empty())
                    gauss = qpsk.scaled_by(gains(other));
                else
                    opt = qpsk.scaled_by(gains(other));
                const Channel manual(qpsk.scaled_by(gains(k)), opt, gauss, sc.noise_var);
                const double direct =
                    gmi(manual, DecodingMetric::partial_gaussian(), q16).bits;
                const double through = miso::user_gmi(sc, k, q16).bits;
                worst = std::max(worst, std::abs(direct - through));
            }
        }
        report.checks.push_back(make_check("miso_scalar_reduction", worst, 1e-9,
                                           "max |user GMI - scalar GMI| over scenarios"));
    }

    report.all_pass = true;
    for (const VerifyCheck& c : report.checks) report.all_pass = report.all_pass && c.pass;
    return report;
}

std::string verify_report_to_json(const VerifyReport& report) {
    nlohmann::json j;
    j["all_pass"] = report.all_pass;
    j["checks"] = nlohmann::json::array();
    for (const VerifyCheck& c : report.checks) {
        nlohmann::json jc;
        jc["name"] = c.name;
        jc["measured"] = c.measured;
        jc["tolerance"] = c.tolerance;
        jc["pass"] = c.pass;
        jc["detail"] = c.detail;
        j["checks"].push_back(jc);
    }
    return j.dump(2) + "\n";
}

}  // namespace fagci
