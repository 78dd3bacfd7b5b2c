#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <set>

#include "fagci/constellation.hpp"

using namespace fagci;

namespace {

std::vector<cplx> sorted_points(const Constellation& c) {
    std::vector<cplx> pts = c.points();
    std::sort(pts.begin(), pts.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return pts;
}

bool multisets_match(const Constellation& a, const Constellation& b, double tol) {
    if (a.size() != b.size()) return false;
    const auto pa = sorted_points(a);
    const auto pb = sorted_points(b);
    for (std::size_t k = 0; k < pa.size(); ++k)
        if (std::abs(pa[k].real() - pb[k].real()) > tol ||
            std::abs(pa[k].imag() - pb[k].imag()) > tol)
            return false;
    return true;
}

}  // namespace

TEST_CASE("unit-power QPSK is the textbook diagonal constellation") {
    const Constellation c = Constellation::standard(ConstellationKind::Psk, 4, 1.0);
    REQUIRE(c.size() == 4);
    const double r = 1.0 / std::sqrt(2.0);
    for (const cplx& p : c.points()) {
        CHECK(std::abs(std::abs(p.real()) - r) < 1e-12);
        CHECK(std::abs(std::abs(p.imag()) - r) < 1e-12);
    }
    CHECK(c.power() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("4-PAM hits the standard levels") {
    const Constellation c = Constellation::standard(ConstellationKind::Pam, 4, 1.0);
    const auto pts = sorted_points(c);
    const double s = 1.0 / std::sqrt(5.0);
    CHECK(pts[0].real() == doctest::Approx(-3.0 * s).epsilon(1e-12));
    CHECK(pts[1].real() == doctest::Approx(-1.0 * s).epsilon(1e-12));
    CHECK(pts[2].real() == doctest::Approx(1.0 * s).epsilon(1e-12));
    CHECK(pts[3].real() == doctest::Approx(3.0 * s).epsilon(1e-12));
}

TEST_CASE("BPSK scaling") {
    const Constellation c = Constellation::standard(ConstellationKind::Psk, 2, 0.8);
    const auto pts = sorted_points(c);
    CHECK(pts[0].real() == doctest::Approx(-std::sqrt(0.8)).epsilon(1e-12));
    CHECK(pts[1].real() == doctest::Approx(std::sqrt(0.8)).epsilon(1e-12));
    CHECK(std::abs(pts[0].imag()) < 1e-15);
    const Constellation pam2 = Constellation::standard(ConstellationKind::Pam, 2, 0.8);
    CHECK(multisets_match(c, pam2, 1e-12));
}

TEST_CASE("generator power matches the declaration to 1e-12 relative") {
    for (double p : {0.01, 1.0, 31.6227766, 1000.0}) {
        for (auto [kind, order] :
             {std::pair{ConstellationKind::Qam, 16}, {ConstellationKind::Qam, 64},
              {ConstellationKind::Psk, 8}, {ConstellationKind::Pam, 8}}) {
            const Constellation c = Constellation::standard(kind, order, p);
            CHECK(std::abs(c.power() - p) / p < 1e-12);
        }
    }
}

TEST_CASE("generators are deterministic") {
    const Constellation a = Constellation::standard(ConstellationKind::Qam, 16, 3.7);
    const Constellation b = Constellation::standard(ConstellationKind::Qam, 16, 3.7);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a.points()[k] == b.points()[k]);
}

TEST_CASE("unsupported generator arguments are rejected") {
    CHECK_THROWS_AS(Constellation::standard(ConstellationKind::Qam, 8, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(Constellation::standard(ConstellationKind::Qam, 36, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(Constellation::standard(ConstellationKind::Psk, 1, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(Constellation::standard(ConstellationKind::Pam, 3, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(Constellation::standard(ConstellationKind::Pam, 4, -1.0),
                    std::invalid_argument);
}

TEST_CASE("zero power collapses to the degenerate alphabet") {
    const Constellation c = Constellation::standard(ConstellationKind::Qam, 16, 0.0);
    CHECK(c.is_zero());
    CHECK(c.size() == 1);
}

TEST_CASE("Minkowski sum with {0} is the identity") {
    const Constellation c = Constellation::standard(ConstellationKind::Qam, 16, 2.0);
    const Constellation s = minkowski_sum(Constellation::zero(), c);
    REQUIRE(s.size() == c.size());
    for (std::size_t k = 0; k < c.size(); ++k) CHECK(s.points()[k] == c.points()[k]);
}

TEST_CASE("two scaled BPSKs sum to a 4-PAM") {
    const Constellation a = Constellation::standard(ConstellationKind::Psk, 2, 0.8);
    const Constellation b = Constellation::standard(ConstellationKind::Psk, 2, 0.2);
    const auto pts = sorted_points(minkowski_sum(a, b));
    REQUIRE(pts.size() == 4);
    CHECK(pts[0].real() == doctest::Approx(-1.3416).epsilon(1e-3));
    CHECK(pts[1].real() == doctest::Approx(-0.4472).epsilon(1e-3));
    CHECK(pts[2].real() == doctest::Approx(0.4472).epsilon(1e-3));
    CHECK(pts[3].real() == doctest::Approx(1.3416).epsilon(1e-3));
    const Constellation pam = Constellation::standard(ConstellationKind::Pam, 4, 1.0);
    CHECK(multisets_match(minkowski_sum(a, b), pam, 1e-9));
}

TEST_CASE("QPSK + QPSK has 16 entries on 9 distinct sites") {
    const Constellation q = Constellation::standard(ConstellationKind::Psk, 4, 1.0);
    const Constellation s = minkowski_sum(q, q);
    REQUIRE(s.size() == 16);
    std::set<std::pair<long, long>> sites;
    for (const cplx& p : s.points())
        sites.insert({std::lround(p.real() * 1e9), std::lround(p.imag() * 1e9)});
    CHECK(sites.size() == 9);
}

TEST_CASE("4-PAM decomposes into 0.8/0.2 BPSK summands") {
    const Constellation pam = Constellation::standard(ConstellationKind::Pam, 4, 1.0);
    const Decomposition d = decompose_pam(pam, 1);
    CHECK(d.plus.size() == 2);
    CHECK(d.minus.size() == 2);
    CHECK(d.power_split == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(d.plus.power() == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(d.minus.power() == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(multisets_match(minkowski_sum(d.plus, d.minus), pam, 1e-10));
    CHECK(std::abs(d.plus.power() + d.minus.power() - pam.power()) < 1e-10);
}

TEST_CASE("BPSK decomposes into itself plus {0}") {
    const Constellation b = Constellation::standard(ConstellationKind::Psk, 2, 1.0);
    const Decomposition d = decompose_pam(b, 0);
    CHECK(multisets_match(d.plus, b, 1e-12));
    CHECK(d.minus.is_zero());
    CHECK(d.power_split == doctest::Approx(1.0));
}

TEST_CASE("16-QAM decomposes into 0.8/0.2 QPSK summands") {
    const Constellation qam = Constellation::standard(ConstellationKind::Qam, 16, 1.0);
    const Decomposition d = decompose_pam(qam, 1);
    CHECK(d.plus.size() == 4);
    CHECK(d.minus.size() == 4);
    CHECK(d.power_split == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(multisets_match(minkowski_sum(d.plus, d.minus), qam, 1e-10));
}

TEST_CASE("decompose_pam rejects unsupported alphabets") {
    CHECK_THROWS_AS(decompose_pam(Constellation::standard(ConstellationKind::Psk, 8, 1.0), 1),
                    std::invalid_argument);
    const Constellation skewed =
        Constellation::from_points({{0.0, 0.0}, {1.0, 0.0}, {2.5, 0.0}, {4.0, 0.0}});
    CHECK_THROWS_AS(decompose_pam(skewed, 1), std::invalid_argument);
    const Constellation pam = Constellation::standard(ConstellationKind::Pam, 4, 1.0);
    CHECK_THROWS_AS(decompose_pam(pam, 5), std::invalid_argument);
}

TEST_CASE("dB round trip") {
    CHECK(db_to_linear(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(db_to_linear(20.0) == doctest::Approx(100.0).epsilon(1e-14));
    for (double v : {1e-3, 0.4, 7.0, 316.0}) {
        CHECK(db_to_linear(linear_to_db(v)) == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("Gray labels differ by one bit between adjacent QPSK points") {
    const Constellation q = Constellation::standard(ConstellationKind::Psk, 4, 1.0);
    // walk points in angular order and count label bit flips
    std::vector<std::pair<double, std::uint32_t>> ang;
    for (std::size_t k = 0; k < q.size(); ++k)
        ang.push_back({std::arg(q.points()[k]), static_cast<std::uint32_t>(k)});
    std::sort(ang.begin(), ang.end());
    for (std::size_t k = 0; k < ang.size(); ++k) {
        const std::uint32_t a = ang[k].second;
        const std::uint32_t b = ang[(k + 1) % ang.size()].second;
        CHECK(std::popcount(a ^ b) == 1);
    }
}
