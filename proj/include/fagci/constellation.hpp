#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace fagci {

using cplx = std::complex<double>;

/// dB <-> linear power helpers. Powers quoted in dB are relative to unit
/// linear power (0 dB == 1.0).
double db_to_linear(double x_db);
double linear_to_db(double x_lin);

enum class ConstellationKind { Qam, Psk, Pam };

/// Bit labeling of a constellation: labels[k] is the bit pattern carried by
/// point k. Generated constellations keep points in label order, so the map
/// is the identity there; custom point lists may relabel.
struct Labeling {
    int bits = 0;
    std::vector<std::uint32_t> labels;
};

/// A finite signal alphabet with uniform symbol probabilities. Points form a
/// multiset: duplicates are kept so uniform averaging over the point list
/// stays correct after Minkowski sums.
class Constellation {
  public:
    Constellation() : points_{cplx{0.0, 0.0}} {}

    /// Standard QAM/PSK/PAM grid scaled to the requested mean power, with
    /// per-axis Gray labeling (QAM/PAM) or circular Gray labeling (PSK).
    /// Point order follows the bit label, i.e. points()[m] carries label m.
    /// power == 0 collapses to the degenerate alphabet {0}.
    static Constellation standard(ConstellationKind kind, int order, double power);

    static Constellation from_points(std::vector<cplx> pts);

    /// The degenerate "absent" alphabet {0}.
    static Constellation zero() { return Constellation(); }

    const std::vector<cplx>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }

    /// Mean power (1/|C|) sum |c|^2.
    double power() const;

    /// True when every point is exactly 0 (sigma = 0).
    bool is_zero() const;

    /// Same point set rescaled to the given mean power.
    Constellation scaled_to_power(double power) const;

    /// Points multiplied by a complex gain. A zero gain collapses to {0}.
    Constellation scaled_by(cplx gain) const;

    /// Identity labeling (bits = log2 |C|); throws if |C| is not a power of
    /// two.
    Labeling labeling() const;

  private:
    explicit Constellation(std::vector<cplx> pts) : points_(std::move(pts)) {}
    std::vector<cplx> points_;
};

/// Multiset {a + b : a in lhs, b in rhs}, cardinality |lhs|*|rhs|.
Constellation minkowski_sum(const Constellation& lhs, const Constellation& rhs);

/// A constellation split into a Minkowski sum of two summands.
struct Decomposition {
    Constellation plus;   // summand treated by enumeration
    Constellation minus;  // summand treated as Gaussian
    double power_split = 0.0;  // power(plus) / power(original)
};

/// Binary natural decomposition of a uniform 2^k-PAM or square QAM into two
/// summand constellations. split_index counts the least-significant bits per
/// axis assigned to the `minus` summand; split_index = 1 on 4-PAM yields the
/// 0.8/0.2 power split, and split_index = 0 yields c + {0}.
Decomposition decompose_pam(const Constellation& c, int split_index);

}  // namespace fagci
