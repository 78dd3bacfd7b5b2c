#include "fagci/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fagci {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::uint32_t gray_to_binary(std::uint32_t g) {
    std::uint32_t b = 0;
    for (; g; g >>= 1) b ^= g;
    return b;
}

int int_log2(int n) {
    int b = 0;
    while ((1 << b) < n) ++b;
    return b;
}

// Amplitudes of an L-level PAM axis, unnormalized: {-(L-1), ..., -1, 1, ..., L-1}.
double pam_level(int level, int n_levels) {
    return static_cast<double>(2 * level - (n_levels - 1));
}

}  // namespace

double db_to_linear(double x_db) { return std::pow(10.0, x_db / 10.0); }

double linear_to_db(double x_lin) { return 10.0 * std::log10(x_lin); }

Constellation Constellation::standard(ConstellationKind kind, int order, double power) {
    if (power < 0.0)
        throw std::invalid_argument("constellation power must be nonnegative");
    if (power == 0.0) return Constellation::zero();

    std::vector<cplx> pts;
    switch (kind) {
        case ConstellationKind::Pam: {
            if (order < 2 || !is_power_of_two(order))
                throw std::invalid_argument("PAM order must be a power of two >= 2: " +
                                            std::to_string(order));
            pts.resize(order);
            // label -> level via inverse Gray, so adjacent levels differ in one bit
            for (int label = 0; label < order; ++label) {
                int level = static_cast<int>(gray_to_binary(static_cast<std::uint32_t>(label)));
                pts[label] = cplx(pam_level(level, order), 0.0);
            }
            break;
        }
        case ConstellationKind::Qam: {
            int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
            if (order < 4 || side * side != order || !is_power_of_two(side))
                throw std::invalid_argument("QAM order must be a square of a power of two >= 4: " +
                                            std::to_string(order));
            int axis_bits = int_log2(side);
            pts.resize(order);
            // row-major per-axis Gray labeling: high bits = in-phase, low bits = quadrature
            for (int label = 0; label < order; ++label) {
                std::uint32_t gi = static_cast<std::uint32_t>(label) >> axis_bits;
                std::uint32_t gq = static_cast<std::uint32_t>(label) & ((1u << axis_bits) - 1u);
                int li = static_cast<int>(gray_to_binary(gi));
                int lq = static_cast<int>(gray_to_binary(gq));
                pts[label] = cplx(pam_level(li, side), pam_level(lq, side));
            }
            break;
        }
        case ConstellationKind::Psk: {
            if (order < 2)
                throw std::invalid_argument("PSK order must be >= 2: " + std::to_string(order));
            pts.resize(order);
            // BPSK stays on the real axis; larger orders offset by pi/order
            double offset = (order == 2) ? 0.0 : kPi / order;
            for (int label = 0; label < order; ++label) {
                // Gray labels walk the circle when the order is a power of
                // two; otherwise point k just carries label k
                int k = is_power_of_two(order)
                            ? static_cast<int>(gray_to_binary(static_cast<std::uint32_t>(label)))
                            : label;
                double ang = 2.0 * kPi * k / order + offset;
                pts[label] = cplx(std::cos(ang), std::sin(ang));
            }
            break;
        }
    }

    Constellation c(std::move(pts));
    return c.scaled_to_power(power);
}

Constellation Constellation::from_points(std::vector<cplx> pts) {
    if (pts.empty()) throw std::invalid_argument("constellation must be non-empty");
    return Constellation(std::move(pts));
}

double Constellation::power() const {
    double acc = 0.0;
    for (const cplx& p : points_) acc += std::norm(p);
    return acc / static_cast<double>(points_.size());
}

bool Constellation::is_zero() const {
    for (const cplx& p : points_)
        if (p != cplx{0.0, 0.0}) return false;
    return true;
}

Constellation Constellation::scaled_to_power(double power) const {
    if (power < 0.0) throw std::invalid_argument("power must be nonnegative");
    if (power == 0.0) return Constellation::zero();
    double cur = this->power();
    if (cur <= 0.0)
        throw std::invalid_argument("cannot scale the degenerate alphabet {0} to positive power");
    double g = std::sqrt(power / cur);
    std::vector<cplx> pts(points_);
    for (cplx& p : pts) p *= g;
    return Constellation(std::move(pts));
}

Constellation Constellation::scaled_by(cplx gain) const {
    if (gain == cplx{0.0, 0.0}) return Constellation::zero();
    std::vector<cplx> pts(points_);
    for (cplx& p : pts) p *= gain;
    return Constellation(std::move(pts));
}

Labeling Constellation::labeling() const {
    std::size_t n = points_.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("labeling requires a power-of-two alphabet size");
    Labeling lab;
    lab.bits = int_log2(static_cast<int>(n));
    lab.labels.resize(n);
    for (std::size_t k = 0; k < n; ++k) lab.labels[k] = static_cast<std::uint32_t>(k);
    return lab;
}

Constellation minkowski_sum(const Constellation& lhs, const Constellation& rhs) {
    std::vector<cplx> pts;
    pts.reserve(lhs.size() * rhs.size());
    for (const cplx& a : lhs.points())
        for (const cplx& b : rhs.points()) pts.push_back(a + b);
    return Constellation::from_points(std::move(pts));
}

namespace {

// Recovers the per-axis level structure of a uniform PAM/QAM alphabet:
// sorted distinct axis amplitudes, equally spaced and symmetric about 0.
struct AxisGrid {
    std::vector<double> levels;  // ascending
    double half_step = 0.0;      // levels are odd multiples of this
};

AxisGrid detect_axis(std::vector<double> vals, double scale) {
    std::sort(vals.begin(), vals.end());
    std::vector<double> lv;
    double tol = 1e-9 * scale;
    for (double v : vals)
        if (lv.empty() || v - lv.back() > tol) lv.push_back(v);
    int n = static_cast<int>(lv.size());
    if (n < 1 || !is_power_of_two(n))
        throw std::invalid_argument("decompose_pam: axis level count is not a power of two");
    if (n == 1) {
        if (std::abs(lv[0]) > tol)
            throw std::invalid_argument("decompose_pam: single-level axis must sit at 0");
        return {lv, 0.0};
    }
    double step = (lv.back() - lv.front()) / (n - 1);
    for (int k = 0; k < n; ++k)
        if (std::abs(lv[k] - (lv.front() + k * step)) > tol)
            throw std::invalid_argument("decompose_pam: axis levels are not equally spaced");
    if (std::abs(lv.front() + lv.back()) > tol)
        throw std::invalid_argument("decompose_pam: axis levels are not symmetric about 0");
    return {lv, step / 2.0};
}

// Subset sums of {±2^b * half_step : lo <= b < hi}; {0} when the range is empty.
std::vector<double> dyadic_sums(double half_step, int lo, int hi) {
    std::vector<double> out{0.0};
    for (int b = lo; b < hi; ++b) {
        double w = half_step * static_cast<double>(1 << b);
        std::vector<double> next;
        next.reserve(out.size() * 2);
        for (double v : out) {
            next.push_back(v - w);
            next.push_back(v + w);
        }
        out = std::move(next);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

Decomposition decompose_pam(const Constellation& c, int split_index) {
    const auto& pts = c.points();
    double scale = 0.0;
    for (const cplx& p : pts) scale = std::max({scale, std::abs(p.real()), std::abs(p.imag())});
    scale = std::max(scale, 1.0);
    double tol = 1e-9 * scale;

    bool real_only = true;
    for (const cplx& p : pts)
        if (std::abs(p.imag()) > tol) real_only = false;

    std::vector<double> re_vals, im_vals;
    re_vals.reserve(pts.size());
    im_vals.reserve(pts.size());
    for (const cplx& p : pts) {
        re_vals.push_back(p.real());
        im_vals.push_back(p.imag());
    }

    AxisGrid re_axis = detect_axis(re_vals, scale);
    int bits;
    std::vector<cplx> plus_pts, minus_pts;

    if (real_only) {
        int n = static_cast<int>(re_axis.levels.size());
        if (static_cast<std::size_t>(n) != pts.size())
            throw std::invalid_argument("decompose_pam: duplicate points in PAM alphabet");
        bits = int_log2(n);
        if (split_index < 0 || split_index > bits)
            throw std::invalid_argument("decompose_pam: split index out of range");
        for (double v : dyadic_sums(re_axis.half_step, split_index, bits))
            plus_pts.emplace_back(v, 0.0);
        for (double v : dyadic_sums(re_axis.half_step, 0, split_index))
            minus_pts.emplace_back(v, 0.0);
    } else {
        AxisGrid im_axis = detect_axis(im_vals, scale);
        int n_re = static_cast<int>(re_axis.levels.size());
        int n_im = static_cast<int>(im_axis.levels.size());
        if (n_re != n_im || std::abs(re_axis.half_step - im_axis.half_step) > tol)
            throw std::invalid_argument("decompose_pam: QAM grid is not square");
        if (static_cast<std::size_t>(n_re) * n_im != pts.size())
            throw std::invalid_argument("decompose_pam: duplicate points in QAM alphabet");
        // verify every grid node is present
        for (double re : re_axis.levels)
            for (double im : im_axis.levels) {
                bool found = false;
                for (const cplx& p : pts)
                    if (std::abs(p.real() - re) <= tol && std::abs(p.imag() - im) <= tol)
                        found = true;
                if (!found)
                    throw std::invalid_argument("decompose_pam: point set is not a full grid");
            }
        bits = int_log2(n_re);
        if (split_index < 0 || split_index > bits)
            throw std::invalid_argument("decompose_pam: split index out of range");
        auto hi_re = dyadic_sums(re_axis.half_step, split_index, bits);
        auto lo_re = dyadic_sums(re_axis.half_step, 0, split_index);
        for (double a : hi_re)
            for (double b : hi_re) plus_pts.emplace_back(a, b);
        for (double a : lo_re)
            for (double b : lo_re) minus_pts.emplace_back(a, b);
    }

    Decomposition d;
    d.plus = plus_pts.size() == 1 && std::abs(plus_pts[0].real()) <= tol &&
                     std::abs(plus_pts[0].imag()) <= tol
                 ? Constellation::zero()
                 : Constellation::from_points(std::move(plus_pts));
    d.minus = minus_pts.size() == 1 && std::abs(minus_pts[0].real()) <= tol &&
                      std::abs(minus_pts[0].imag()) <= tol
                  ? Constellation::zero()
                  : Constellation::from_points(std::move(minus_pts));
    double total = c.power();
    d.power_split = total > 0.0 ? d.plus.power() / total : 0.0;
    return d;
}

}  // namespace fagci
