#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "mrnprk/errors.hpp"
#include "mrnprk/linalg.hpp"
#include "mrnprk/tableau.hpp"

namespace mrnprk {

/// Underlying ARK data (A^{1}, A^{2}, b^{1}, b^{2}) of an NPRK tensor, enough
/// to evaluate the joint linear stability function R(z1, z2) = P/Q with
/// P = det(I - (z1 A1 + z2 A2) + e (z1 b1 + z2 b2)^T), Q = det(I - z1 A1 - z2 A2).
class StabilityEvaluator {
public:
    explicit StabilityEvaluator(const NprkTensor& t)
        : s_(t.stages()), a1_(t.a1()), a2_(t.a2()), b1_(t.b1()), b2_(t.b2()) {}

    int stages() const { return s_; }
    const MatD& a1() const { return a1_; }
    const MatD& a2() const { return a2_; }
    const std::vector<double>& b1() const { return b1_; }
    const std::vector<double>& b2() const { return b2_; }

    Complex numerator(Complex z1, Complex z2) const {
        MatC m(s_, s_);
        for (int i = 0; i < s_; ++i) {
            const Complex w = z1 * b1_[i] + z2 * b2_[i];
            for (int r = 0; r < s_; ++r) m(r, i) = -z1 * a1_(r, i) - z2 * a2_(r, i) + w;
            m(i, i) += 1.0;
        }
        return lu_determinant(m);
    }

    Complex denominator(Complex z1, Complex z2) const {
        MatC m(s_, s_);
        for (int i = 0; i < s_; ++i) {
            for (int r = 0; r < s_; ++r) m(r, i) = -z1 * a1_(r, i) - z2 * a2_(r, i);
            m(i, i) += 1.0;
        }
        return lu_determinant(m);
    }

    int implicit_stage_count() const {
        int n = 0;
        for (int i = 0; i < s_; ++i)
            if (a1_(i, i) != 0.0) ++n;
        return n;
    }

private:
    int s_;
    MatD a1_, a2_;
    std::vector<double> b1_, b2_;
};

inline Complex r_eval(const StabilityEvaluator& ev, Complex z1, Complex z2) {
    const Complex q = ev.denominator(z1, z2);
    if (std::abs(q) < 1e-300) throw SingularDenominator("r_eval: |Q(z1,z2)| < 1e-300");
    return ev.numerator(z1, z2) / q;
}

struct StiffLimit {
    Complex value;    // R at z1 = -1e14 on the negative real axis
    bool converged;   // |R(-1e14) - R(-1e12)| <= 1e-2 * max(1, |R(-1e14)|)
};

/// Probe the |z1| -> inf limit of R along the negative real axis.
inline StiffLimit stiff_limit(const StabilityEvaluator& ev, Complex z2) {
    const Complex r12 = r_eval(ev, Complex(-1e12, 0.0), z2);
    const Complex r14 = r_eval(ev, Complex(-1e14, 0.0), z2);
    const bool conv = std::abs(r14 - r12) <= 1e-2 * std::max(1.0, std::abs(r14));
    return {r14, conv};
}

struct GridSpec {
    double re_min, re_max;
    double im_min, im_max;
    int n_re = 301, n_im = 301;
};

/// Boolean raster of the symmetric stability-region slice P(z1) over a z2 window.
struct RegionSlice {
    Complex z1;
    GridSpec grid;
    std::vector<double> abs_r;   // |R(z1, z2_p)| row-major, im fastest
    std::vector<char> member;    // max(|R(z1,.)|, |R(conj z1,.)|) <= 1

    double area() const {
        if (grid.n_re < 2 || grid.n_im < 2) return 0.0;
        const double cell = (grid.re_max - grid.re_min) / (grid.n_re - 1) * (grid.im_max - grid.im_min) / (grid.n_im - 1);
        long count = 0;
        for (char m : member) count += m;
        return cell * static_cast<double>(count);
    }
};

inline RegionSlice region_slice(const StabilityEvaluator& ev, Complex z1, const GridSpec& grid) {
    RegionSlice out;
    out.z1 = z1;
    out.grid = grid;
    if (grid.n_re <= 0 || grid.n_im <= 0) return out;
    out.abs_r.reserve(static_cast<size_t>(grid.n_re) * grid.n_im);
    out.member.reserve(out.abs_r.capacity());
    const bool real_z1 = (z1.imag() == 0.0);
    for (int ix = 0; ix < grid.n_re; ++ix) {
        const double re = grid.n_re == 1 ? grid.re_min
                                         : grid.re_min + (grid.re_max - grid.re_min) * ix / (grid.n_re - 1);
        for (int iy = 0; iy < grid.n_im; ++iy) {
            const double im = grid.n_im == 1 ? grid.im_min
                                             : grid.im_min + (grid.im_max - grid.im_min) * iy / (grid.n_im - 1);
            const Complex z2(re, im);
            const double r = std::abs(r_eval(ev, z1, z2));
            const double rc = real_z1 ? r : std::abs(r_eval(ev, std::conj(z1), z2));
            out.abs_r.push_back(r);
            out.member.push_back(std::max(r, rc) <= 1.0 ? 1 : 0);
        }
    }
    return out;
}

struct DegreeReport {
    double deg_z1_num;   // fitted degree of P in z1 (generic z2)
    double deg_z1_den;   // fitted degree of Q in z1
    double deg_z2_num;   // fitted degree in z2 (generic z1)
    int implicit_diagonals;    // nonzero entries of diag(A^{1})
    bool den_matches_diagonals;
    bool num_within_bounds;    // numerator degrees respect the coupling-class table
};

namespace detail {

inline double fit_ray_degree(const std::function<Complex(double)>& f, const char* what) {
    // log-log slope over |z| in [1e6, 1e10]
    constexpr int kPts = 9;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int p = 0; p < kPts; ++p) {
        const double t = std::pow(10.0, 6.0 + 4.0 * p / (kPts - 1));
        double mag = std::abs(f(t));
        if (mag < 1e-300) mag = 1e-300;
        const double x = std::log(t), y = std::log(mag);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double slope = (kPts * sxy - sx * sy) / (kPts * sxx - sx * sx);
    const double nearest = std::round(slope);
    if (std::abs(slope - nearest) > 0.05)
        throw DegreeMismatch(std::string("degree fit for ") + what + " is " + std::to_string(slope) +
                             ", not within 0.05 of an integer");
    return slope;
}

}  // namespace detail

/// Estimate polynomial degrees of P and Q by ray sampling and compare against
/// the diagonal count (denominator product form) and the coupling-class table.
inline DegreeReport degree_report(const StabilityEvaluator& ev, const StageSets& ss) {
    const Complex z2_fix(0.8, 0.6);
    const Complex z1_fix(-1.3, 0.2);
    const Complex dir2(0.6, 0.8);

    DegreeReport rep{};
    rep.deg_z1_den = detail::fit_ray_degree([&](double t) { return ev.denominator(Complex(-t, 0.0), z2_fix); }, "Q in z1");
    rep.deg_z1_num = detail::fit_ray_degree([&](double t) { return ev.numerator(Complex(-t, 0.0), z2_fix); }, "P in z1");
    rep.deg_z2_num = detail::fit_ray_degree([&](double t) { return ev.numerator(z1_fix, dir2 * t); }, "P in z2");
    rep.implicit_diagonals = ev.implicit_stage_count();
    rep.den_matches_diagonals = static_cast<int>(std::lround(rep.deg_z1_den)) == rep.implicit_diagonals;

    const int s = ev.stages();
    const int s1 = static_cast<int>(ss.s1.size());
    const int s2 = static_cast<int>(ss.s2.size());
    int bound_z1 = s, bound_z2 = s;
    switch (ss.coupling) {
        case Coupling::FullyDecoupled: bound_z1 = s1; bound_z2 = s2; break;
        case Coupling::OneToTwo: bound_z1 = s1; bound_z2 = s; break;
        case Coupling::TwoToOne: bound_z1 = s; bound_z2 = s2; break;
        case Coupling::FullyCoupled: break;
    }
    rep.num_within_bounds = std::lround(rep.deg_z1_num) <= bound_z1 && std::lround(rep.deg_z2_num) <= bound_z2;
    return rep;
}

}  // namespace mrnprk
