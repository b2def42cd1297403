#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "mrnprk/errors.hpp"
#include "mrnprk/integrate.hpp"
#include "mrnprk/linalg.hpp"

namespace mrnprk {

// ---------------------------------------------------------------------------
// Partitioned Dahlquist: F(u, v) = l1 u + l2 v, exact e^{(l1+l2)t} y0.
// Complex rates are embedded as 2x2 rotation blocks acting on a real state.
// ---------------------------------------------------------------------------

inline PartitionedSystem dahlquist(Complex l1, Complex l2) {
    PartitionedSystem sys;
    const bool real = (l1.imag() == 0.0 && l2.imag() == 0.0);
    if (real) {
        const double a = l1.real(), b = l2.real();
        sys.n = 1;
        sys.f = [a, b](const State& u, const State& v, State& out) { out[0] = a * u[0] + b * v[0]; };
        sys.solve_hook = [a, b](double gh, const State& v, const State& rhs, State& out) {
            out[0] = (rhs[0] + gh * b * v[0]) / (1.0 - gh * a);
        };
        sys.exact = [a, b](double t, State& out) { out[0] = std::exp((a + b) * t); };
        return sys;
    }
    sys.n = 2;
    auto apply = [](Complex l, const State& x, double scale, State& out) {
        out[0] += scale * (l.real() * x[0] - l.imag() * x[1]);
        out[1] += scale * (l.imag() * x[0] + l.real() * x[1]);
    };
    sys.f = [l1, l2, apply](const State& u, const State& v, State& out) {
        out[0] = out[1] = 0.0;
        apply(l1, u, 1.0, out);
        apply(l2, v, 1.0, out);
    };
    sys.solve_hook = [l1, l2, apply](double gh, const State& v, const State& rhs, State& out) {
        State r = rhs;
        apply(l2, v, gh, r);
        // invert I - gh*L1 (2x2 rotation block)
        const double a = 1.0 - gh * l1.real(), b = gh * l1.imag();
        const double det = a * a + b * b;
        out[0] = (a * r[0] - b * r[1]) / det;
        out[1] = (b * r[0] + a * r[1]) / det;
    };
    sys.exact = [l1, l2](double t, State& out) {
        const Complex y = std::exp((l1 + l2) * t) * Complex(1.0, 0.0);
        out[0] = y.real();
        out[1] = y.imag();
    };
    return sys;
}

/// y' = -y^2 through the product partition F(u, v) = -u v; exact y0/(1 + y0 t).
inline PartitionedSystem product_partition(double y0 = 1.0) {
    PartitionedSystem sys;
    sys.n = 1;
    sys.f = [](const State& u, const State& v, State& out) { out[0] = -u[0] * v[0]; };
    sys.solve_hook = [](double gh, const State& v, const State& rhs, State& out) {
        out[0] = rhs[0] / (1.0 + gh * v[0]);
    };
    sys.exact = [y0](double t, State& out) { out[0] = y0 / (1.0 + y0 * t); };
    return sys;
}

// ---------------------------------------------------------------------------
// Burgers' equation with nonlinear diffusion:
//   u_t = a(x) (|u|^{1/2} u_x)_x + b(x) (u^2)_x, periodic on [-2, 2]
// ---------------------------------------------------------------------------

struct GridFunction {
    std::vector<double> values;
    double dx = 0.0;

    int size() const { return static_cast<int>(values.size()); }
};

enum class BurgersIc { TwoGaussian, ThreeGaussian };

struct BurgersConfig {
    int n = 300;
    double final_time = 5.0;
    BurgersIc ic = BurgersIc::TwoGaussian;

    double dx() const { return 4.0 / n; }
    double x(int i) const { return -2.0 + dx() * i; }
};

inline double burgers_a_coef(double x) { return 0.5 + 2.0 * std::exp(-(x - 1.0) * (x - 1.0) / 25.0); }
inline double burgers_b_coef(double x) { return std::exp(-(x + 1.0) * (x + 1.0) / 25.0); }

inline GridFunction initial_condition(BurgersIc ic, const BurgersConfig& cfg) {
    GridFunction g;
    g.dx = cfg.dx();
    g.values.resize(cfg.n);
    for (int i = 0; i < cfg.n; ++i) {
        const double x = cfg.x(i);
        double u = 0.01 + std::exp(-60.0 * (x + 1.5) * (x + 1.5)) + std::exp(-60.0 * x * x);
        if (ic == BurgersIc::ThreeGaussian) u += std::exp(-60.0 * (x - 1.5) * (x - 1.5));
        g.values[i] = u;
    }
    return g;
}

/// Conservative second-order discretization of a(x) (k(v) u_x)_x with
/// k(v) = |v|^{1/2} and arithmetic-mean interface diffusivities; periodic.
/// Linear in u for frozen v.
inline GridFunction diffusion_apply(const GridFunction& v, const GridFunction& u, const GridFunction& a_coef) {
    const int n = v.size();
    const double dx = v.dx;
    GridFunction out;
    out.dx = dx;
    out.values.resize(n);
    std::vector<double> k(n);
    for (int i = 0; i < n; ++i) k[i] = std::sqrt(std::abs(v.values[i]));
    for (int i = 0; i < n; ++i) {
        const int ip = (i + 1) % n, im = (i + n - 1) % n;
        const double kp = 0.5 * (k[i] + k[ip]);
        const double km = 0.5 * (k[i] + k[im]);
        const double qp = kp * (u.values[ip] - u.values[i]) / dx;
        const double qm = km * (u.values[i] - u.values[im]) / dx;
        out.values[i] = a_coef.values[i] * (qp - qm) / dx;
    }
    return out;
}

namespace detail {

// Jiang-Shu fifth-order reconstructions at the i+1/2 interfaces, periodic.
// 'left' biases the stencil upwind for right-moving data, 'right' mirrors it.
inline void weno5_rec_left(const std::vector<double>& w, std::vector<double>& out) {
    constexpr double eps = 1e-6;
    const int n = static_cast<int>(w.size());
    out.resize(n);
    for (int i = 0; i < n; ++i) {
        const double wm2 = w[(i + n - 2) % n], wm1 = w[(i + n - 1) % n], w0 = w[i];
        const double wp1 = w[(i + 1) % n], wp2 = w[(i + 2) % n];
        const double f0 = (2.0 * wm2 - 7.0 * wm1 + 11.0 * w0) / 6.0;
        const double f1 = (-wm1 + 5.0 * w0 + 2.0 * wp1) / 6.0;
        const double f2 = (2.0 * w0 + 5.0 * wp1 - wp2) / 6.0;
        const double b0 = 13.0 / 12.0 * (wm2 - 2 * wm1 + w0) * (wm2 - 2 * wm1 + w0) +
                          0.25 * (wm2 - 4 * wm1 + 3 * w0) * (wm2 - 4 * wm1 + 3 * w0);
        const double b1 = 13.0 / 12.0 * (wm1 - 2 * w0 + wp1) * (wm1 - 2 * w0 + wp1) + 0.25 * (wm1 - wp1) * (wm1 - wp1);
        const double b2 = 13.0 / 12.0 * (w0 - 2 * wp1 + wp2) * (w0 - 2 * wp1 + wp2) +
                          0.25 * (3 * w0 - 4 * wp1 + wp2) * (3 * w0 - 4 * wp1 + wp2);
        const double a0 = 0.1 / ((eps + b0) * (eps + b0));
        const double a1 = 0.6 / ((eps + b1) * (eps + b1));
        const double a2 = 0.3 / ((eps + b2) * (eps + b2));
        out[i] = (a0 * f0 + a1 * f1 + a2 * f2) / (a0 + a1 + a2);
    }
}

inline void weno5_rec_right(const std::vector<double>& w, std::vector<double>& out) {
    constexpr double eps = 1e-6;
    const int n = static_cast<int>(w.size());
    out.resize(n);
    for (int i = 0; i < n; ++i) {
        const double wm1 = w[(i + n - 1) % n], w0 = w[i];
        const double wp1 = w[(i + 1) % n], wp2 = w[(i + 2) % n], wp3 = w[(i + 3) % n];
        const double f0 = (11.0 * wp1 - 7.0 * wp2 + 2.0 * wp3) / 6.0;
        const double f1 = (2.0 * w0 + 5.0 * wp1 - wp2) / 6.0;
        const double f2 = (-wm1 + 5.0 * w0 + 2.0 * wp1) / 6.0;
        const double b0 = 13.0 / 12.0 * (wp1 - 2 * wp2 + wp3) * (wp1 - 2 * wp2 + wp3) +
                          0.25 * (3 * wp1 - 4 * wp2 + wp3) * (3 * wp1 - 4 * wp2 + wp3);
        const double b1 = 13.0 / 12.0 * (w0 - 2 * wp1 + wp2) * (w0 - 2 * wp1 + wp2) + 0.25 * (w0 - wp2) * (w0 - wp2);
        const double b2 = 13.0 / 12.0 * (wm1 - 2 * w0 + wp1) * (wm1 - 2 * w0 + wp1) +
                          0.25 * (wm1 - 4 * w0 + 3 * wp1) * (wm1 - 4 * w0 + 3 * wp1);
        const double a0 = 0.1 / ((eps + b0) * (eps + b0));
        const double a1 = 0.6 / ((eps + b1) * (eps + b1));
        const double a2 = 0.3 / ((eps + b2) * (eps + b2));
        out[i] = (a0 * f0 + a1 * f1 + a2 * f2) / (a0 + a1 + a2);
    }
}

}  // namespace detail

/// b(x) (v^2)_x by WENO-5 flux differencing with global Lax-Friedrichs
/// splitting, alpha = max_i |2 v_i|. The equation u_t = +b g(v)_x is
/// u_t + (-g)_x = 0 in conservation form, so the (g - alpha v)/2 component
/// takes the left-biased reconstruction and (g + alpha v)/2 the right-biased.
inline GridFunction weno5_advection(const GridFunction& v, const GridFunction& b_coef) {
    const int n = v.size();
    const double dx = v.dx;
    GridFunction out;
    out.dx = dx;
    out.values.assign(n, 0.0);
    double alpha = 0.0;
    for (double x : v.values) alpha = std::max(alpha, std::abs(2.0 * x));
    std::vector<double> gm(n), gp(n), recl, recr;
    for (int i = 0; i < n; ++i) {
        const double g = v.values[i] * v.values[i];
        gm[i] = 0.5 * (g - alpha * v.values[i]);
        gp[i] = 0.5 * (g + alpha * v.values[i]);
    }
    detail::weno5_rec_left(gm, recl);
    detail::weno5_rec_right(gp, recr);
    for (int i = 0; i < n; ++i) {
        const double fh = recl[i] + recr[i];
        const double fhm = recl[(i + n - 1) % n] + recr[(i + n - 1) % n];
        out.values[i] = b_coef.values[i] * (fh - fhm) / dx;
    }
    return out;
}

/// Solve (I - gh diag(a) D[v]) x = rhs: the cyclic tridiagonal core of the
/// Burgers implicit stage (dense LU fallback below n = 32).
inline std::vector<double> burgers_implicit_core(double gh, const GridFunction& v, const GridFunction& a_coef,
                                                 const std::vector<double>& rhs) {
    const int n = v.size();
    const double dx = v.dx;
    std::vector<double> k(n);
    for (int i = 0; i < n; ++i) k[i] = std::sqrt(std::abs(v.values[i]));
    std::vector<double> diag(n), sub(n), sup(n);
    for (int i = 0; i < n; ++i) {
        const int ip = (i + 1) % n, im = (i + n - 1) % n;
        const double kp = 0.5 * (k[i] + k[ip]);
        const double km = 0.5 * (k[i] + k[im]);
        const double scale = gh * a_coef.values[i] / (dx * dx);
        diag[i] = 1.0 + scale * (kp + km);
        sup[i] = -scale * kp;
        sub[i] = -scale * km;
    }
    if (n >= 32) return cyclic_tridiagonal_solve(diag, sub, sup, rhs);
    MatD m(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = diag[i];
        m(i, (i + 1) % n) += sup[i];
        m(i, (i + n - 1) % n) += sub[i];
    }
    return lu_solve(std::move(m), rhs);
}

/// The semi-implicit nonlinear partition of the Burgers benchmark:
///   F(u, v) = diag(a) D[v] u + diag(b) W(v)
/// with the implicit solve Y = rhs + gh F(Y, v) performed as one cyclic
/// tridiagonal solve after folding the frozen advection term into the rhs.
inline PartitionedSystem burgers_nld(const BurgersConfig& cfg) {
    const int n = cfg.n;
    if (n < 16) throw Error("burgers_nld: n must be >= 16");
    GridFunction a, b;
    a.dx = b.dx = cfg.dx();
    a.values.resize(n);
    b.values.resize(n);
    for (int i = 0; i < n; ++i) {
        a.values[i] = burgers_a_coef(cfg.x(i));
        b.values[i] = burgers_b_coef(cfg.x(i));
    }

    PartitionedSystem sys;
    sys.n = n;
    const double dx = cfg.dx();
    sys.f = [n, dx, a, b](const State& u, const State& v, State& out) {
        GridFunction gu{u, dx}, gv{v, dx};
        GridFunction diff = diffusion_apply(gv, gu, a);
        GridFunction adv = weno5_advection(gv, b);
        for (int i = 0; i < n; ++i) out[i] = diff.values[i] + adv.values[i];
    };
    sys.solve_hook = [n, dx, a, b](double gh, const State& v, const State& rhs, State& out) {
        GridFunction gv{v, dx};
        GridFunction adv = weno5_advection(gv, b);
        std::vector<double> r = rhs;
        for (int i = 0; i < n; ++i) r[i] += gh * adv.values[i];
        out = burgers_implicit_core(gh, gv, a, r);
    };
    return sys;
}

}  // namespace mrnprk
