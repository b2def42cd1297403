#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "mrnprk/errors.hpp"
#include "mrnprk/linalg.hpp"
#include "mrnprk/methods.hpp"
#include "mrnprk/tableau.hpp"

namespace mrnprk {

using State = std::vector<double>;

/// A two-argument right-hand side F(u, v) with F(y, y) = G(y), an optional
/// closed-form implicit solve, and an optional exact solution.
struct PartitionedSystem {
    int n = 0;
    // out = F(u, v)
    std::function<void(const State& u, const State& v, State& out)> f;
    // out solves Y = rhs + gh * F(Y, v); gh = gamma*h. Empty when unavailable.
    std::function<void(double gh, const State& v, const State& rhs, State& out)> solve_hook;
    // out = y(t); empty when no closed form exists
    std::function<void(double t, State& out)> exact;
};

enum class JacobianMode { FiniteDifference, HookOnly };

struct SolverConfig {
    double newton_tol = 1e-12;  // relative
    int max_iterations = 50;
    JacobianMode jacobian = JacobianMode::FiniteDifference;
};

/// Work counters. `evals` counts F evaluations made directly by a stepper;
/// evaluations inside an implicit solve (Newton residuals/Jacobians) are
/// tallied separately so the cost model evals + ratio*solves stays honest.
struct WorkCounters {
    long evals = 0;
    long solves = 0;
    long solve_evals = 0;
    long newton_iterations = 0;
};

namespace detail {

inline double inf_norm(const State& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline void axpy(State& y, double a, const State& x) {
    for (size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

/// Damped Newton for Y = rhs + h * sum_k w_k F(Y, v_k) with a forward-difference
/// Jacobian of the combined g(Y) = sum_k w_k F(Y, v_k).
inline State newton_solve(const PartitionedSystem& sys, const SolverConfig& cfg, WorkCounters& wc, double h,
                          const std::vector<std::pair<double, const State*>>& terms, const State& rhs,
                          const State& guess) {
    const int n = sys.n;
    State y = guess, g(n), gp(n), resid(n), tmp(n);

    auto eval_g = [&](const State& at, State& out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (const auto& [w, v] : terms) {
            sys.f(at, *v, tmp);
            ++wc.solve_evals;
            axpy(out, w, tmp);
        }
    };
    auto residual = [&](const State& at, State& out) {
        eval_g(at, g);
        for (int i = 0; i < n; ++i) out[i] = at[i] - rhs[i] - h * g[i];
    };

    residual(y, resid);
    double rnorm = inf_norm(resid);
    const double sqrt_eps = std::sqrt(2.220446049250313e-16);

    for (int it = 0; it < cfg.max_iterations; ++it) {
        if (rnorm <= cfg.newton_tol * std::max(1.0, inf_norm(y))) return y;
        ++wc.newton_iterations;

        // J = I - h * dg/du by forward differences, column by column
        eval_g(y, g);
        MatD J(n, n);
        State ypert = y;
        for (int col = 0; col < n; ++col) {
            const double eps = sqrt_eps * std::max(1.0, std::abs(y[col]));
            ypert[col] = y[col] + eps;
            eval_g(ypert, gp);
            ypert[col] = y[col];
            for (int r = 0; r < n; ++r) J(r, col) = (r == col ? 1.0 : 0.0) - h * (gp[r] - g[r]) / eps;
        }
        State neg = resid;
        for (double& x : neg) x = -x;
        State dy = lu_solve(std::move(J), std::move(neg));

        double alpha = 1.0;
        State ytrial(n), rtrial(n);
        bool accepted = false;
        for (int back = 0; back < 8; ++back) {
            for (int i = 0; i < n; ++i) ytrial[i] = y[i] + alpha * dy[i];
            residual(ytrial, rtrial);
            const double rt = inf_norm(rtrial);
            if (rt < rnorm || rt <= cfg.newton_tol * std::max(1.0, inf_norm(ytrial))) {
                y = ytrial;
                resid = rtrial;
                rnorm = rt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) throw NewtonDivergence("newton_solve: damping failed to reduce the residual");
    }
    if (rnorm <= cfg.newton_tol * std::max(1.0, inf_norm(y))) return y;
    throw NewtonDivergence("newton_solve: no convergence within the iteration cap");
}

/// Solve Y = rhs + gh * F(Y, v) through the hook when present, Newton otherwise.
inline State implicit_solve(const PartitionedSystem& sys, const SolverConfig& cfg, WorkCounters& wc, double gh,
                            const State& v, const State& rhs, const State& guess) {
    ++wc.solves;
    if (sys.solve_hook) {
        State out(sys.n);
        sys.solve_hook(gh, v, rhs, out);
        return out;
    }
    if (cfg.jacobian == JacobianMode::HookOnly)
        throw SolveFailure("implicit_solve: no solve hook and HookOnly requested");
    return newton_solve(sys, cfg, wc, gh, {{1.0, &v}}, rhs, guess);
}

}  // namespace detail

/// One step of an arbitrary IMEX-sparse NPRK tensor, evaluating stage pairs
/// lazily with a per-step cache. The reference oracle for optimized steppers.
inline State step_generic(const NprkTensor& t, const PartitionedSystem& sys, const State& y, double h,
                          const SolverConfig& cfg, WorkCounters& wc) {
    const int s = t.stages();
    for (int i = 1; i <= s; ++i)
        for (const auto& e : t.row(i))
            if (e.v != 0.0 && (e.j > i || e.k >= i))
                throw NonImexTensor("step_generic: tensor is not diagonally implicit in the IMEX sense");

    std::vector<State> stage(s + 1);
    std::map<std::pair<int, int>, State> cache;
    auto fval = [&](int j, int k) -> const State& {
        const auto key = std::make_pair(j, k);
        auto it = cache.find(key);
        if (it == cache.end()) {
            State out(sys.n);
            sys.f(stage[j], stage[k], out);
            ++wc.evals;
            it = cache.emplace(key, std::move(out)).first;
        }
        return it->second;
    };

    for (int i = 1; i <= s; ++i) {
        State rhs = y;
        bool has_diagonal = false;
        for (const auto& e : t.row(i)) {
            if (e.v == 0.0) continue;
            if (e.j == i)
                has_diagonal = true;
            else
                detail::axpy(rhs, h * e.v, fval(e.j, e.k));
        }
        if (!has_diagonal) {
            stage[i] = std::move(rhs);
            continue;
        }
        // diagonal second arguments are already-computed stages (k < i)
        std::vector<std::pair<double, const State*>> terms;
        for (const auto& e : t.row(i)) {
            if (e.v == 0.0 || e.j != i) continue;
            terms.push_back({e.v, &stage[e.k]});
        }
        if (terms.size() == 1 && sys.solve_hook) {
            stage[i] = detail::implicit_solve(sys, cfg, wc, h * terms[0].first, *terms[0].second, rhs, rhs);
        } else {
            if (cfg.jacobian == JacobianMode::HookOnly)
                throw SolveFailure("step_generic: stage needs Newton but HookOnly requested");
            ++wc.solves;
            stage[i] = detail::newton_solve(sys, cfg, wc, h, terms, rhs, i > 1 && !stage[i - 1].empty() ? stage[i - 1] : rhs);
        }
    }

    State out = y;
    for (const auto& e : t.b_entries())
        if (e.v != 0.0) detail::axpy(out, h * e.v, fval(e.i, e.j));
    return out;
}

namespace detail {

/// Stage values and output of one explicit RK step on w' = G(w).
struct SubstepResult {
    State w1;
    State last_stage;         // W_{s2}
    State second_last_stage;  // W_{s2-1} (equals w0 for one-stage methods)
};

template <class G>
SubstepResult rk_substep(const ButcherTableau& t, G&& g, const State& w0, double h) {
    const int s2 = t.stages();
    const int n = static_cast<int>(w0.size());
    std::vector<State> w(s2), d(s2);
    w[0] = w0;
    d[0].resize(n);
    g(w[0], d[0]);
    for (int m = 1; m < s2; ++m) {
        w[m] = w0;
        for (int l = 0; l < m; ++l)
            if (t.A(m, l) != 0.0) axpy(w[m], h * t.A(m, l), d[l]);
        d[m].resize(n);
        g(w[m], d[m]);
    }
    SubstepResult r;
    r.w1 = w0;
    for (int m = 0; m < s2; ++m)
        if (t.b[m] != 0.0) axpy(r.w1, h * t.b[m], d[m]);
    r.last_stage = std::move(w[s2 - 1]);
    r.second_last_stage = s2 >= 2 ? std::move(w[s2 - 2]) : w0;
    return r;
}

}  // namespace detail

/// Implicitly wrapped second-order step: implicit pre-solve, one explicit RK
/// step of w' = F(Y2, w), implicit post-solve with the -F(Y2, W_{s2}) correction.
inline State step_mr2(const Mr2Coefficients& c, const PartitionedSystem& sys, const State& y, double h,
                      const SolverConfig& cfg, WorkCounters& wc) {
    const double g = c.gamma;
    const State y2 = detail::implicit_solve(sys, cfg, wc, h * g, y, y, y);
    State tmp(sys.n);
    auto rhs_fun = [&](const State& w, State& out) {
        sys.f(y2, w, out);
        ++wc.evals;
    };
    auto sub = detail::rk_substep(c.explicit_tableau, rhs_fun, y, h);
    sys.f(y2, sub.last_stage, tmp);
    ++wc.evals;
    State rhs = std::move(sub.w1);
    detail::axpy(rhs, -h * g, tmp);
    return detail::implicit_solve(sys, cfg, wc, h * g, sub.last_stage, rhs, sub.last_stage);
}

namespace detail {

struct Mr3Prefix {
    State y2, y3;
    State f21;  // F(Y2, y_n)
};

inline Mr3Prefix mr3_prefix(const Mr3Coefficients& c, const PartitionedSystem& sys, const State& y, double h,
                            const SolverConfig& cfg, WorkCounters& wc) {
    const double lam = c.lambda;
    Mr3Prefix p;
    p.y2 = implicit_solve(sys, cfg, wc, h * lam, y, y, y);
    p.f21.resize(sys.n);
    sys.f(p.y2, y, p.f21);
    ++wc.evals;
    State f22(sys.n);
    sys.f(p.y2, p.y2, f22);
    ++wc.evals;
    State rhs3 = y;
    axpy(rhs3, h * (c.sdirk.A(1, 0) - c.a322), p.f21);
    axpy(rhs3, h * c.a322, f22);
    const State& vw = c.omega == 1 ? y : p.y2;
    p.y3 = implicit_solve(sys, cfg, wc, h * lam, vw, rhs3, p.y2);
    return p;
}

}  // namespace detail

/// Third-order step, correction variant: substep w' = F(Y2, w), then the
/// H-corrected penultimate stage and the xi-assembled final implicit solve.
inline State step_mr3_v1(const Mr3Coefficients& c, const PartitionedSystem& sys, const State& y, double h,
                         const SolverConfig& cfg, WorkCounters& wc) {
    const double lam = c.lambda;
    const int s2 = c.explicit_tableau.stages();
    auto pre = detail::mr3_prefix(c, sys, y, h, cfg, wc);

    auto rhs_fun = [&](const State& w, State& out) {
        sys.f(pre.y2, w, out);
        ++wc.evals;
    };
    auto sub = detail::rk_substep(c.explicit_tableau, rhs_fun, y, h);

    // Y_{s-1} = W_{s2} + h a_pen (F(Y3, W_{s2-1}) - F(Y2, W_{s2-1}))
    State t1(sys.n), t2(sys.n);
    sys.f(pre.y3, sub.second_last_stage, t1);
    sys.f(pre.y2, sub.second_last_stage, t2);
    wc.evals += 2;
    State ysm1 = sub.last_stage;
    detail::axpy(ysm1, h * c.a_penult, t1);
    detail::axpy(ysm1, -h * c.a_penult, t2);

    State f2sm1(sys.n), f2W(sys.n), f3y(sys.n), f3sm1(sys.n);
    sys.f(pre.y2, ysm1, f2sm1);
    sys.f(pre.y2, sub.last_stage, f2W);
    sys.f(pre.y3, y, f3y);
    sys.f(pre.y3, ysm1, f3sm1);
    wc.evals += 4;

    const double blast = c.explicit_tableau.b[s2 - 1];
    State xi = std::move(sub.w1);
    detail::axpy(xi, h * blast, f2sm1);
    detail::axpy(xi, -h * blast, f2W);
    detail::axpy(xi, h * c.as31, f3y);
    detail::axpy(xi, -h * c.as31, pre.f21);
    detail::axpy(xi, h * c.as3sm1, f3sm1);
    detail::axpy(xi, -h * c.as3sm1, f2sm1);
    detail::axpy(xi, -h * lam, f2sm1);
    return detail::implicit_solve(sys, cfg, wc, h * lam, ysm1, xi, ysm1);
}

/// Third-order step, blended variant: substep w' = (1-delta) F(Y2,w) + delta F(Y3,w).
inline State step_mr3_v2(const Mr3Coefficients& c, const PartitionedSystem& sys, const State& y, double h,
                         const SolverConfig& cfg, WorkCounters& wc) {
    const double lam = c.lambda;
    const double dl = c.delta;
    const int s2 = c.explicit_tableau.stages();
    auto pre = detail::mr3_prefix(c, sys, y, h, cfg, wc);

    State ta(sys.n), tb(sys.n);
    auto rhs_fun = [&](const State& w, State& out) {
        sys.f(pre.y2, w, ta);
        sys.f(pre.y3, w, tb);
        wc.evals += 2;
        for (int i = 0; i < sys.n; ++i) out[i] = (1.0 - dl) * ta[i] + dl * tb[i];
    };
    auto sub = detail::rk_substep(c.explicit_tableau, rhs_fun, y, h);

    State f3y(sys.n), f2y(sys.n), f3W(sys.n), f2W(sys.n);
    sys.f(pre.y3, y, f3y);
    sys.f(pre.y2, y, f2y);
    sys.f(pre.y3, sub.last_stage, f3W);
    sys.f(pre.y2, sub.last_stage, f2W);
    wc.evals += 4;

    const double b1 = c.explicit_tableau.b[0];
    const double blast = c.explicit_tableau.b[s2 - 1];
    State x = std::move(sub.w1);
    detail::axpy(x, h * (c.as31 - dl * b1), f3y);
    detail::axpy(x, -h * (c.as31 - dl * b1), f2y);
    detail::axpy(x, h * (c.as3sm1 - dl * blast), f3W);
    detail::axpy(x, -h * (c.as3sm1 - dl * blast), f2W);
    detail::axpy(x, -h * lam, f2W);
    return detail::implicit_solve(sys, cfg, wc, h * lam, sub.last_stage, x, sub.last_stage);
}

/// Dispatch one step of a registry method through its optimized stepper.
inline State apply_step(const Method& m, const PartitionedSystem& sys, const State& y, double h,
                        const SolverConfig& cfg, WorkCounters& wc) {
    switch (m.kind) {
        case StepperKind::Mr2: return step_mr2(*m.mr2, sys, y, h, cfg, wc);
        case StepperKind::Mr3V1: return step_mr3_v1(*m.mr3, sys, y, h, cfg, wc);
        case StepperKind::Mr3V2: return step_mr3_v2(*m.mr3, sys, y, h, cfg, wc);
        case StepperKind::Generic: break;
    }
    return step_generic(m.tensor, sys, y, h, cfg, wc);
}

struct StepDiagnostics {
    long evals;
    long solves;
    long newton_iterations;
};

struct IntegrateResult {
    State y;
    std::vector<StepDiagnostics> steps;
    WorkCounters totals;
};

using Stepper = std::function<State(const PartitionedSystem&, const State&, double, const SolverConfig&, WorkCounters&)>;

/// Uniform fixed steps h = (t1 - t0)/nsteps with per-step work diagnostics.
inline IntegrateResult integrate(const Stepper& step, const PartitionedSystem& sys, State y0, double t0, double t1,
                                 int nsteps, const SolverConfig& cfg = {}) {
    if (nsteps < 1) throw Error("integrate: nsteps must be >= 1");
    const double h = (t1 - t0) / nsteps;
    IntegrateResult res;
    res.y = std::move(y0);
    res.steps.reserve(static_cast<size_t>(nsteps));
    for (int k = 0; k < nsteps; ++k) {
        WorkCounters before = res.totals;
        res.y = step(sys, res.y, h, cfg, res.totals);
        res.steps.push_back({res.totals.evals - before.evals, res.totals.solves - before.solves,
                             res.totals.newton_iterations - before.newton_iterations});
    }
    return res;
}

inline Stepper make_stepper(const Method& m) {
    return [m](const PartitionedSystem& sys, const State& y, double h, const SolverConfig& cfg, WorkCounters& wc) {
        return apply_step(m, sys, y, h, cfg, wc);
    };
}

}  // namespace mrnprk
