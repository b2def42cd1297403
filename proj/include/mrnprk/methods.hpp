#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "mrnprk/errors.hpp"
#include "mrnprk/tableau.hpp"

namespace mrnprk {

// Root of p(z) = 1/6 - (3/2)z + 3z^2 - z^3, rounded once from the 32-digit value.
inline constexpr double kSdirkLambda = 0.43586652150845899941601945119356;

inline ButcherTableau ssp2() {
    MatD A(2, 2);
    A(1, 0) = 1.0;
    return make_tableau(A, {0.5, 0.5});
}

inline ButcherTableau ssp3() {
    MatD A(3, 3);
    A(1, 0) = 1.0;
    A(2, 0) = 0.25;
    A(2, 1) = 0.25;
    return make_tableau(A, {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0});
}

/// Stiffly-accurate three-stage L-stable SDIRK with abscissae (lambda, (1+lambda)/2, 1).
inline ButcherTableau sdirk3_lstable() {
    const double l = kSdirkLambda;
    const double b1 = (-6.0 * l * l + 16.0 * l - 1.0) / 4.0;
    const double b2 = (6.0 * l * l - 20.0 * l + 5.0) / 4.0;
    MatD A(3, 3);
    A(0, 0) = l;
    A(1, 0) = 0.5 * (1.0 - l);
    A(1, 1) = l;
    A(2, 0) = b1;
    A(2, 1) = b2;
    A(2, 2) = l;
    return make_tableau(A, {b1, b2, l});
}

// ---------------------------------------------------------------------------
// First-order multirate examples
// ---------------------------------------------------------------------------

/// Backward Euler wrapped around s2 forward-Euler substeps, fully coupled;
/// mildly unstable in the stiff z1 limit. The correction term's explicit
/// argument is Y_{s2}, the unique choice giving b^{2} = (1/s2,...,1/s2, 0).
inline NprkTensor first_order_unstable(int s2) {
    if (s2 < 2) throw Error("first_order_unstable: s2 must be >= 2");
    const int s = s2 + 1;
    NprkTensor t(s, /*imex=*/true);
    for (int i = 2; i <= s2; ++i)
        for (int j = 1; j < i; ++j) t.add_a(i, 1, j, 1.0 / s2);
    for (int j = 1; j < s2; ++j) t.add_a(s, 1, j, 1.0 / s2);
    t.add_a(s, 1, s2, -(s2 - 1.0) / s2);
    t.add_a(s, s, s2, 1.0);
    t.set_output_from_final_stage();
    t.prune();
    return t;
}

/// The concrete 4-stage first-order example (equals first_order_unstable(3)).
inline NprkTensor first_order_example() { return first_order_unstable(3); }

/// Fully-decoupled variant whose reduced implicit method is a two-stage
/// L-stable DIRK; L-stable in the stiff z1 limit.
inline NprkTensor first_order_lstable(int s2) {
    if (s2 < 2) throw Error("first_order_lstable: s2 must be >= 2");
    const int s = s2 + 1;
    NprkTensor t(s, /*imex=*/true);
    for (int i = 2; i <= s2; ++i)
        for (int j = 1; j < i; ++j) t.add_a(i, 2, j, 1.0 / s2);
    for (int j = 1; j < s2; ++j) t.add_a(s, 2, j, 1.0 / s2);
    t.add_a(s, 2, s2, 1.0 / s2 - 0.75);
    t.add_a(s, s, s2, 0.75);
    t.set_output_from_final_stage();
    t.prune();
    return t;
}

// ---------------------------------------------------------------------------
// Implicitly wrapped second- and third-order methods
// ---------------------------------------------------------------------------

/// Coefficients consumed by the optimized second-order stepper.
struct Mr2Coefficients {
    ButcherTableau explicit_tableau;  // reduced explicit method (A^{2}, b^{2})
    double gamma;                     // a_{2,2,1} = a_{s,s,s-1}
};

enum class Mr3Variant { V1, V2 };

/// Coefficients consumed by the optimized third-order steppers.
struct Mr3Coefficients {
    ButcherTableau explicit_tableau;
    int omega = 2;                 // explicit argument of the Y3 solve: Y_1 or Y_2
    Mr3Variant variant = Mr3Variant::V1;
    double lambda = kSdirkLambda;
    double a322 = 0.0;
    double a_penult = 0.0;         // a_{s2+2,3,s2+1} (V1 only)
    double as31 = 0.0;             // a_{s,3,1}
    double as3sm1 = 0.0;           // a_{s,3,s-1}
    double delta = 0.0;            // substep blend weight (V2 only)
    ButcherTableau sdirk;          // the wrapped three-stage SDIRK
};

namespace detail {

inline void require_classical_order(const ButcherTableau& t, int order, const char* who) {
    // inline classical conditions up to order 3 (verify module cross-checks these)
    const int s = t.stages();
    double sb = 0.0, sbc = 0.0, sbcc = 0.0, sbac = 0.0;
    for (int i = 0; i < s; ++i) {
        sb += t.b[i];
        sbc += t.b[i] * t.c[i];
        sbcc += t.b[i] * t.c[i] * t.c[i];
        for (int j = 0; j < s; ++j) sbac += t.b[i] * t.A(i, j) * t.c[j];
    }
    const double tol = 1e-10;
    bool ok = std::abs(sb - 1.0) < tol;
    if (order >= 2) ok = ok && std::abs(sbc - 0.5) < tol;
    if (order >= 3) ok = ok && std::abs(sbcc - 1.0 / 3.0) < tol && std::abs(sbac - 1.0 / 6.0) < tol;
    if (!ok)
        throw OrderPrerequisite(std::string(who) + ": explicit base method fails the classical order-" +
                                std::to_string(order) + " conditions");
}

}  // namespace detail

/// Pad an explicit method of order >= 2 with one implicit stage at each end.
/// sign -1 gives gamma = (2-sqrt(2))/2 (better error), +1 the damped branch.
inline std::pair<NprkTensor, Mr2Coefficients> mr2(const ButcherTableau& explicit_tableau, int sign = -1) {
    if (!explicit_tableau.is_explicit()) throw OrderPrerequisite("mr2: base tableau is not explicit");
    detail::require_classical_order(explicit_tableau, 2, "mr2");
    const int s2 = explicit_tableau.stages();
    const int s = s2 + 2;
    const double g = (2.0 + sign * std::sqrt(2.0)) / 2.0;
    const auto& Ah = explicit_tableau.A;
    const auto& bh = explicit_tableau.b;

    NprkTensor t(s, /*imex=*/true);
    t.add_a(2, 2, 1, g);
    // NPRK stage i (3..s2+1) holds explicit stage i-1; stage argument k maps to
    // explicit column 1 for k=1 and k-1 for k>=3 (index 2 is the implicit stage).
    for (int i = 3; i <= s2 + 1; ++i) {
        const int er = i - 1;
        t.add_a(i, 2, 1, Ah(er - 1, 0));
        for (int k = 3; k < i; ++k) t.add_a(i, 2, k, Ah(er - 1, k - 2));
    }
    t.add_a(s, 2, 1, bh[0]);
    for (int k = 3; k <= s2; ++k) t.add_a(s, 2, k, bh[k - 2]);
    t.add_a(s, 2, s2 + 1, bh[s2 - 1] - g);
    t.add_a(s, s, s2 + 1, g);
    t.set_output_from_final_stage();
    t.prune();
    return {std::move(t), Mr2Coefficients{explicit_tableau, g}};
}

/// Pad an explicit method of order >= 3 with two implicit stages in front and
/// one behind, wrapping the three-stage L-stable SDIRK. V1 corrects the final
/// explicit stage through H(w) = F(Y3,w) - F(Y2,w); V2 substeps the blended
/// equation w' = (1-delta) F(Y2,w) + delta F(Y3,w) and keeps coefficients
/// bounded as s2 grows at twice the explicit evaluation cost.
inline std::pair<NprkTensor, Mr3Coefficients> mr3(const ButcherTableau& explicit_tableau, int omega,
                                                  Mr3Variant variant) {
    if (!explicit_tableau.is_explicit()) throw OrderPrerequisite("mr3: base tableau is not explicit");
    if (omega != 1 && omega != 2) throw Error("mr3: omega must be 1 or 2");
    detail::require_classical_order(explicit_tableau, 3, "mr3");
    const int s2 = explicit_tableau.stages();
    const int s = s2 + 3;
    const auto& Ah2 = explicit_tableau.A;
    const auto& bh2 = explicit_tableau.b;
    const auto& c2h = explicit_tableau.c;
    const ButcherTableau sd = sdirk3_lstable();
    const double lam = kSdirkLambda;
    const double c11 = sd.c[0], c12 = sd.c[1];
    const double a132 = sd.A(2, 1), a133 = sd.A(2, 2);
    const double c2last = c2h[s2 - 1];

    Mr3Coefficients cf;
    cf.explicit_tableau = explicit_tableau;
    cf.omega = omega;
    cf.variant = variant;
    cf.sdirk = sd;
    cf.a322 = (2.0 - 6.0 * lam) / (18.0 * lam * lam * lam - 60.0 * lam * lam + 15.0 * lam);
    if (omega == 2) cf.a322 -= lam;

    NprkTensor t(s, /*imex=*/true);
    t.add_a(2, 2, 1, sd.A(0, 0));
    t.add_a(3, 2, 1, sd.A(1, 0) - cf.a322);
    t.add_a(3, 2, 2, cf.a322);
    t.add_a(3, 3, omega, sd.A(1, 1));

    if (variant == Mr3Variant::V1) {
        if (std::abs(bh2[s2 - 1]) <= kCoeffTol)
            throw DegenerateCoefficient("mr3: V1 requires a nonzero final explicit weight");
        cf.a_penult = (1.0 - 3.0 * c11) / (6.0 * bh2[s2 - 1] * (c12 - c11));
        cf.as31 = (1.0 / 3.0 - a133 * c2last + c11 * (a133 * c2last - 0.5) - a132 * (c12 - c11) * c2last) /
                  ((c11 - c12) * c2last);
        cf.as3sm1 = a132 - cf.as31;
        // explicit stages: NPRK stage i (4..s2+1) <-> explicit row i-2
        for (int i = 4; i <= s2 + 1; ++i) {
            const int er = i - 2;
            t.add_a(i, 2, 1, Ah2(er - 1, 0));
            for (int k = 4; k < i; ++k) t.add_a(i, 2, k, Ah2(er - 1, k - 3));
        }
        // penultimate stage carries the H-correction on its last entry
        t.add_a(s2 + 2, 2, 1, Ah2(s2 - 1, 0));
        for (int k = 4; k <= s2; ++k) t.add_a(s2 + 2, 2, k, Ah2(s2 - 1, k - 3));
        t.add_a(s2 + 2, 2, s2 + 1, Ah2(s2 - 1, s2 - 2) - cf.a_penult);
        t.add_a(s2 + 2, 3, s2 + 1, cf.a_penult);
        // final stage
        t.add_a(s, 2, 1, bh2[0] - cf.as31);
        t.add_a(s, 3, 1, cf.as31);
        for (int k = 4; k <= s - 2; ++k) t.add_a(s, 2, k, bh2[k - 3]);
        t.add_a(s, 2, s - 1, bh2[s2 - 1] - cf.as3sm1 - a133);
        t.add_a(s, 3, s - 1, cf.as3sm1);
        t.add_a(s, s, s - 1, a133);
    } else {
        cf.delta = 2.0 * (3.0 * lam - 1.0) / (3.0 * (lam - 1.0));
        const double dl = cf.delta;
        const double X1 = a132 - dl * (1.0 - bh2[0] - bh2[s2 - 1]);
        const double X3 = bh2[s2 - 1] - X1;
        const double X4 = 0.5 - bh2[s2 - 1] * c2last;
        const double N1 = (1.0 - dl) * X4 + c2last * (X3 - a133);
        const double N2 = dl * X4 + c2last * X1;
        cf.as31 = (1.0 / 3.0 - a133 * c2last - c11 * N1 - c12 * N2) / ((c11 - c12) * c2last);
        cf.as3sm1 = a132 - cf.as31 - dl * (1.0 - bh2[0] - bh2[s2 - 1]);
        for (int i = 4; i <= s2 + 2; ++i) {
            const int er = i - 2;
            t.add_a(i, 2, 1, (1.0 - dl) * Ah2(er - 1, 0));
            t.add_a(i, 3, 1, dl * Ah2(er - 1, 0));
            for (int k = 4; k < i; ++k) {
                t.add_a(i, 2, k, (1.0 - dl) * Ah2(er - 1, k - 3));
                t.add_a(i, 3, k, dl * Ah2(er - 1, k - 3));
            }
        }
        t.add_a(s, 2, 1, bh2[0] - cf.as31);
        t.add_a(s, 3, 1, cf.as31);
        for (int k = 4; k <= s - 2; ++k) {
            t.add_a(s, 2, k, (1.0 - dl) * bh2[k - 3]);
            t.add_a(s, 3, k, dl * bh2[k - 3]);
        }
        t.add_a(s, 2, s - 1, bh2[s2 - 1] - cf.as3sm1 - a133);
        t.add_a(s, 3, s - 1, cf.as3sm1);
        t.add_a(s, s, s - 1, a133);
    }
    if (std::abs(cf.a_penult) > 1e3)
        std::fprintf(stderr, "mr3: warning, coupling coefficient a_{s2+2,3,s2+1} = %g is large\n", cf.a_penult);
    t.set_output_from_final_stage();
    t.prune();
    return {std::move(t), std::move(cf)};
}

// ---------------------------------------------------------------------------
// Method registry
// ---------------------------------------------------------------------------

enum class StepperKind { Generic, Mr2, Mr3V1, Mr3V2 };

/// A registry entry: the full tensor (for verification and stability) plus,
/// where one exists, the structured coefficients for an optimized stepper.
struct Method {
    std::string name;
    NprkTensor tensor;
    StepperKind kind = StepperKind::Generic;
    std::optional<Mr2Coefficients> mr2;
    std::optional<Mr3Coefficients> mr3;
};

/// Embed a classical explicit method as the NPRK tensor with a_{ijj} = A_ij.
inline NprkTensor classical_as_tensor(const ButcherTableau& t) {
    const int s = t.stages();
    NprkTensor out(s, /*imex=*/true);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < i; ++j)
            if (t.A(i, j) != 0.0) out.add_a(i + 1, j + 1, j + 1, t.A(i, j));
    for (int j = 0; j < s; ++j)
        if (t.b[j] != 0.0) out.add_b(j + 1, j + 1, t.b[j]);
    return out;
}

namespace detail {

inline std::optional<int> parse_suffix_int(const std::string& name, const std::string& prefix,
                                           const std::string& suffix) {
    if (name.size() <= prefix.size() + suffix.size()) return std::nullopt;
    if (name.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
    if (name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) return std::nullopt;
    const std::string mid = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
    if (mid.empty() || mid.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    return std::stoi(mid);
}

}  // namespace detail

/// Resolve a registry name: "ssp2-[{m}x]", "ssp3-[{m}x]", "MR-NPRK2-[ssp2-{m}x]",
/// "MR-NPRK3-1[ssp3-{m}x]", "MR-NPRK3-2[ssp3-{m}x]", "MR1-unstable-{s2}",
/// "MR1-lstable-{s2}". Throws UsageError for anything else.
inline Method lookup_method(const std::string& name) {
    using detail::parse_suffix_int;
    if (auto m = parse_suffix_int(name, "ssp2-[", "x]"))
        return {name, classical_as_tensor(compose(ssp2(), *m)), StepperKind::Generic, {}, {}};
    if (auto m = parse_suffix_int(name, "ssp3-[", "x]"))
        return {name, classical_as_tensor(compose(ssp3(), *m)), StepperKind::Generic, {}, {}};
    if (auto m = parse_suffix_int(name, "MR-NPRK2-[ssp2-", "x]")) {
        auto [t, c] = mr2(compose(ssp2(), *m), -1);
        return {name, std::move(t), StepperKind::Mr2, std::move(c), {}};
    }
    if (auto m = parse_suffix_int(name, "MR-NPRK3-1[ssp3-", "x]")) {
        auto [t, c] = mr3(compose(ssp3(), *m), 2, Mr3Variant::V1);
        return {name, std::move(t), StepperKind::Mr3V1, {}, std::move(c)};
    }
    if (auto m = parse_suffix_int(name, "MR-NPRK3-2[ssp3-", "x]")) {
        auto [t, c] = mr3(compose(ssp3(), *m), 2, Mr3Variant::V2);
        return {name, std::move(t), StepperKind::Mr3V2, {}, std::move(c)};
    }
    if (auto s2 = parse_suffix_int(name, "MR1-unstable-", ""))
        return {name, first_order_unstable(*s2), StepperKind::Generic, {}, {}};
    if (auto s2 = parse_suffix_int(name, "MR1-lstable-", ""))
        return {name, first_order_lstable(*s2), StepperKind::Generic, {}, {}};
    throw UsageError("unknown method name: " + name);
}

}  // namespace mrnprk
