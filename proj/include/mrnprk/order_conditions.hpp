#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mrnprk/tableau.hpp"

namespace mrnprk {

/// The ten edge-colored trees through order three. Subscripts name the color
/// of each internal edge (1 = first argument, 2 = second argument).
enum class Tree {
    F,          // order 1
    F1_F,       // order 2
    F2_F,
    F11_FF,     // order 3
    F12_FF,
    F22_FF,
    F1_F1_F,
    F1_F2_F,
    F2_F1_F,
    F2_F2_F,
};

inline const std::array<Tree, 10>& all_trees() {
    static const std::array<Tree, 10> trees = {Tree::F,      Tree::F1_F,    Tree::F2_F,    Tree::F11_FF,
                                               Tree::F12_FF, Tree::F22_FF,  Tree::F1_F1_F, Tree::F1_F2_F,
                                               Tree::F2_F1_F, Tree::F2_F2_F};
    return trees;
}

inline int tree_order(Tree t) {
    switch (t) {
        case Tree::F: return 1;
        case Tree::F1_F:
        case Tree::F2_F: return 2;
        default: return 3;
    }
}

inline double tree_density(Tree t) {
    switch (t) {
        case Tree::F: return 1.0;
        case Tree::F1_F:
        case Tree::F2_F: return 2.0;
        case Tree::F11_FF:
        case Tree::F12_FF:
        case Tree::F22_FF: return 3.0;
        default: return 6.0;
    }
}

inline std::string tree_name(Tree t) {
    switch (t) {
        case Tree::F: return "F";
        case Tree::F1_F: return "F1[F]";
        case Tree::F2_F: return "F2[F]";
        case Tree::F11_FF: return "F11[F,F]";
        case Tree::F12_FF: return "F12[F,F]";
        case Tree::F22_FF: return "F22[F,F]";
        case Tree::F1_F1_F: return "F1[F1[F]]";
        case Tree::F1_F2_F: return "F1[F2[F]]";
        case Tree::F2_F1_F: return "F2[F1[F]]";
        case Tree::F2_F2_F: return "F2[F2[F]]";
    }
    return "?";
}

namespace detail {

// Elementary weights as literal sums over the sparse tensor entries, with a
// membership filter so the same code computes both the full-index-set value
// and the reduced sums over the Table-3 index sets. The filter receives the
// role of each bound index.
struct IndexFilter {
    std::function<bool(int)> bi;      // output first index i
    std::function<bool(int)> bj;      // output second index j
    std::function<bool(int, int)> i1; // first-slot stage argument of row r: (r, index)
    std::function<bool(int, int)> i2; // second-slot stage argument of row r

    static IndexFilter none() {
        auto yes1 = [](int) { return true; };
        auto yes2 = [](int, int) { return true; };
        return {yes1, yes1, yes2, yes2};
    }
};

inline double phi_filtered(const NprkTensor& t, Tree tree, const IndexFilter& f) {
    const auto c_of = [&](int stage, std::function<bool(int, int)> g1, std::function<bool(int, int)> g2) {
        double s = 0.0;
        for (const auto& e : t.row(stage))
            if (g1(stage, e.j) && g2(stage, e.k)) s += e.v;
        return s;
    };
    // c restricted through the row owner's index sets
    const auto cI = [&](int stage) { return c_of(stage, f.i1, f.i2); };

    double phi = 0.0;
    for (const auto& be : t.b_entries()) {
        if (!f.bi(be.i) || !f.bj(be.j)) continue;
        const int i = be.i, j = be.j;
        switch (tree) {
            case Tree::F: phi += be.v; break;
            case Tree::F1_F: phi += be.v * cI(i); break;
            case Tree::F2_F: phi += be.v * cI(j); break;
            case Tree::F11_FF: phi += be.v * cI(i) * cI(i); break;
            case Tree::F12_FF: phi += be.v * cI(i) * cI(j); break;
            case Tree::F22_FF: phi += be.v * cI(j) * cI(j); break;
            case Tree::F1_F1_F:
                for (const auto& ae : t.row(i))
                    if (f.i1(i, ae.j) && f.i2(i, ae.k)) phi += be.v * ae.v * cI(ae.j);
                break;
            case Tree::F1_F2_F:
                for (const auto& ae : t.row(i))
                    if (f.i1(i, ae.j) && f.i2(i, ae.k)) phi += be.v * ae.v * cI(ae.k);
                break;
            case Tree::F2_F1_F:
                for (const auto& ae : t.row(j))
                    if (f.i1(j, ae.j) && f.i2(j, ae.k)) phi += be.v * ae.v * cI(ae.j);
                break;
            case Tree::F2_F2_F:
                for (const auto& ae : t.row(j))
                    if (f.i1(j, ae.j) && f.i2(j, ae.k)) phi += be.v * ae.v * cI(ae.k);
                break;
        }
    }
    return phi;
}

}  // namespace detail

/// Elementary weight Phi(tau) summed over the full stage index set.
inline double elementary_weight(const NprkTensor& t, Tree tree) {
    return detail::phi_filtered(t, tree, detail::IndexFilter::none());
}

struct TreeCondition {
    Tree tree;
    double phi;
    double gamma;
    double residual;  // phi - 1/gamma
};

inline std::vector<TreeCondition> residual_table(const NprkTensor& t) {
    std::vector<TreeCondition> out;
    for (Tree tree : all_trees()) {
        const double phi = elementary_weight(t, tree);
        const double g = tree_density(tree);
        out.push_back({tree, phi, g, phi - 1.0 / g});
    }
    return out;
}

/// Largest p in {0..3} with every residual of order <= p below tol.
inline int order_of(const NprkTensor& t, double tol = 1e-10) {
    const auto table = residual_table(t);
    int order = 0;
    for (int p = 1; p <= 3; ++p) {
        bool ok = true;
        for (const auto& row : table)
            if (tree_order(row.tree) <= p && std::abs(row.residual) >= tol) ok = false;
        if (!ok) break;
        order = p;
    }
    return order;
}

/// Classical RK order through 3 (standard conditions; prerequisite checks).
inline int classical_order_of(const ButcherTableau& t, double tol = 1e-10) {
    const int s = t.stages();
    double sb = 0.0, sbc = 0.0, sbcc = 0.0, sbac = 0.0;
    for (int i = 0; i < s; ++i) {
        sb += t.b[i];
        sbc += t.b[i] * t.c[i];
        sbcc += t.b[i] * t.c[i] * t.c[i];
        for (int j = 0; j < s; ++j) sbac += t.b[i] * t.A(i, j) * t.c[j];
    }
    if (std::abs(sb - 1.0) >= tol) return 0;
    if (std::abs(sbc - 0.5) >= tol) return 1;
    if (std::abs(sbcc - 1.0 / 3.0) >= tol || std::abs(sbac - 1.0 / 6.0) >= tol) return 2;
    return 3;
}

/// True iff every Phi(tau) recomputed over the reduced Table-3 index sets for
/// the method's coupling class matches the full-index-set value to 1e-13.
inline bool index_set_reduction_check(const NprkTensor& t, const StageSets& ss, double tol = 1e-13) {
    using detail::IndexFilter;
    const auto in1 = [&](int i) { return ss.s1.count(i) > 0; };
    const auto in2 = [&](int i) { return ss.s2.count(i) > 0; };

    IndexFilter f;
    f.bi = in1;
    f.bj = in2;
    switch (ss.coupling) {
        case Coupling::FullyDecoupled:
            f.i1 = [=](int, int j) { return in1(j); };
            f.i2 = [=](int, int k) { return in2(k); };
            break;
        case Coupling::OneToTwo:
            f.i1 = [=](int, int j) { return in1(j); };
            f.i2 = [=](int r, int k) { return in1(r) ? true : in2(k); };
            break;
        case Coupling::TwoToOne:
            f.i1 = [=](int r, int j) { return in2(r) ? true : in1(j); };
            f.i2 = [=](int, int k) { return in2(k); };
            break;
        case Coupling::FullyCoupled:
            f = IndexFilter::none();
            break;
    }

    for (Tree tree : all_trees()) {
        const double full = elementary_weight(t, tree);
        const double reduced = detail::phi_filtered(t, tree, f);
        if (std::abs(full - reduced) > tol) return false;
    }
    return true;
}

}  // namespace mrnprk
