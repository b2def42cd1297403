#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrnprk/errors.hpp"
#include "mrnprk/linalg.hpp"

namespace mrnprk {

// Exact-equality fallback tolerance for coefficient comparisons; all method
// coefficients are either exactly representable or rounded once from closed forms.
inline constexpr double kCoeffTol = 1e-14;

/// Classical Runge-Kutta coefficients (A, b, c) with row-sum abscissae.
struct ButcherTableau {
    MatD A;
    std::vector<double> b;
    std::vector<double> c;

    int stages() const { return static_cast<int>(b.size()); }

    bool is_explicit() const {
        for (int i = 0; i < stages(); ++i)
            for (int j = i; j < stages(); ++j)
                if (A(i, j) != 0.0) return false;
        return true;
    }

    bool is_diagonally_implicit() const {
        for (int i = 0; i < stages(); ++i)
            for (int j = i + 1; j < stages(); ++j)
                if (A(i, j) != 0.0) return false;
        return true;
    }

    bool row_sums_consistent(double tol = kCoeffTol) const {
        for (int i = 0; i < stages(); ++i) {
            double s = 0.0;
            for (int j = 0; j < stages(); ++j) s += A(i, j);
            if (std::abs(s - c[i]) > tol) return false;
        }
        return true;
    }
};

inline ButcherTableau make_tableau(MatD A, std::vector<double> b) {
    ButcherTableau t;
    t.c.assign(b.size(), 0.0);
    for (int i = 0; i < static_cast<int>(b.size()); ++i)
        for (int j = 0; j < static_cast<int>(b.size()); ++j) t.c[i] += A(i, j);
    t.A = std::move(A);
    t.b = std::move(b);
    return t;
}

/// Rank-3 stage tensor a_ijk and weight matrix b_ij of an NPRK method.
/// Entries are stored sparsely with 1-based indices, grouped by stage row.
class NprkTensor {
public:
    struct AEntry { int j, k; double v; };
    struct BEntry { int i, j; double v; };

    explicit NprkTensor(int s, bool imex = false) : s_(s), imex_(imex), rows_(s + 1) {
        if (s < 1) throw Error("NprkTensor: stage count must be positive");
    }

    int stages() const { return s_; }
    bool imex() const { return imex_; }

    /// Accumulate into a_{ijk}; zero results are pruned on read.
    void add_a(int i, int j, int k, double v) {
        check_index(i); check_index(j); check_index(k);
        if (imex_ && (j > i || k >= i) && v != 0.0)
            throw NonImexTensor("NprkTensor: entry (" + std::to_string(i) + "," + std::to_string(j) + "," +
                                std::to_string(k) + ") violates IMEX sparsity");
        for (auto& e : rows_[i])
            if (e.j == j && e.k == k) { e.v += v; return; }
        rows_[i].push_back({j, k, v});
    }

    void add_b(int i, int j, double v) {
        check_index(i); check_index(j);
        for (auto& e : b_)
            if (e.i == i && e.j == j) { e.v += v; return; }
        b_.push_back({i, j, v});
    }

    /// Copy the final stage row into the output weights (stiffly accurate construction).
    void set_output_from_final_stage() {
        b_.clear();
        for (const auto& e : rows_[s_]) add_b(e.j, e.k, e.v);
    }

    double a(int i, int j, int k) const {
        for (const auto& e : rows_[i])
            if (e.j == j && e.k == k) return e.v;
        return 0.0;
    }

    double b(int i, int j) const {
        for (const auto& e : b_)
            if (e.i == i && e.j == j) return e.v;
        return 0.0;
    }

    /// Nonzero stage entries of row i, in insertion order.
    const std::vector<AEntry>& row(int i) const { return rows_[i]; }
    const std::vector<BEntry>& b_entries() const { return b_; }

    std::vector<AEntry> all_a_entries_of(int i) const { return rows_[i]; }

    /// a^{1}_ij = sum_k a_ijk (0-based dense matrix).
    MatD a1() const {
        MatD m(s_, s_);
        for (int i = 1; i <= s_; ++i)
            for (const auto& e : rows_[i]) m(i - 1, e.j - 1) += e.v;
        return m;
    }

    /// a^{2}_ik = sum_j a_ijk.
    MatD a2() const {
        MatD m(s_, s_);
        for (int i = 1; i <= s_; ++i)
            for (const auto& e : rows_[i]) m(i - 1, e.k - 1) += e.v;
        return m;
    }

    std::vector<double> b1() const {
        std::vector<double> v(s_, 0.0);
        for (const auto& e : b_) v[e.i - 1] += e.v;
        return v;
    }

    std::vector<double> b2() const {
        std::vector<double> v(s_, 0.0);
        for (const auto& e : b_) v[e.j - 1] += e.v;
        return v;
    }

    /// Shared abscissae c_i = sum_jk a_ijk (identical for both underlying methods).
    std::vector<double> c() const {
        std::vector<double> v(s_, 0.0);
        for (int i = 1; i <= s_; ++i)
            for (const auto& e : rows_[i]) v[i - 1] += e.v;
        return v;
    }

    void prune(double tol = 0.0) {
        for (auto& r : rows_)
            r.erase(std::remove_if(r.begin(), r.end(), [&](const AEntry& e) { return std::abs(e.v) <= tol; }), r.end());
        b_.erase(std::remove_if(b_.begin(), b_.end(), [&](const BEntry& e) { return std::abs(e.v) <= tol; }), b_.end());
    }

    /// Output weights equal the final stage row, so y_{n+1} = Y_s.
    bool stiffly_accurate(double tol = kCoeffTol) const {
        for (const auto& e : rows_[s_])
            if (std::abs(b(e.j, e.k) - e.v) > tol) return false;
        for (const auto& e : b_)
            if (std::abs(a(s_, e.i, e.j) - e.v) > tol) return false;
        return true;
    }

private:
    void check_index(int i) const {
        if (i < 1 || i > s_) throw Error("NprkTensor: index out of range");
    }

    int s_;
    bool imex_;
    std::vector<std::vector<AEntry>> rows_;  // rows_[i] holds (j,k,v) of stage i
    std::vector<BEntry> b_;
};

/// Underlying classical method for F(u,v) = G(u): index-sum over k.
inline ButcherTableau underlying_first(const NprkTensor& t) { return make_tableau(t.a1(), t.b1()); }

/// Underlying classical method for F(u,v) = G(v): index-sum over j.
inline ButcherTableau underlying_second(const NprkTensor& t) { return make_tableau(t.a2(), t.b2()); }

struct ReduceResult {
    ButcherTableau tableau;
    std::vector<int> kept;  // surviving original stage indices, 1-based, sorted
};

/// Remove stages unreachable from the output and merge duplicate stages
/// (identical A-rows imply identical stage values), iterated to a fixed point.
/// The reduced method produces the same output as the original on any RHS.
inline ReduceResult reduce(const ButcherTableau& t, double tol = kCoeffTol) {
    const int s = t.stages();
    MatD A = t.A;
    std::vector<double> b = t.b;
    std::vector<int> alive(s);
    for (int i = 0; i < s; ++i) alive[i] = i;

    bool changed = true;
    while (changed) {
        changed = false;

        // reverse reachability from the output row
        std::set<int> keep;
        std::vector<int> frontier;
        for (int i : alive)
            if (std::abs(b[i]) > tol) { keep.insert(i); frontier.push_back(i); }
        while (!frontier.empty()) {
            const int i = frontier.back();
            frontier.pop_back();
            for (int j : alive)
                if (!keep.count(j) && std::abs(A(i, j)) > tol) { keep.insert(j); frontier.push_back(j); }
        }
        if (static_cast<int>(keep.size()) != static_cast<int>(alive.size())) {
            alive.assign(keep.begin(), keep.end());
            changed = true;
        }

        // duplicate stages: merge the later stage's column weights into the earlier one
        for (size_t x = 0; x < alive.size() && !changed; ++x) {
            for (size_t y = x + 1; y < alive.size() && !changed; ++y) {
                const int i1 = alive[x], i2 = alive[y];
                bool same = true;
                for (int j : alive)
                    if (std::abs(A(i1, j) - A(i2, j)) > tol) { same = false; break; }
                if (!same) continue;
                for (int i : alive) { A(i, i1) += A(i, i2); A(i, i2) = 0.0; }
                b[i1] += b[i2];
                b[i2] = 0.0;
                alive.erase(alive.begin() + static_cast<long>(y));
                changed = true;
            }
        }
    }

    std::sort(alive.begin(), alive.end());
    ReduceResult r;
    const int m = static_cast<int>(alive.size());
    r.tableau.A = MatD(m, m);
    r.tableau.b.resize(m);
    r.tableau.c.resize(m);
    for (int x = 0; x < m; ++x) {
        for (int y = 0; y < m; ++y) r.tableau.A(x, y) = A(alive[x], alive[y]);
        r.tableau.b[x] = b[alive[x]];
        r.tableau.c[x] = t.c[alive[x]];
    }
    r.kept.resize(m);
    for (int x = 0; x < m; ++x) r.kept[x] = alive[x] + 1;
    return r;
}

enum class Coupling { FullyDecoupled, OneToTwo, TwoToOne, FullyCoupled };

inline std::string to_string(Coupling c) {
    switch (c) {
        case Coupling::FullyDecoupled: return "fully-decoupled";
        case Coupling::OneToTwo: return "1->2";
        case Coupling::TwoToOne: return "2->1";
        case Coupling::FullyCoupled: return "fully-coupled";
    }
    return "?";
}

/// Irreducible stage index sets of the two underlying methods plus the
/// timescale-coupling class. The sets may intersect (the first-order L-stable
/// example shares its first implicit stage with the explicit chain).
struct StageSets {
    std::set<int> all;
    std::set<int> s1;
    std::set<int> s2;
    Coupling coupling = Coupling::FullyCoupled;

    bool disjoint() const {
        for (int i : s1)
            if (s2.count(i)) return false;
        return true;
    }
};

/// Classify by the tightest allowable set containing every nonzero coefficient.
inline Coupling classify_coupling(const NprkTensor& t, const StageSets& ss, double tol = kCoeffTol) {
    const auto& s1 = ss.s1;
    const auto& s2 = ss.s2;
    bool b_ok = true;
    for (const auto& e : t.b_entries())
        if (std::abs(e.v) > tol && !(s1.count(e.i) && s2.count(e.j))) b_ok = false;
    if (!b_ok) return Coupling::FullyCoupled;

    auto a_within = [&](auto allowed) {
        for (int i = 1; i <= t.stages(); ++i)
            for (const auto& e : t.row(i))
                if (std::abs(e.v) > tol && !allowed(i, e.j, e.k)) return false;
        return true;
    };
    auto in_base = [&](int, int j, int k) { return s1.count(j) && s2.count(k); };
    if (a_within(in_base)) return Coupling::FullyDecoupled;
    if (a_within([&](int i, int j, int k) { return in_base(i, j, k) || (s1.count(i) && s1.count(j) && s1.count(k)); }))
        return Coupling::OneToTwo;
    if (a_within([&](int i, int j, int k) { return in_base(i, j, k) || (s2.count(i) && s2.count(j) && s2.count(k)); }))
        return Coupling::TwoToOne;
    return Coupling::FullyCoupled;
}

/// S^{r} = kept stages of reduce(underlying_r); verifies S^{1} u S^{2} = S.
inline StageSets stage_sets(const NprkTensor& t) {
    StageSets ss;
    for (int i = 1; i <= t.stages(); ++i) ss.all.insert(i);
    const auto r1 = reduce(underlying_first(t));
    const auto r2 = reduce(underlying_second(t));
    ss.s1.insert(r1.kept.begin(), r1.kept.end());
    ss.s2.insert(r2.kept.begin(), r2.kept.end());
    std::set<int> uni = ss.s1;
    uni.insert(ss.s2.begin(), ss.s2.end());
    if (uni != ss.all)
        throw AssumptionViolation("stage_sets: S^{1} u S^{2} != S (stage reducible in both underlying methods)");
    ss.coupling = classify_coupling(t, ss);
    return ss;
}

struct SparsityViolation {
    bool is_b;        // b_ij entry (else a_ijk)
    int i, j, k;      // k unused for b entries
    double value;
    std::string condition;
};

/// Check the implied coefficient conditions of the claimed coupling class
/// (Table 2); an empty report means the tensor conforms.
inline std::vector<SparsityViolation> validate_sparsity(const NprkTensor& t, const StageSets& ss, Coupling claimed,
                                                        double tol = kCoeffTol) {
    std::vector<SparsityViolation> out;
    if (claimed == Coupling::FullyCoupled) return out;
    const auto& s1 = ss.s1;
    const auto& s2 = ss.s2;

    for (const auto& e : t.b_entries()) {
        if (std::abs(e.v) <= tol) continue;
        if (s2.count(e.i)) out.push_back({true, e.i, e.j, 0, e.v, "b_{gamma k} = 0"});
        if (s1.count(e.j)) out.push_back({true, e.i, e.j, 0, e.v, "b_{j nu} = 0"});
    }
    for (int i = 1; i <= t.stages(); ++i) {
        for (const auto& e : t.row(i)) {
            if (std::abs(e.v) <= tol) continue;
            switch (claimed) {
                case Coupling::FullyDecoupled:
                    if (s2.count(e.j)) out.push_back({false, i, e.j, e.k, e.v, "a_{i gamma k} = 0"});
                    if (s1.count(e.k)) out.push_back({false, i, e.j, e.k, e.v, "a_{i j nu} = 0"});
                    break;
                case Coupling::OneToTwo:
                    if (s2.count(e.j)) out.push_back({false, i, e.j, e.k, e.v, "a_{i gamma k} = 0"});
                    if (s2.count(i) && s1.count(e.k))
                        out.push_back({false, i, e.j, e.k, e.v, "a_{gamma j nu} = 0"});
                    break;
                case Coupling::TwoToOne:
                    if (s1.count(i) && s2.count(e.j))
                        out.push_back({false, i, e.j, e.k, e.v, "a_{nu gamma k} = 0"});
                    if (s1.count(e.k)) out.push_back({false, i, e.j, e.k, e.v, "a_{i j nu} = 0"});
                    break;
                default: break;
            }
        }
    }
    return out;
}

/// Composite tableau equivalent to m substeps of the base method with step h/m.
inline ButcherTableau compose(const ButcherTableau& base, int m) {
    if (m < 1) throw Error("compose: m must be >= 1");
    const int s = base.stages();
    const int n = s * m;
    ButcherTableau out;
    out.A = MatD(n, n);
    out.b.resize(n);
    out.c.resize(n);
    for (int p = 0; p < m; ++p) {
        for (int i = 0; i < s; ++i) {
            const int row = p * s + i;
            for (int q = 0; q < p; ++q)
                for (int j = 0; j < s; ++j) out.A(row, q * s + j) = base.b[j] / m;
            for (int j = 0; j < s; ++j) out.A(row, p * s + j) = base.A(i, j) / m;
            out.b[row] = base.b[i] / m;
            out.c[row] = (static_cast<double>(p) + base.c[i]) / m;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON serialization: tensors as {"s":int,"a":[[i,j,k,v],...],"b":[[i,j,v],...]},
// tableaux as {"A":[[...]],"b":[...],"c":[...]}; 1-based tensor indices.
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const NprkTensor& t) {
    nlohmann::json j;
    j["s"] = t.stages();
    auto a = nlohmann::json::array();
    for (int i = 1; i <= t.stages(); ++i)
        for (const auto& e : t.row(i))
            if (e.v != 0.0) a.push_back({i, e.j, e.k, e.v});
    auto b = nlohmann::json::array();
    for (const auto& e : t.b_entries())
        if (e.v != 0.0) b.push_back({e.i, e.j, e.v});
    j["a"] = std::move(a);
    j["b"] = std::move(b);
    return j;
}

inline NprkTensor tensor_from_json(const nlohmann::json& j) {
    NprkTensor t(j.at("s").get<int>());
    for (const auto& e : j.at("a")) t.add_a(e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>(), e.at(3).get<double>());
    for (const auto& e : j.at("b")) t.add_b(e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>());
    return t;
}

inline nlohmann::json to_json(const ButcherTableau& t) {
    nlohmann::json j;
    auto A = nlohmann::json::array();
    for (int i = 0; i < t.stages(); ++i) {
        auto row = nlohmann::json::array();
        for (int k = 0; k < t.stages(); ++k) row.push_back(t.A(i, k));
        A.push_back(std::move(row));
    }
    j["A"] = std::move(A);
    j["b"] = t.b;
    j["c"] = t.c;
    return j;
}

inline ButcherTableau tableau_from_json(const nlohmann::json& j) {
    const auto& A = j.at("A");
    const int s = static_cast<int>(A.size());
    ButcherTableau t;
    t.A = MatD(s, s);
    for (int i = 0; i < s; ++i)
        for (int k = 0; k < s; ++k) t.A(i, k) = A.at(i).at(k).get<double>();
    t.b = j.at("b").get<std::vector<double>>();
    t.c = j.at("c").get<std::vector<double>>();
    return t;
}

}  // namespace mrnprk
