#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "mrnprk/errors.hpp"

namespace mrnprk {

/// Minimal dense row-major matrix for the small (s <= ~60) systems in this library.
template <class T>
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols, T fill = T{}) : rows_(rows), cols_(cols), d_(static_cast<size_t>(rows) * cols, fill) {}

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    T& operator()(int i, int j) { return d_[static_cast<size_t>(i) * cols_ + j]; }
    const T& operator()(int i, int j) const { return d_[static_cast<size_t>(i) * cols_ + j]; }

    bool operator==(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && d_ == o.d_; }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<T> d_;
};

using MatD = Mat<double>;
using Complex = std::complex<double>;
using MatC = Mat<Complex>;

/// Determinant by in-place LU with partial pivoting. Works for real and complex T.
template <class T>
T lu_determinant(Mat<T> m) {
    const int n = m.rows();
    T det = T{1};
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(m(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double mag = std::abs(m(r, col));
            if (mag > best) { best = mag; piv = r; }
        }
        if (best == 0.0) return T{0};
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(m(piv, c), m(col, c));
            det = -det;
        }
        det *= m(col, col);
        for (int r = col + 1; r < n; ++r) {
            const T f = m(r, col) / m(col, col);
            for (int c = col + 1; c < n; ++c) m(r, c) -= f * m(col, c);
        }
    }
    return det;
}

/// Solve m x = b in place by LU with partial pivoting; throws SolveFailure on a zero pivot.
inline std::vector<double> lu_solve(MatD m, std::vector<double> b) {
    const int n = m.rows();
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(m(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double mag = std::abs(m(r, col));
            if (mag > best) { best = mag; piv = r; }
        }
        if (best == 0.0) throw SolveFailure("lu_solve: singular matrix");
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(m(piv, c), m(col, c));
            std::swap(b[piv], b[col]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = m(r, col) / m(col, col);
            b[r] -= f * b[col];
            for (int c = col + 1; c < n; ++c) m(r, c) -= f * m(col, c);
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= m(r, c) * b[c];
        b[r] = s / m(r, r);
    }
    return b;
}

/// Thomas algorithm for a (non-cyclic) tridiagonal system; no pivoting.
/// sub[i] couples row i to i-1 (sub[0] unused), sup[i] to i+1 (sup[n-1] unused).
inline std::vector<double> tridiagonal_solve(std::vector<double> diag, const std::vector<double>& sub,
                                             const std::vector<double>& sup, std::vector<double> rhs) {
    const size_t n = diag.size();
    if (diag[0] == 0.0) throw SolveFailure("tridiagonal_solve: zero pivot");
    for (size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        if (diag[i] == 0.0) throw SolveFailure("tridiagonal_solve: zero pivot");
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
    return rhs;
}

/// Cyclic tridiagonal solve (corner entries m[0][n-1] = sub[0], m[n-1][0] = sup[n-1])
/// via the Sherman-Morrison rank-one correction of a Thomas solve.
inline std::vector<double> cyclic_tridiagonal_solve(const std::vector<double>& diag, const std::vector<double>& sub,
                                                    const std::vector<double>& sup, const std::vector<double>& rhs) {
    const size_t n = diag.size();
    if (n < 3) throw SolveFailure("cyclic_tridiagonal_solve: n < 3");
    const double beta = sub[0];      // coupling to column n-1 in row 0
    const double alpha = sup[n - 1]; // coupling to column 0 in row n-1
    const double gamma = -diag[0];
    std::vector<double> d2 = diag;
    d2[0] -= gamma;
    d2[n - 1] -= alpha * beta / gamma;
    std::vector<double> y = tridiagonal_solve(d2, sub, sup, rhs);
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;
    std::vector<double> z = tridiagonal_solve(d2, sub, sup, u);
    const double denom = 1.0 + z[0] + beta * z[n - 1] / gamma;
    if (denom == 0.0) throw SolveFailure("cyclic_tridiagonal_solve: singular correction");
    const double fact = (y[0] + beta * y[n - 1] / gamma) / denom;
    for (size_t i = 0; i < n; ++i) y[i] -= fact * z[i];
    return y;
}

}  // namespace mrnprk
