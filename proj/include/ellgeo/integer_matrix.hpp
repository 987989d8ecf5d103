#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "errors.hpp"

namespace ellgeo {

using IMat3 = std::array<std::array<long long, 3>, 3>;
using IVec3 = std::array<long long, 3>;

inline IMat3 imat_identity() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

inline IMat3 operator*(const IMat3& a, const IMat3& b) {
    IMat3 c{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline long long imat_det(const IMat3& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline std::string to_string(const IMat3& m) {
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < 3; ++i) {
        os << (i ? ",[" : "[");
        for (int j = 0; j < 3; ++j) os << (j ? "," : "") << m[i][j];
        os << "]";
    }
    os << "]";
    return os.str();
}

// Integer 3x3 matrix with |det| = 1.
class TransitionMatrix {
public:
    TransitionMatrix() : m_(imat_identity()) {}
    explicit TransitionMatrix(const IMat3& m) : m_(m) {
        long long d = imat_det(m_);
        if (d != 1 && d != -1) fail(ErrorCode::non_integer_transition, "matrix is not unimodular: " + to_string(m_));
    }

    // Rounds a numerically assembled matrix; every entry must be within tol of an integer.
    static TransitionMatrix from_real(const Eigen::Matrix3d& a, double tol = 1e-4) {
        IMat3 m{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double r = std::round(a(i, j));
                if (!(std::abs(a(i, j) - r) <= tol)) {
                    std::ostringstream os;
                    os << "entry (" << i << "," << j << ") = " << a(i, j) << " is not within " << tol
                       << " of an integer";
                    fail(ErrorCode::non_integer_transition, os.str());
                }
                m[i][j] = static_cast<long long>(r);
            }
        return TransitionMatrix(m);
    }

    const IMat3& entries() const { return m_; }
    long long operator()(int i, int j) const { return m_[i][j]; }
    long long determinant() const { return imat_det(m_); }
    bool is_identity() const { return m_ == imat_identity(); }

    TransitionMatrix inverse() const {
        const IMat3& a = m_;
        long long d = determinant();
        IMat3 r{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                int i1 = (j + 1) % 3, i2 = (j + 2) % 3, j1 = (i + 1) % 3, j2 = (i + 2) % 3;
                r[i][j] = (a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1]) * d;
            }
        return TransitionMatrix(r);
    }

    friend TransitionMatrix operator*(const TransitionMatrix& a, const TransitionMatrix& b) {
        return TransitionMatrix(a.m_ * b.m_);
    }
    friend bool operator==(const TransitionMatrix& a, const TransitionMatrix& b) { return a.m_ == b.m_; }

private:
    IMat3 m_;
};

inline TransitionMatrix reflection_S() { return TransitionMatrix(IMat3{{{-1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}); }

namespace detail {

inline long long content(const IVec3& v) {
    return std::gcd(std::gcd(std::llabs(v[0]), std::llabs(v[1])), std::llabs(v[2]));
}

inline long long dot(const IVec3& a, const IVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Unimodular R (columns) with u^T R = (1, 0, 0); u must be primitive.
inline IMat3 reduce_row(const IVec3& u) {
    IMat3 R = imat_identity();
    IVec3 r = u;
    auto colop = [&](int dst, int src, long long m) {  // col_dst -= m col_src
        for (int i = 0; i < 3; ++i) R[i][dst] -= m * R[i][src];
        r[dst] -= m * r[src];
    };
    for (;;) {
        int p = -1;
        for (int i = 0; i < 3; ++i)
            if (r[i] != 0 && (p < 0 || std::llabs(r[i]) < std::llabs(r[p]))) p = i;
        bool done = true;
        for (int q = 0; q < 3; ++q)
            if (q != p && r[q] != 0) {
                colop(q, p, r[q] / r[p]);
                done = false;
            }
        if (done) {
            if (p != 0) {
                for (int i = 0; i < 3; ++i) std::swap(R[i][0], R[i][p]);
                std::swap(r[0], r[p]);
            }
            if (r[0] < 0) {
                for (int i = 0; i < 3; ++i) R[i][0] = -R[i][0];
                r[0] = -r[0];
            }
            return R;
        }
    }
}

// (x, y) with a x + b y = gcd(a, b)
inline std::pair<long long, long long> bezout(long long a, long long b) {
    long long old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
        long long q = old_r / r;
        old_r -= q * r;
        std::swap(old_r, r);
        old_s -= q * s;
        std::swap(old_s, s);
        old_t -= q * t;
        std::swap(old_t, t);
    }
    if (old_r < 0) {
        old_s = -old_s;
        old_t = -old_t;
    }
    return {old_s, old_t};
}

}  // namespace detail

struct NormalForm {
    TransitionMatrix N;
    TransitionMatrix T;  // T M T^{-1} = N
};

// Parabolic M = I + k u v^T (u, v primitive, v.u = 0) is conjugate to
// I + k e_3 e_1^T.  T has first row v, second row in u-perp, third row t with t.u = 1.
inline NormalForm normal_form(const TransitionMatrix& M) {
    IMat3 A = M.entries();
    for (int i = 0; i < 3; ++i) A[i][i] -= 1;
    IMat3 A2 = A * A;
    for (const auto& row : A2)
        for (long long e : row)
            if (e != 0) fail(ErrorCode::not_parabolic, "(M - I)^2 != 0 for M = " + to_string(M.entries()));
    if (M.is_identity()) return {TransitionMatrix(), TransitionMatrix()};

    int col = 0;
    while (A[0][col] == 0 && A[1][col] == 0 && A[2][col] == 0) ++col;
    IVec3 u{A[0][col], A[1][col], A[2][col]};
    long long cu = detail::content(u);
    for (auto& e : u) e /= cu;
    int piv = 0;
    while (u[piv] == 0) ++piv;
    IVec3 w{};
    for (int j = 0; j < 3; ++j) {
        if (A[piv][j] % u[piv] != 0) fail(ErrorCode::not_parabolic, "M - I is not of rank one");
        w[j] = A[piv][j] / u[piv];
        for (int i = 0; i < 3; ++i)
            if (A[i][j] != u[i] * w[j]) fail(ErrorCode::not_parabolic, "M - I is not of rank one");
    }
    long long k = detail::content(w);
    IVec3 v = w;
    for (auto& e : v) e /= k;

    IMat3 R = detail::reduce_row(u);
    IVec3 t3{R[0][0], R[1][0], R[2][0]};
    IVec3 w1{R[0][1], R[1][1], R[2][1]}, w2{R[0][2], R[1][2], R[2][2]};
    // v = a w1 + b w2 within the lattice u-perp spanned by (w1, w2)
    Eigen::Matrix<double, 3, 2> W;
    for (int i = 0; i < 3; ++i) {
        W(i, 0) = static_cast<double>(w1[i]);
        W(i, 1) = static_cast<double>(w2[i]);
    }
    Eigen::Vector3d vd(static_cast<double>(v[0]), static_cast<double>(v[1]), static_cast<double>(v[2]));
    Eigen::Vector2d ab = W.colPivHouseholderQr().solve(vd);
    long long a = std::llround(ab[0]), b = std::llround(ab[1]);
    auto [x, y] = detail::bezout(a, b);  // a x + b y = 1
    IVec3 t2{};
    for (int i = 0; i < 3; ++i) t2[i] = -y * w1[i] + x * w2[i];
    IMat3 T{{v, t2, t3}};
    if (imat_det(T) < 0)
        for (auto& e : T[1]) e = -e;
    TransitionMatrix Tm(T);
    IMat3 Nm = imat_identity();
    Nm[2][0] = k;
    TransitionMatrix N(Nm);
    if (!(Tm * M * Tm.inverse() == N))
        fail(ErrorCode::not_parabolic, "normal form verification failed for M = " + to_string(M.entries()));
    return {N, Tm};
}

}  // namespace ellgeo
