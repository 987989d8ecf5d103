#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "errors.hpp"

namespace ellgeo {

using Vec4 = Eigen::Vector4d;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

inline constexpr double axis_tol = 1e-9;
inline constexpr double leaf_tol = 1e-12;
inline constexpr double auto_project_tol = 1e-6;
inline constexpr double D_min = 1e-14;

enum class SymmetryTag { generic, equal_middle, sphere_like, partially_degenerate };

inline const char* to_string(SymmetryTag t) {
    switch (t) {
        case SymmetryTag::generic: return "generic";
        case SymmetryTag::equal_middle: return "equal_middle";
        case SymmetryTag::sphere_like: return "sphere_like";
        case SymmetryTag::partially_degenerate: return "partially_degenerate";
    }
    return "unknown";
}

// Semi-axes squared of the ellipsoid sum x_i^2/alpha_i = 1.  Axes that agree to
// axis_tol (relative) are snapped to exact equality so that every downstream
// formula sees the same degeneracy pattern as the tag.
class EllipsoidSpec {
public:
    explicit EllipsoidSpec(const std::array<double, 4>& a) {
        for (int i = 0; i < 4; ++i)
            if (!(a[i] > 0.0) || !std::isfinite(a[i]))
                fail(ErrorCode::invalid_spec, "alpha_" + std::to_string(i) + " must be a positive finite number");
        std::array<bool, 3> eq{};
        for (int i = 0; i < 3; ++i) {
            eq[i] = std::abs(a[i + 1] - a[i]) <= axis_tol * std::max(a[i], a[i + 1]);
            if (!eq[i] && a[i + 1] < a[i])
                fail(ErrorCode::invalid_spec, "alphas must be nondecreasing (alpha_" + std::to_string(i) +
                                                  " > alpha_" + std::to_string(i + 1) + ")");
        }
        for (int i = 0; i < 4; ++i) alpha_[i] = a[i];
        for (int i = 0; i < 3; ++i)
            if (eq[i]) alpha_[i + 1] = alpha_[i];
        if (eq[0] && eq[1] && eq[2])
            tag_ = SymmetryTag::sphere_like;
        else if (!eq[0] && !eq[1] && !eq[2])
            tag_ = SymmetryTag::generic;
        else if (!eq[0] && eq[1] && !eq[2])
            tag_ = SymmetryTag::equal_middle;
        else
            tag_ = SymmetryTag::partially_degenerate;
    }

    double alpha(int i) const { return alpha_[i]; }
    const Vec4& alphas() const { return alpha_; }
    SymmetryTag tag() const { return tag_; }

    // A(z) = prod (alpha_j - z)
    double A(double z) const {
        return (alpha_[0] - z) * (alpha_[1] - z) * (alpha_[2] - z) * (alpha_[3] - z);
    }

    bool axis_is_simple(int i) const {
        for (int j = 0; j < 4; ++j)
            if (j != i && alpha_[j] == alpha_[i]) return false;
        return true;
    }

    void require_generic(const char* what) const {
        if (tag_ != SymmetryTag::generic)
            fail(ErrorCode::degenerate_axes, std::string(what) + " needs four distinct axes");
    }
    void require_equal_middle(const char* what) const {
        if (tag_ != SymmetryTag::equal_middle)
            fail(ErrorCode::wrong_symmetry, std::string(what) + " needs alpha_0 < alpha_1 = alpha_2 < alpha_3");
    }

private:
    Vec4 alpha_;
    SymmetryTag tag_;
};

struct Casimirs {
    double c1;
    double c2;
};

inline Casimirs casimirs(const EllipsoidSpec& s, const Vec4& x, const Vec4& y) {
    const Vec4& a = s.alphas();
    return {(x.array().square() / a.array()).sum() - 1.0, (x.array() * y.array() / a.array()).sum()};
}

// D = <A^{-1}x, A^{-1}x>
inline double D_of(const EllipsoidSpec& s, const Vec4& x) {
    return (x.array() / s.alphas().array()).square().sum();
}

namespace detail {

inline double c2_scale(const Vec4& y) { return 1.0 + y.norm(); }

// Position along A^{-1}x (Newton on C1), then strip the normal part of y.
// Templated on the scalar so the integrator can run it in extended precision.
template <class T>
bool restore_leaf_t(const Eigen::Matrix<T, 4, 1>& a, Eigen::Matrix<T, 4, 1>& x, Eigen::Matrix<T, 4, 1>& y) {
    using std::abs;
    using V = Eigen::Matrix<T, 4, 1>;
    const T eps = std::numeric_limits<T>::epsilon();
    auto c1_of = [&] { return T((x.array().square() / a.array()).sum() - T(1)); };
    auto c2_of = [&] { return T((x.array() * y.array() / a.array()).sum()); };
    for (int it = 0; it < 25; ++it) {
        V n = x.array() / a.array();
        T c1 = c1_of();
        T t = 0;
        T lin = 2 * (x.array() * n.array() / a.array()).sum();
        T quad = (n.array().square() / a.array()).sum();
        for (int k = 0; k < 25; ++k) {
            T f = c1 + t * lin + t * t * quad;
            T df = lin + 2 * t * quad;
            if (df == T(0)) return false;
            T dt = f / df;
            t -= dt;
            if (abs(dt) <= eps * eps * (1 + abs(t))) break;
        }
        x += t * n;
        V m = x.array() / a.array();
        T Dx = m.squaredNorm();
        if (Dx <= T(D_min)) return false;
        y -= (c2_of() / Dx) * m;
        if (abs(c1_of()) <= 64 * eps && abs(c2_of()) <= 64 * eps * (1 + y.norm())) return true;
    }
    return abs(c1_of()) <= T(leaf_tol) && abs(c2_of()) <= T(leaf_tol) * (1 + y.norm());
}

inline bool restore_leaf(const EllipsoidSpec& s, Vec4& x, Vec4& y) { return restore_leaf_t<double>(s.alphas(), x, y); }

}  // namespace detail

// Cartesian position and velocity on the symplectic leaf C1 = C2 = 0.
class PhasePoint {
public:
    PhasePoint(const EllipsoidSpec& s, const Vec4& x, const Vec4& y) : x_(x), y_(y) {
        Casimirs c = casimirs(s, x_, y_);
        double sc = detail::c2_scale(y_);
        if (std::abs(c.c1) <= leaf_tol && std::abs(c.c2) <= leaf_tol * sc) return;
        if (std::abs(c.c1) > auto_project_tol || std::abs(c.c2) > auto_project_tol * sc)
            fail(ErrorCode::off_leaf, "point is too far from the leaf C1=C2=0 to be projected");
        if (!detail::restore_leaf(s, x_, y_))
            fail(ErrorCode::projection_failed, "leaf projection did not converge");
    }

    const Vec4& x() const { return x_; }
    const Vec4& y() const { return y_; }
    Vec8 stacked() const {
        Vec8 z;
        z << x_, y_;
        return z;
    }

private:
    Vec4 x_;
    Vec4 y_;
};

inline Casimirs casimirs(const EllipsoidSpec& s, const PhasePoint& p) { return casimirs(s, p.x(), p.y()); }

inline double energy(const PhasePoint& p) { return 0.5 * p.y().squaredNorm(); }

// Also defined off the leaf, where finite-difference Jacobians need it.
inline Mat8 dirac_structure(const EllipsoidSpec& s, const Vec4& x, const Vec4& y) {
    const Vec4& a = s.alphas();
    double D = D_of(s, x);
    if (D <= D_min) fail(ErrorCode::degenerate_point, "D(x) vanishes");
    Mat8 B = Mat8::Zero();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double w = 1.0 / (D * a[i] * a[j]);
            double xy = (i == j ? 1.0 : 0.0) - x[i] * x[j] * w;
            B(i, 4 + j) = xy;
            B(4 + j, i) = -xy;
            B(4 + i, 4 + j) = -(x[i] * y[j] - x[j] * y[i]) * w;
        }
    return B;
}

inline Mat8 dirac_structure(const EllipsoidSpec& s, const PhasePoint& p) { return dirac_structure(s, p.x(), p.y()); }

inline double poisson_bracket(const Mat8& B, const Vec8& ga, const Vec8& gb) { return ga.dot(B * gb); }

namespace detail {

// f = sum_k d_k y_k^2 + sum_pairs c_ab (x_a y_b - x_b y_a)^2
struct MomentQuadratic {
    Vec4 d = Vec4::Zero();
    std::array<std::array<double, 4>, 4> c{};  // only a < b used

    double value(const Vec4& x, const Vec4& y) const {
        double f = (d.array() * y.array().square()).sum();
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b)
                if (c[a][b] != 0.0) {
                    double m = x[a] * y[b] - x[b] * y[a];
                    f += c[a][b] * m * m;
                }
        return f;
    }
    Vec8 gradient(const Vec4& x, const Vec4& y) const {
        Vec8 g = Vec8::Zero();
        for (int k = 0; k < 4; ++k) g[4 + k] = 2.0 * d[k] * y[k];
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b)
                if (c[a][b] != 0.0) {
                    double m2 = 2.0 * c[a][b] * (x[a] * y[b] - x[b] * y[a]);
                    g[a] += m2 * y[b];
                    g[b] -= m2 * y[a];
                    g[4 + b] += m2 * x[a];
                    g[4 + a] -= m2 * x[b];
                }
        return g;
    }
};

inline MomentQuadratic uhlenbeck_form(const EllipsoidSpec& s, int i) {
    if (!s.axis_is_simple(i))
        fail(ErrorCode::degenerate_axes, "F_" + std::to_string(i) + " needs alpha_" + std::to_string(i) +
                                             " distinct from the other axes");
    MomentQuadratic q;
    q.d[i] = 1.0;
    for (int j = 0; j < 4; ++j) {
        if (j == i) continue;
        // (x_i y_j - x_j y_i)^2 is symmetric in the pair, so store it under (min, max)
        q.c[std::min(i, j)][std::max(i, j)] = 1.0 / (s.alpha(i) - s.alpha(j));
    }
    return q;
}

inline MomentQuadratic g_form(const EllipsoidSpec& s) {
    s.require_equal_middle("G");
    MomentQuadratic q;
    double a0 = s.alpha(0), a1 = s.alpha(1), a3 = s.alpha(3);
    q.d[1] = q.d[2] = 1.0;
    q.c[0][1] = q.c[0][2] = 1.0 / (a1 - a0);
    q.c[1][3] = q.c[2][3] = 1.0 / (a1 - a3);
    return q;
}

}  // namespace detail

inline double uhlenbeck_integral(const EllipsoidSpec& s, const PhasePoint& p, int i) {
    return detail::uhlenbeck_form(s, i).value(p.x(), p.y());
}

inline Vec4 uhlenbeck_integrals(const EllipsoidSpec& s, const PhasePoint& p) {
    s.require_generic("Uhlenbeck integrals");
    Vec4 f;
    for (int i = 0; i < 4; ++i) f[i] = uhlenbeck_integral(s, p, i);
    return f;
}

struct SymmetricIntegrals {
    double h;
    double j;
    double g;
};

inline double angular_momentum(const PhasePoint& p) { return p.x()[1] * p.y()[2] - p.x()[2] * p.y()[1]; }

inline SymmetricIntegrals symmetric_integrals(const EllipsoidSpec& s, const PhasePoint& p) {
    s.require_equal_middle("symmetric integrals");
    return {energy(p), angular_momentum(p), detail::g_form(s).value(p.x(), p.y())};
}

// F_0/a_0 + G/a_1 - J^2/a_1^2 + F_3/a_3, zero on the leaf
inline double symmetric_relation_residual(const EllipsoidSpec& s, const PhasePoint& p) {
    SymmetricIntegrals I = symmetric_integrals(s, p);
    double a1 = s.alpha(1);
    return uhlenbeck_integral(s, p, 0) / s.alpha(0) + I.g / a1 - I.j * I.j / (a1 * a1) +
           uhlenbeck_integral(s, p, 3) / s.alpha(3);
}

struct IntegralValues {
    double h = 0.0;
    bool symmetric = false;
    Vec4 f = Vec4::Zero();  // generic only
    double j = 0.0;         // equal_middle only
    double g = 0.0;
};

inline IntegralValues integral_values(const EllipsoidSpec& s, const PhasePoint& p) {
    IntegralValues v;
    v.h = energy(p);
    if (s.tag() == SymmetryTag::generic) {
        v.f = uhlenbeck_integrals(s, p);
    } else if (s.tag() == SymmetryTag::equal_middle) {
        v.symmetric = true;
        SymmetricIntegrals I = symmetric_integrals(s, p);
        v.j = I.j;
        v.g = I.g;
    }
    return v;
}

// Analytic gradients, ordered (x_0..x_3, y_0..y_3).
inline Vec8 grad_energy(const PhasePoint& p) {
    Vec8 g;
    g << Vec4::Zero(), p.y();
    return g;
}
inline Vec8 grad_uhlenbeck(const EllipsoidSpec& s, const PhasePoint& p, int i) {
    return detail::uhlenbeck_form(s, i).gradient(p.x(), p.y());
}
inline Vec8 grad_g(const EllipsoidSpec& s, const PhasePoint& p) { return detail::g_form(s).gradient(p.x(), p.y()); }
inline Vec8 grad_j(const PhasePoint& p) {
    Vec8 g = Vec8::Zero();
    g[1] = p.y()[2];
    g[2] = -p.y()[1];
    g[5] = -p.x()[2];
    g[6] = p.x()[1];
    return g;
}
inline Vec8 grad_c1(const EllipsoidSpec& s, const PhasePoint& p) {
    Vec8 g = Vec8::Zero();
    g.head<4>() = 2.0 * (p.x().array() / s.alphas().array()).matrix();
    return g;
}
inline Vec8 grad_c2(const EllipsoidSpec& s, const PhasePoint& p) {
    Vec8 g;
    g << (p.y().array() / s.alphas().array()).matrix(), (p.x().array() / s.alphas().array()).matrix();
    return g;
}

struct Tangent {
    Vec4 dx;
    Vec4 dy;
};

// Newton form of the constrained geodesic equations.  Valid for raw states as
// well, which the integrator needs for its intermediate stages.
inline Tangent geodesic_field(const EllipsoidSpec& s, const Vec4& x, const Vec4& y) {
    const Vec4& a = s.alphas();
    Vec4 ax = x.array() / a.array();
    double D = ax.squaredNorm();
    if (D <= D_min) fail(ErrorCode::degenerate_point, "D(x) vanishes");
    double lambda = (y.array().square() / a.array()).sum() / D;
    return {y, -lambda * ax};
}

inline Tangent hamiltonian_vector_field(const EllipsoidSpec& s, const PhasePoint& p) {
    return geodesic_field(s, p.x(), p.y());
}

// X_F = B grad F
inline Vec8 hamiltonian_flow(const EllipsoidSpec& s, const PhasePoint& p, const Vec8& grad) {
    return dirac_structure(s, p) * grad;
}

// Uniformly oriented position, velocity normal to grad C1, |y|^2 = 2h.
template <class Rng>
PhasePoint random_leaf_point(const EllipsoidSpec& s, Rng& rng, double h = 0.5) {
    std::normal_distribution<double> n01(0.0, 1.0);
    const Vec4& a = s.alphas();
    Vec4 x, y;
    for (int i = 0; i < 4; ++i) x[i] = n01(rng) * std::sqrt(a[i]);
    x /= std::sqrt((x.array().square() / a.array()).sum());
    for (int i = 0; i < 4; ++i) y[i] = n01(rng);
    Vec4 m = x.array() / a.array();
    y -= (y.dot(m) / m.squaredNorm()) * m;
    y *= std::sqrt(2.0 * h) / y.norm();
    return PhasePoint(s, x, y);
}

}  // namespace ellgeo
