#pragma once

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "core.hpp"

namespace ellgeo {

inline constexpr double coord_tol = 1e-8;

// Confocal parameters; lambda_0 = 0 on the surface itself.
struct EllipsoidalPoint {
    std::array<double, 4> lambdas{};
};

namespace detail {

// A'(alpha_i) for A(z) = prod (alpha_j - z)
inline double A_prime_at(const EllipsoidSpec& s, int i) {
    double d = -1.0;
    for (int j = 0; j < 4; ++j)
        if (j != i) d *= s.alpha(j) - s.alpha(i);
    return d;
}

inline void require_interlacing(const EllipsoidSpec& s, const EllipsoidalPoint& e) {
    const auto& l = e.lambdas;
    bool ok = l[0] <= s.alpha(0);
    for (int i = 1; i < 4; ++i) ok = ok && s.alpha(i - 1) <= l[i] && l[i] <= s.alpha(i);
    if (!ok) fail(ErrorCode::domain_error, "ellipsoidal coordinates must interlace with the axes");
}

}  // namespace detail

inline EllipsoidalPoint to_ellipsoidal(const EllipsoidSpec& s, const Vec4& x) {
    s.require_generic("ellipsoidal coordinates");
    const Vec4& a = s.alphas();
    double c1 = (x.array().square() / a.array()).sum() - 1.0;
    if (std::abs(c1) > 1e-10) fail(ErrorCode::off_leaf, "point is not on the ellipsoid");
    for (int i = 0; i < 4; ++i)
        if (std::abs(x[i]) < coord_tol)
            fail(ErrorCode::coordinate_singularity, "x_" + std::to_string(i) + " lies on a coordinate hyperplane");
    // sum x_k^2/(alpha_k - lambda) - 1 increases from -inf to +inf on each bracket
    auto K = [&](double lam) {
        double k = -1.0;
        for (int j = 0; j < 4; ++j) k += x[j] * x[j] / (a[j] - lam);
        return k;
    };
    EllipsoidalPoint e;
    e.lambdas[0] = 0.0;
    for (int i = 1; i < 4; ++i) {
        double lo = a[i - 1], hi = a[i];
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (K(mid) < 0.0 ? lo : hi) = mid;
        }
        e.lambdas[i] = 0.5 * (lo + hi);
    }
    return e;
}

// x_i^2 = B(alpha_i)/A'(alpha_i), B(z) = prod (lambda_j - z)
inline Vec4 from_ellipsoidal(const EllipsoidSpec& s, const EllipsoidalPoint& e) {
    s.require_generic("ellipsoidal coordinates");
    detail::require_interlacing(s, e);
    Vec4 x2;
    for (int i = 0; i < 4; ++i) {
        double B = 1.0;
        for (double l : e.lambdas) B *= l - s.alpha(i);
        double v = B / detail::A_prime_at(s, i);
        if (v < -1e-14) fail(ErrorCode::domain_error, "negative square from ellipsoidal inversion");
        x2[i] = std::max(v, 0.0);
    }
    return x2;
}

// Q(z) = 2h z^3 + s2 z^2 + s1 z, with sum F_i/(z - alpha_i) = Q(z)/A(z).
struct SeparationConstants {
    double h = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;

    double Q(double z) const { return ((2.0 * h * z + s2) * z + s1) * z; }
};

inline SeparationConstants separation_constants(const EllipsoidSpec& s, const Vec4& f) {
    s.require_generic("separation constants");
    double rel = 0.0, mag = 0.0;
    for (int i = 0; i < 4; ++i) {
        rel += f[i] / s.alpha(i);
        mag = std::max(mag, std::abs(f[i] / s.alpha(i)));
    }
    if (std::abs(rel) > 1e-10 * (1.0 + mag))
        fail(ErrorCode::leaf_incompatible, "sum F_i/alpha_i must vanish");
    SeparationConstants c;
    // Q = -sum F_i prod_{j != i}(alpha_j - z); e1, e2 are symmetric functions of the other three
    for (int i = 0; i < 4; ++i) {
        double e1 = 0.0, e2 = 0.0;
        for (int j = 0; j < 4; ++j) {
            if (j == i) continue;
            e1 += s.alpha(j);
            for (int k = j + 1; k < 4; ++k)
                if (k != i) e2 += s.alpha(j) * s.alpha(k);
        }
        c.h += 0.5 * f[i];
        c.s2 -= f[i] * e1;
        c.s1 += f[i] * e2;
    }
    return c;
}

inline Vec4 constants_to_integrals(const EllipsoidSpec& s, const SeparationConstants& c) {
    s.require_generic("separation constants");
    Vec4 f;
    for (int i = 0; i < 4; ++i) f[i] = c.Q(s.alpha(i)) / detail::A_prime_at(s, i);
    return f;
}

// Symmetric analogue Q~(z) = 2h z (z - r1)(z - r2).  In u = alpha_1 - z,
// Q~/z = 2h u^2 + (K g + L j^2) u - K j^2 with K = (a3-a1)(a1-a0)/a1 and
// L = (a0 a3 - a1^2)/a1^2.  The roots straddle alpha_1 because K > 0; the
// distances off1 = a1 - r1 and off2 = r2 - a1 are kept since the action
// quadrature needs them without cancellation.
struct QTildeCubic {
    double h = 0.0, g = 0.0, j = 0.0;
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;  // Q~(z)/z = c2 z^2 + c1 z + c0
    double r1 = 0.0, r2 = 0.0;
    double off1 = 0.0, off2 = 0.0;
    double K = 0.0, L = 0.0;

    double value(double z) const { return z * ((c2 * z + c1) * z + c0); }
};

inline QTildeCubic qtilde(const EllipsoidSpec& s, double h, double g, double j) {
    s.require_equal_middle("Q~");
    if (!(h > 0)) fail(ErrorCode::domain_error, "h must be positive");
    double a0 = s.alpha(0), a1 = s.alpha(1), a3 = s.alpha(3);
    QTildeCubic q;
    q.h = h;
    q.g = g;
    q.j = j;
    q.K = (a3 - a1) * (a1 - a0) / a1;
    q.L = (a0 * a3 - a1 * a1) / (a1 * a1);
    double A = 2.0 * h, B = q.K * g + q.L * j * j, C = -q.K * j * j;
    q.c2 = A;
    q.c1 = -2.0 * A * a1 - B;
    q.c0 = A * a1 * a1 + B * a1 + C;

    double disc = B * B - 4.0 * A * C;  // >= 0 since A > 0, C <= 0
    double u_pos, u_neg;                // u_pos >= 0 >= u_neg
    if (C == 0.0) {
        u_pos = std::max(0.0, -B / A);
        u_neg = std::min(0.0, -B / A);
    } else {
        double qq = -0.5 * (B + std::copysign(std::sqrt(disc), B));
        double ua = qq / A, ub = C / qq;
        u_pos = std::max(ua, ub);
        u_neg = std::min(ua, ub);
    }
    q.off1 = u_pos;
    q.off2 = -u_neg;
    q.r1 = a1 - q.off1;
    q.r2 = a1 + q.off2;
    double slack = 1e-12 * a3;
    if (q.r1 < a0 - slack || q.r2 > a3 + slack)
        fail(ErrorCode::outside_image, "(j, g) lies outside the energy-momentum image at this energy");
    return q;
}

// A~(z) = (a0 - z)(a1 - z)^2 (a3 - z)
inline double momenta_on_curve(const EllipsoidSpec& s, double lam, const SeparationConstants& c) {
    for (int k = 0; k < 4; ++k)
        if (std::abs(lam - s.alpha(k)) < 1e-13) fail(ErrorCode::pole_hit, "lambda sits on a pole of A");
    return -c.Q(lam) / (4.0 * s.A(lam));
}

inline double momenta_on_curve(const EllipsoidSpec& s, double lam, const QTildeCubic& q) {
    for (int k = 0; k < 4; ++k)
        if (std::abs(lam - s.alpha(k)) < 1e-13) fail(ErrorCode::pole_hit, "lambda sits on a pole of A");
    return -q.value(lam) / (4.0 * s.A(lam));
}

struct SO2Invariants {
    double pi1, pi2, pi3, pi4;
};

inline SO2Invariants so2_invariants(const PhasePoint& p) {
    const Vec4& x = p.x();
    const Vec4& y = p.y();
    return {x[1] * x[1] + x[2] * x[2], y[1] * y[1] + y[2] * y[2], x[1] * y[1] + x[2] * y[2],
            x[1] * y[2] - x[2] * y[1]};
}

// Coordinates on J^{-1}(j)/SO(2): xi = (x0, sqrt(pi1), x3), eta = (y0, pi3/sqrt(pi1), y3).
struct ReducedPoint {
    Eigen::Vector3d xi;
    Eigen::Vector3d eta;
    double j;
};

inline ReducedPoint reduce(const EllipsoidSpec& s, const PhasePoint& p) {
    s.require_equal_middle("reduction");
    SO2Invariants v = so2_invariants(p);
    if (!(v.pi1 > 0.0))
        fail(ErrorCode::axis_point, "x_1 = x_2 = 0 is the fixed set of the rotation; use the section path");
    double r = std::sqrt(v.pi1);
    ReducedPoint rp;
    rp.xi = {p.x()[0], r, p.x()[3]};
    rp.eta = {p.y()[0], v.pi3 / r, p.y()[3]};
    rp.j = v.pi4;
    return rp;
}

inline Casimirs reduced_casimirs(const EllipsoidSpec& s, const ReducedPoint& rp) {
    Eigen::Vector3d a(s.alpha(0), s.alpha(1), s.alpha(3));
    return {(rp.xi.array().square() / a.array()).sum() - 1.0, (rp.xi.array() * rp.eta.array() / a.array()).sum()};
}

struct ReducedEnergies {
    double h;
    double g;
};

inline ReducedEnergies reduced_energies(const EllipsoidSpec& s, const ReducedPoint& rp) {
    s.require_equal_middle("reduced energies");
    double a0 = s.alpha(0), a1 = s.alpha(1), a3 = s.alpha(3);
    const auto& xi = rp.xi;
    const auto& eta = rp.eta;
    double jj = rp.j * rp.j / (xi[1] * xi[1]);
    double h = 0.5 * eta.squaredNorm() + 0.5 * jj;
    double m0 = xi[1] * eta[0] - xi[0] * eta[1];
    double m2 = xi[1] * eta[2] - xi[2] * eta[1];
    double g = eta[1] * eta[1] + m0 * m0 / (a1 - a0) + m2 * m2 / (a1 - a3) +
               jj * (1.0 + xi[0] * xi[0] / (a1 - a0) + xi[2] * xi[2] / (a1 - a3));
    return {h, g};
}

}  // namespace ellgeo
