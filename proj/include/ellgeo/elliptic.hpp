#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"

namespace ellgeo {

namespace detail {

// R_C(1, 1+e)
inline double carlson_rc1(double e) {
    if (std::abs(e) < 1e-4) {
        double s = 0.0, t = 1.0;
        for (int k = 0; k < 8; ++k) {
            s += t / (2 * k + 1);
            t *= -e;
        }
        return s;
    }
    if (e > 0.0) {
        double r = std::sqrt(e);
        return std::atan(r) / r;
    }
    if (e <= -1.0) fail(ErrorCode::domain_error, "R_C argument out of range");
    double r = std::sqrt(-e);
    return std::atanh(r) / r;
}

}  // namespace detail

// Duplication algorithms; termination thresholds follow the Taylor remainder
// bound for a 1e-16 target, which leaves the 1e-14 contract with margin.
inline double carlson_rf(double x, double y, double z) {
    if (x < 0 || y < 0 || z < 0 || (x == 0) + (y == 0) + (z == 0) > 1)
        fail(ErrorCode::domain_error, "R_F needs nonnegative arguments, at most one zero");
    double A0 = (x + y + z) / 3.0;
    double Q = std::pow(3e-16, -1.0 / 6.0) * std::max({std::abs(A0 - x), std::abs(A0 - y), std::abs(A0 - z)});
    double A = A0, f = 1.0;
    while (f * Q >= std::abs(A)) {
        double sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z);
        double lam = sx * sy + sx * sz + sy * sz;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        A = 0.25 * (A + lam);
        f *= 0.25;
    }
    double X = (A - x) / A, Y = (A - y) / A;
    double Z = -(X + Y);
    double E2 = X * Y - Z * Z, E3 = X * Y * Z;
    return (1.0 - E2 / 10.0 + E3 / 14.0 + E2 * E2 / 24.0 - 3.0 * E2 * E3 / 44.0) / std::sqrt(A);
}

inline double carlson_rj(double x, double y, double z, double p) {
    if (x < 0 || y < 0 || z < 0 || (x == 0) + (y == 0) + (z == 0) > 1)
        fail(ErrorCode::domain_error, "R_J needs nonnegative x,y,z, at most one zero");
    if (!(p > 0)) fail(ErrorCode::domain_error, "R_J Cauchy principal value (p <= 0) is not supported");
    double A0 = (x + y + z + 2.0 * p) / 5.0;
    double delta = (p - x) * (p - y) * (p - z);
    double Q = std::pow(0.25e-16, -1.0 / 6.0) *
               std::max({std::abs(A0 - x), std::abs(A0 - y), std::abs(A0 - z), std::abs(A0 - p)});
    double A = A0, f = 1.0, sum = 0.0;
    double f3 = 1.0;  // 4^{-3m}
    while (f * Q >= std::abs(A)) {
        double sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z), sp = std::sqrt(p);
        double lam = sx * sy + sx * sz + sy * sz;
        double d = (sp + sx) * (sp + sy) * (sp + sz);
        double e = f3 * delta / (d * d);
        sum += f / d * detail::carlson_rc1(e);
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        p = 0.25 * (p + lam);
        A = 0.25 * (A + lam);
        f *= 0.25;
        f3 *= 1.0 / 64.0;
    }
    double X = (A - x) / A, Y = (A - y) / A, Z = (A - z) / A;
    double P = -(X + Y + Z) / 2.0;
    double E2 = X * Y + X * Z + Y * Z - 3.0 * P * P;
    double E3 = X * Y * Z + 2.0 * E2 * P + 4.0 * P * P * P;
    double E4 = (2.0 * X * Y * Z + E2 * P + 3.0 * P * P * P) * P;
    double E5 = X * Y * Z * P * P;
    double series = 1.0 - 3.0 * E2 / 14.0 + E3 / 6.0 + 9.0 * E2 * E2 / 88.0 - 3.0 * E4 / 22.0 -
                    9.0 * E2 * E3 / 52.0 + 3.0 * E5 / 26.0;
    return f * series / (A * std::sqrt(A)) + 6.0 * sum;
}

inline double carlson_rd(double x, double y, double z) { return carlson_rj(x, y, z, z); }

// Complete integrals in the parameter m = k^2.  m < 0 (imaginary modulus) is
// allowed and stays on real symmetric-form arguments.
inline double legendre_K_m(double m) {
    if (!(m < 1.0)) fail(ErrorCode::domain_error, "K needs k^2 < 1");
    return carlson_rf(0.0, 1.0 - m, 1.0);
}
inline double legendre_E_m(double m) {
    if (!(m < 1.0)) fail(ErrorCode::domain_error, "E needs k^2 < 1");
    if (m == 0.0) return std::numbers::pi / 2;
    return carlson_rf(0.0, 1.0 - m, 1.0) - m / 3.0 * carlson_rd(0.0, 1.0 - m, 1.0);
}
inline double legendre_Pi_m(double n, double m) {
    if (!(m < 1.0)) fail(ErrorCode::domain_error, "Pi needs k^2 < 1");
    if (!(n < 1.0)) fail(ErrorCode::domain_error, "Pi needs n < 1 (circular case)");
    double rf = carlson_rf(0.0, 1.0 - m, 1.0);
    if (n == 0.0) return rf;
    return rf + n / 3.0 * carlson_rj(0.0, 1.0 - m, 1.0, 1.0 - n);
}

inline double legendre_K(double k) { return legendre_K_m(k * k); }
inline double legendre_E(double k) { return legendre_E_m(k * k); }
inline double legendre_Pi(double n, double k) { return legendre_Pi_m(n, k * k); }

// Geodesics on the 2-ellipsoid of revolution with alpha_0 on the symmetry
// axis and equal axes alpha_1; j is the angular momentum about that axis.
struct RevolutionParams {
    double h;
    double j;
    double alpha0;
    double alpha1;

    double rho() const { return alpha0 / alpha1; }
    double jhat() const { return j / std::sqrt(2.0 * h * alpha1); }

    static RevolutionParams from_jhat(double h, double jhat, double alpha0, double alpha1) {
        return {h, jhat * std::sqrt(2.0 * h * alpha1), alpha0, alpha1};
    }

    void validate() const {
        if (!(h > 0)) fail(ErrorCode::invalid_spec, "h must be positive");
        if (!(alpha0 > 0) || !(alpha1 > 0)) fail(ErrorCode::invalid_spec, "axes must be positive");
        if (alpha0 == alpha1) fail(ErrorCode::invalid_spec, "rho = 1 is the round sphere");
        if (std::abs(jhat()) > 1.0) fail(ErrorCode::domain_error, "|jhat| > 1 has no real band");
    }
};

// Legendre normal form.  U E(k) - (rho jhat^2/U) Pi(beta^2, k); for rho > 1 the
// parameter k^2 is negative and beta^2 = (1 - jhat^2)/U^2 stays below 1.
inline double revolution_action(const RevolutionParams& prm) {
    prm.validate();
    double rho = prm.rho(), jh = prm.jhat();
    double scale = 4.0 * std::sqrt(2.0 * prm.h * prm.alpha1) / (2.0 * std::numbers::pi);
    if (std::abs(jh) == 1.0) return 0.0;
    double U2 = 1.0 - jh * jh * (1.0 - rho);
    double U = std::sqrt(U2);
    double m = (1.0 - rho) * (1.0 - jh * jh) / U2;
    double val = U * legendre_E_m(m);
    if (std::abs(jh) >= 1e-12) {
        double beta2 = (1.0 - jh * jh) / U2;
        val -= rho * jh * jh / U * legendre_Pi_m(beta2, m);
    }
    return std::max(0.0, scale * val);
}

// (1/2pi) closed-loop integral of p_s ds, band |s| <= s_m, with s = s_m sin u.
inline double revolution_action_quadrature(const RevolutionParams& prm) {
    prm.validate();
    double jh = prm.jhat();
    if (std::abs(jh) == 1.0) return 0.0;
    double a0 = prm.alpha0, a1 = prm.alpha1;
    double sm2 = a0 * (1.0 - jh * jh);
    auto f = [&](double u) {
        double su = std::sin(u), cu = std::cos(u);
        double s2 = sm2 * su * su;
        return sm2 * cu * cu * std::sqrt(a0 * a0 + (a1 - a0) * s2) / (a0 * (cu * cu + jh * jh * su * su));
    };
    double err = 0.0;
    double I = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, std::numbers::pi / 2, 30,
                                                                            1e-14, &err);
    return 4.0 / (2.0 * std::numbers::pi) * std::sqrt(2.0 * prm.h / a0) * I;
}

}  // namespace ellgeo
