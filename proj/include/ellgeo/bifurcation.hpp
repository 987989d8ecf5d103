#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "core.hpp"
#include "separation.hpp"

namespace ellgeo {

enum class Chart { generic, symmetric };  // (h, s1, s2) or (h, j, g)

struct EnergyMomentumValue {
    Chart chart = Chart::generic;
    double h = 0.0;
    double u = 0.0;  // s1 or j
    double v = 0.0;  // s2 or g

    static EnergyMomentumValue generic(double h, double s1, double s2) { return {Chart::generic, h, s1, s2}; }
    static EnergyMomentumValue symmetric(double h, double j, double g) { return {Chart::symmetric, h, j, g}; }
};

enum class CurveKind { subflow_line, double_root_curve, boundary_parabola };

enum class PointType {
    elliptic,
    hyperbolic,
    focus_focus,
    degenerate,
    elliptic_elliptic,
    elliptic_hyperbolic,
    hyperbolic_hyperbolic
};

inline const char* to_string(CurveKind k) {
    switch (k) {
        case CurveKind::subflow_line: return "subflow_line";
        case CurveKind::double_root_curve: return "double_root_curve";
        case CurveKind::boundary_parabola: return "boundary_parabola";
    }
    return "?";
}

inline const char* to_string(PointType t) {
    switch (t) {
        case PointType::elliptic: return "elliptic";
        case PointType::hyperbolic: return "hyperbolic";
        case PointType::focus_focus: return "focus_focus";
        case PointType::degenerate: return "degenerate";
        case PointType::elliptic_elliptic: return "elliptic_elliptic";
        case PointType::elliptic_hyperbolic: return "elliptic_hyperbolic";
        case PointType::hyperbolic_hyperbolic: return "hyperbolic_hyperbolic";
    }
    return "?";
}

struct CurveSample {
    double param;
    double c1;  // s1 or j
    double c2;  // s2 or g
};

// Coefficients by kind:
//   subflow_line       c[0] + c[1] s2 + c[2] s1 = 0
//   double_root_curve  (s1, s2) = (c[0] d^2, c[1] d)
//   boundary_parabola  g = c[0] + c[1] j^2
struct CriticalCurve {
    CurveKind kind;
    double param_min = 0.0, param_max = 0.0;
    std::string label;
    PointType type = PointType::elliptic;
    std::vector<CurveSample> polyline;
    std::vector<double> coefficients;

    double residual(double c1, double c2) const {
        const auto& c = coefficients;
        switch (kind) {
            case CurveKind::subflow_line: return c[0] + c[1] * c2 + c[2] * c1;
            case CurveKind::double_root_curve: {
                double d = c2 / c[1];
                return c1 - c[0] * d * d;
            }
            case CurveKind::boundary_parabola: return c2 - (c[0] + c[1] * c1 * c1);
        }
        return 0.0;
    }
};

struct CriticalPointRecord {
    EnergyMomentumValue location;
    int corank = 1;
    PointType type = PointType::elliptic;
    std::vector<std::complex<double>> eigenvalues;
    std::string label;
};

struct BifurcationDiagram {
    Chart chart = Chart::generic;
    double h = 0.0;
    std::vector<CriticalCurve> curves;
    std::vector<CriticalPointRecord> points;
    std::vector<std::string> annotations;  // stated, not verified here
};

namespace detail {

inline std::vector<CurveSample> sample_curve(double t0, double t1, int n, auto&& at) {
    std::vector<CurveSample> out;
    out.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        double t = n == 1 ? t0 : t0 + (t1 - t0) * k / (n - 1);
        auto [a, b] = at(t);
        out.push_back({t, a, b});
    }
    return out;
}

inline PointType pair_type(bool ell_i, bool ell_j) {
    if (ell_i && ell_j) return PointType::elliptic_elliptic;
    if (!ell_i && !ell_j) return PointType::hyperbolic_hyperbolic;
    return PointType::elliptic_hyperbolic;
}

}  // namespace detail

struct Corank2Eigenvalues {
    int i, j;
    std::complex<double> lambda_i, lambda_j;  // eigenvalues are +-lambda_i, +-lambda_j
    PointType type;
};

// On the ellipse orbit in the (k, l) plane, lambda_i^2 = 8 h a_i / (-(a_k - a_i)(a_l - a_i)).
inline Corank2Eigenvalues corank2_eigenvalues(const EllipsoidSpec& s, double h, int i, int j) {
    s.require_generic("corank-2 eigenvalues");
    if (!(0 <= i && i < j && j < 4)) fail(ErrorCode::domain_error, "pair must satisfy 0 <= i < j <= 3");
    int kl[2], n = 0;
    for (int m = 0; m < 4; ++m)
        if (m != i && m != j) kl[n++] = m;
    auto sq = [&](int a) {
        double ai = s.alpha(a);
        return 8.0 * h * ai / (-(s.alpha(kl[0]) - ai) * (s.alpha(kl[1]) - ai));
    };
    double li = sq(i), lj = sq(j);
    Corank2Eigenvalues r{i, j, std::sqrt(std::complex<double>(li)), std::sqrt(std::complex<double>(lj)), {}};
    r.type = detail::pair_type(li < 0, lj < 0);
    return r;
}

// Jacobian sub-block of X_{F_i} on the subflow x_i = y_i = 0.
inline CriticalPointRecord classify_corank1(const EllipsoidSpec& s, int i, const PhasePoint& p) {
    s.require_generic("corank-1 classification");
    if (i < 0 || i > 3) fail(ErrorCode::domain_error, "axis index must be in 0..3");
    const Vec4& x = p.x();
    const Vec4& y = p.y();
    if (std::abs(x[i]) > 1e-12 || std::abs(y[i]) > 1e-12)
        fail(ErrorCode::not_on_subflow, "x_i = y_i = 0 is required");
    auto K = [&](const Vec4& a, const Vec4& b) {
        double k = 0.0;
        for (int m = 0; m < 4; ++m)
            if (m != i) k += a[m] * b[m] / (s.alpha(m) - s.alpha(i));
        return k;
    };
    double kxy = K(x, y), kxx = K(x, x), kyy = K(y, y);
    Eigen::Matrix2d B;
    B << -2.0 * kxy, 2.0 * (kxx - 1.0), -2.0 * kyy, 2.0 * kxy;
    double det = B.determinant();
    double scale = B.cwiseAbs().rowwise().sum().maxCoeff();
    scale *= scale;

    CriticalPointRecord r;
    r.corank = 1;
    r.label = "F_" + std::to_string(i) + " = 0";
    double h = energy(p);
    SeparationConstants sc = separation_constants(s, uhlenbeck_integrals(s, p));
    r.location = EnergyMomentumValue::generic(h, sc.s1, sc.s2);
    std::complex<double> lam = std::sqrt(std::complex<double>(-det));
    r.eigenvalues = {lam, -lam};
    if (std::abs(det) <= 1e-12 * scale)
        r.type = PointType::degenerate;
    else
        r.type = det > 0 ? PointType::elliptic : PointType::hyperbolic;
    return r;
}

// True when Q(z)/z = 2h (z - r1)(z - r2) has real roots with r1 in [a0, a2],
// r2 in [a1, a3], which is the closed image at energy h.
inline bool in_generic_image(const EllipsoidSpec& s, double h, double s1, double s2, double tol = 1e-12) {
    double A = 2.0 * h, disc = s2 * s2 - 4.0 * A * s1;
    double sc = s.alpha(3) * s.alpha(3);
    if (disc < -tol * sc * A * A) return false;
    double sq = std::sqrt(std::max(0.0, disc));
    double r1 = (-s2 - sq) / (2.0 * A), r2 = (-s2 + sq) / (2.0 * A);
    double t = tol * s.alpha(3);
    return r1 >= s.alpha(0) - t && r1 <= s.alpha(2) + t && r2 >= s.alpha(1) - t && r2 <= s.alpha(3) + t;
}

// Lines Q(a_j) = 0 are parametrized by the second root rho of Q(z)/z, which
// also clips them to the image.
inline BifurcationDiagram generic_diagram(const EllipsoidSpec& s, double h, int samples = 512) {
    s.require_generic("generic bifurcation diagram");
    if (!(h > 0)) fail(ErrorCode::domain_error, "h must be positive");
    if (samples < 2) fail(ErrorCode::domain_error, "need at least 2 samples per curve");
    const double c = 2.0 * h;
    auto a = [&](int i) { return s.alpha(i); };
    BifurcationDiagram d;
    d.chart = Chart::generic;
    d.h = h;

    auto line = [&](int j, double lo, double hi, PointType type, const std::string& suffix) {
        CriticalCurve cv;
        cv.kind = CurveKind::subflow_line;
        cv.param_min = lo;
        cv.param_max = hi;
        cv.label = "F_" + std::to_string(j) + " = 0" + suffix;
        cv.type = type;
        cv.coefficients = {c * a(j) * a(j), a(j), 1.0};
        cv.polyline = detail::sample_curve(lo, hi, samples, [&](double rho) {
            return std::pair<double, double>{c * a(j) * rho, -c * (a(j) + rho)};
        });
        d.curves.push_back(std::move(cv));
    };
    line(0, a(1), a(3), PointType::elliptic, "");
    line(1, a(0), a(1), PointType::elliptic, " (boundary)");
    line(1, a(1), a(3), PointType::hyperbolic, " (interior)");
    line(2, a(0), a(2), PointType::hyperbolic, " (interior)");
    line(2, a(2), a(3), PointType::elliptic, " (boundary)");
    line(3, a(0), a(2), PointType::elliptic, "");

    CriticalCurve dr;
    dr.kind = CurveKind::double_root_curve;
    dr.param_min = a(1);
    dr.param_max = a(2);
    dr.label = "double root d";
    dr.type = PointType::elliptic;
    dr.coefficients = {c, -2.0 * c};
    dr.polyline = detail::sample_curve(a(1), a(2), samples, [&](double t) {
        return std::pair<double, double>{c * t * t, -2.0 * c * t};
    });
    d.curves.push_back(std::move(dr));

    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            Corank2Eigenvalues ev = corank2_eigenvalues(s, h, i, j);
            CriticalPointRecord r;
            r.location = EnergyMomentumValue::generic(h, c * a(i) * a(j), -c * (a(i) + a(j)));
            r.corank = 2;
            r.type = ev.type;
            r.eigenvalues = {ev.lambda_i, -ev.lambda_i, ev.lambda_j, -ev.lambda_j};
            r.label = "F_" + std::to_string(i) + " = F_" + std::to_string(j) + " = 0";
            d.points.push_back(std::move(r));
        }
    for (int i : {1, 2}) {
        CriticalPointRecord r;
        r.location = EnergyMomentumValue::generic(h, c * a(i) * a(i), -2.0 * c * a(i));
        r.corank = 1;
        r.type = PointType::degenerate;
        r.eigenvalues = {0.0, 0.0};
        r.label = "tangency F_" + std::to_string(i) + " = 0 / double root";
        d.points.push_back(std::move(r));
    }
    d.annotations = {"each chamber of regular values has 2 or 4 tori in its preimage (unverified)"};
    return d;
}

inline BifurcationDiagram symmetric_diagram(const EllipsoidSpec& s, double h, int samples = 512) {
    s.require_equal_middle("symmetric bifurcation diagram");
    if (!(h > 0)) fail(ErrorCode::domain_error, "h must be positive");
    if (samples < 2) fail(ErrorCode::domain_error, "need at least 2 samples per curve");
    double a0 = s.alpha(0), a1 = s.alpha(1), a3 = s.alpha(3);
    double jc = std::sqrt(2.0 * a1 * h);
    BifurcationDiagram d;
    d.chart = Chart::symmetric;
    d.h = h;
    auto parabola = [&](double c0, double c2, const std::string& label) {
        CriticalCurve cv;
        cv.kind = CurveKind::boundary_parabola;
        cv.param_min = -jc;
        cv.param_max = jc;
        cv.label = label;
        cv.type = PointType::elliptic;
        cv.coefficients = {c0, c2};
        cv.polyline = detail::sample_curve(-jc, jc, samples, [&](double j) {
            return std::pair<double, double>{j, c0 + c2 * j * j};
        });
        d.curves.push_back(std::move(cv));
    };
    parabola(2.0 * a1 * h / (a1 - a3), -a3 / (a1 * (a1 - a3)), "F_0 = 0 (lower)");
    parabola(2.0 * a1 * h / (a1 - a0), -a0 / (a1 * (a1 - a0)), "F_3 = 0 (upper)");

    double wc0 = 2.0 * std::sqrt(2.0 * a0 * h) / (a1 - a0), wc3 = 2.0 * std::sqrt(2.0 * a3 * h) / (a3 - a1);
    for (double sg : {-1.0, 1.0}) {
        CriticalPointRecord r;
        r.location = EnergyMomentumValue::symmetric(h, sg * jc, 2.0 * h);
        r.corank = 2;
        r.type = PointType::elliptic_elliptic;
        r.eigenvalues = {{0, wc0}, {0, -wc0}, {0, wc3}, {0, -wc3}};
        r.label = sg > 0 ? "corner j > 0" : "corner j < 0";
        d.points.push_back(std::move(r));
    }
    double wr = std::sqrt(8.0 * a1 * h / ((a1 - a0) * (a3 - a1)));
    CriticalPointRecord ff;
    ff.location = EnergyMomentumValue::symmetric(h, 0.0, 0.0);
    ff.corank = 2;
    ff.type = PointType::focus_focus;
    ff.eigenvalues = {{wr, 1.0}, {wr, -1.0}, {-wr, 1.0}, {-wr, -1.0}};
    ff.label = "focus-focus";
    d.points.push_back(std::move(ff));
    d.annotations = {"regular values have a single torus in their preimage (unverified)"};
    return d;
}

struct SymmetricSpecialEigenvalues {
    CriticalPointRecord corner;       // relative equilibria x_0 = x_3 = y_0 = y_3 = 0, mu DX_F0 + nu DX_F3
    CriticalPointRecord focus_focus;  // circles x_1 = x_2 = y_1 = y_2 = 0, mu DX_G + nu DX_J
};

inline SymmetricSpecialEigenvalues symmetric_special_eigenvalues(const EllipsoidSpec& s, double h, double mu = 1.0,
                                                                 double nu = 1.0) {
    s.require_equal_middle("special eigenvalues");
    if (!(h > 0)) fail(ErrorCode::domain_error, "h must be positive");
    double a0 = s.alpha(0), a1 = s.alpha(1), a3 = s.alpha(3);
    SymmetricSpecialEigenvalues r;
    double w0 = 2.0 * mu * std::sqrt(2.0 * a0 * h) / (a1 - a0);
    double w3 = 2.0 * nu * std::sqrt(2.0 * a3 * h) / (a3 - a1);
    r.corner.location = EnergyMomentumValue::symmetric(h, std::sqrt(2.0 * a1 * h), 2.0 * h);
    r.corner.corank = 2;
    r.corner.type = PointType::elliptic_elliptic;
    r.corner.eigenvalues = {{0, w0}, {0, -w0}, {0, w3}, {0, -w3}};
    r.corner.label = "corner relative equilibrium";
    double wr = mu * std::sqrt(8.0 * a1 * h / ((a1 - a0) * (a3 - a1)));
    r.focus_focus.location = EnergyMomentumValue::symmetric(h, 0.0, 0.0);
    r.focus_focus.corank = 2;
    r.focus_focus.type = PointType::focus_focus;
    r.focus_focus.eigenvalues = {{wr, nu}, {wr, -nu}, {-wr, nu}, {-wr, -nu}};
    r.focus_focus.label = "focus-focus";
    return r;
}

// Type tag read off an eigenvalue list: pairs +-lambda with lambda purely
// imaginary are elliptic, real hyperbolic; a quadruplet is focus-focus.
inline PointType type_from_eigenvalues(const std::vector<std::complex<double>>& ev, double tol = 1e-10) {
    int ell = 0, hyp = 0, ff = 0, zero = 0;
    for (const auto& l : ev) {
        double re = std::abs(l.real()), im = std::abs(l.imag()), sc = std::max(1.0, std::abs(l));
        if (re <= tol * sc && im <= tol * sc)
            ++zero;
        else if (re <= tol * sc)
            ++ell;
        else if (im <= tol * sc)
            ++hyp;
        else
            ++ff;
    }
    if (zero > 0) return PointType::degenerate;
    if (ff > 0) return PointType::focus_focus;
    if (ell + hyp <= 2) return ell ? PointType::elliptic : PointType::hyperbolic;
    if (hyp == 0) return PointType::elliptic_elliptic;
    if (ell == 0) return PointType::hyperbolic_hyperbolic;
    return PointType::elliptic_hyperbolic;
}

}  // namespace ellgeo
