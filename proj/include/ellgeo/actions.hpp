#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "integer_matrix.hpp"
#include "quadrature.hpp"
#include "separation.hpp"

namespace ellgeo {

inline constexpr double pole_guard = 1e-6;
inline constexpr double j_floor = 1e-7;
inline constexpr double glue_eps = 1e-6;

enum class Side { j_pos, j_neg };

struct ActionFrame {
    double h = 0.0, j = 0.0, g = 0.0;
    Eigen::Vector3d I = Eigen::Vector3d::Zero();       // (I1, I2, I3), I1 = j
    Eigen::Matrix3d dI = Eigen::Matrix3d::Zero();      // rows I1..I3, columns d/dj, d/dg, d/dh
    Side side = Side::j_pos;
};

namespace detail {

// One band of the natural actions, I = (2/pi) int p dz.  On either band
// p dz = F dmu with dmu the Chebyshev measure and
//   F = (e - z)/(P - z) psi(z),  P = alpha_1, e = the root next to alpha_1,
// so the simple pole of the curve at alpha_1 sits just outside the band.
// Writing (e - z)/(P - z) = 1 - (P - e)/(P - z) and subtracting psi(P)
// leaves smooth integrands plus the exact moment int dmu/(P - z).  The same
// subtraction handles the 1/(P - z) factor of dF/dj.
struct BandIntegrals {
    double J = 0.0, dj = 0.0, dg = 0.0, dh = 0.0;
    bool converged = true;
};

inline BandIntegrals lower_band(const EllipsoidSpec& s, const QTildeCubic& q) {
    double a0 = s.alpha(0), a1 = s.alpha(1), a3 = s.alpha(3);
    double h = q.h, j = q.j, K = q.K, L = q.L;
    double w = std::max(0.0, q.r1 - a0);
    double off1 = q.off1, off2 = q.off2;
    auto psi_at = [&](double z, double u) { return std::sqrt(2.0 * h * z * (off2 + u) / (4.0 * (a3 - z))); };
    double psiP = psi_at(a1, 0.0);
    double GjP = (j == 0.0 || off2 == 0.0) ? 0.0 : j * psiP * (-K) / (2.0 * h * off2);
    auto f = [&](double sn, double cs) {
        double z = a0 + w * cs;
        double u = off1 + w * sn;  // alpha_1 - z
        double psi = psi_at(z, u);
        double r2z = off2 + u;
        Eigen::Matrix<double, 5, 1> v;
        v[0] = psi;
        v[1] = (psi - psiP) / u;
        v[2] = (j * psi * (L * u - K) / (2.0 * h * r2z) - GjP) / u;
        v[3] = K * psi / (4.0 * h * r2z);
        v[4] = psi * u / (2.0 * h * r2z);
        return v;
    };
    auto r = chebyshev_band<5>(f);
    // int dmu/(P - z) over [a0, r1] with P = a1 > r1
    double C = std::numbers::pi / std::sqrt((a1 - a0) * off1);
    BandIntegrals b;
    b.converged = r.converged;
    b.J = r.value[0] - off1 * (r.value[1] + psiP * C);
    if (off1 == 0.0) b.J = r.value[0];
    b.dj = r.value[2] + (GjP == 0.0 ? 0.0 : GjP * C);
    b.dg = r.value[3];
    b.dh = r.value[4];
    return b;
}

inline BandIntegrals upper_band(const EllipsoidSpec& s, const QTildeCubic& q) {
    double a0 = s.alpha(0), a1 = s.alpha(1), a3 = s.alpha(3);
    double h = q.h, j = q.j, K = q.K, L = q.L;
    double w = std::max(0.0, a3 - q.r2);
    double off1 = q.off1, off2 = q.off2;
    auto psi_at = [&](double z, double v) { return std::sqrt(2.0 * h * z * (off1 + v) / (4.0 * (z - a0))); };
    double psiP = psi_at(a1, 0.0);
    // dF/dj = G(z)/(P - z) with G = -j psi (L(a1 - z) - K)/(2h (z - r1))
    double GjP = (j == 0.0 || off1 == 0.0) ? 0.0 : -j * psiP * (-K) / (2.0 * h * off1);
    auto f = [&]([[maybe_unused]] double sn, double cs) {
        double z = q.r2 + w * cs;
        double v = off2 + w * cs;  // z - alpha_1 = -(P - z)
        double psi = psi_at(z, v);
        double zr1 = off1 + v;
        Eigen::Matrix<double, 5, 1> out;
        out[0] = psi;
        out[1] = -(psi - psiP) / v;
        out[2] = -(-j * psi * (-L * v - K) / (2.0 * h * zr1) - GjP) / v;
        out[3] = -K * psi / (4.0 * h * zr1);
        out[4] = psi * v / (2.0 * h * zr1);
        return out;
    };
    auto r = chebyshev_band<5>(f);
    // int dmu/(P - z) over [r2, a3] with P = a1 < r2
    double C = -std::numbers::pi / std::sqrt(off2 * (a3 - a1));
    BandIntegrals b;
    b.converged = r.converged;
    b.J = r.value[0] + off2 * (r.value[1] + psiP * C);
    if (off2 == 0.0) b.J = r.value[0];
    b.dj = r.value[2] + (GjP == 0.0 ? 0.0 : GjP * C);
    b.dg = r.value[3];
    b.dh = r.value[4];
    return b;
}

inline QTildeCubic checked_qtilde(const EllipsoidSpec& s, double h, double g, double j) {
    QTildeCubic q = qtilde(s, h, g, j);
    if (q.off1 < pole_guard && q.off2 < pole_guard)
        fail(ErrorCode::pole_collision, "both branch points are within pole_guard of alpha_1 (focus-focus value)");
    return q;
}

}  // namespace detail

inline ActionFrame action_frame(const EllipsoidSpec& s, double h, double g, double j) {
    s.require_equal_middle("natural actions");
    QTildeCubic q = detail::checked_qtilde(s, h, g, j);
    detail::BandIntegrals b2 = detail::lower_band(s, q);
    detail::BandIntegrals b3 = detail::upper_band(s, q);
    const double c = 2.0 / std::numbers::pi;
    ActionFrame fr;
    fr.h = h;
    fr.g = g;
    fr.j = j;
    fr.side = j < 0.0 ? Side::j_neg : Side::j_pos;
    fr.I = {j, std::max(0.0, c * b2.J), std::max(0.0, c * b3.J)};
    fr.dI.row(0) << 1.0, 0.0, 0.0;
    fr.dI.row(1) << c * b2.dj, c * b2.dg, c * b2.dh;
    fr.dI.row(2) << c * b3.dj, c * b3.dg, c * b3.dh;
    return fr;
}

inline double action_I2(const EllipsoidSpec& s, double h, double g, double j) { return action_frame(s, h, g, j).I[1]; }
inline double action_I3(const EllipsoidSpec& s, double h, double g, double j) { return action_frame(s, h, g, j).I[2]; }

inline std::pair<double, double> action_gradient(const EllipsoidSpec& s, double h, double g, double j) {
    ActionFrame fr = action_frame(s, h, g, j);
    return {fr.dI(1, 0), fr.dI(2, 0)};
}

// Residue of z/((z - alpha_1) w) at alpha_1 for w^2 = -A(z) Q~(z)/(z - alpha_1)^2,
// on the branch with w(alpha_1) = +i (a1 - a0)(a3 - a1)|j|.
inline std::complex<double> residue_at_pole(const EllipsoidSpec& s, double j) {
    s.require_equal_middle("residue at alpha_1");
    if (j == 0.0) fail(ErrorCode::zero_momentum, "the pole is absent at j = 0");
    double a0 = s.alpha(0), a1 = s.alpha(1), a3 = s.alpha(3);
    return {0.0, -a1 / ((a1 - a0) * (a3 - a1) * std::abs(j))};
}

// Lower and upper boundary parabolas g(j) of the image at energy h.
inline double g_lower(const EllipsoidSpec& s, double h, double j) {
    double a1 = s.alpha(1), a3 = s.alpha(3);
    return 2.0 * a1 * h / (a1 - a3) - a3 * j * j / (a1 * (a1 - a3));
}
inline double g_upper(const EllipsoidSpec& s, double h, double j) {
    double a0 = s.alpha(0), a1 = s.alpha(1);
    return 2.0 * a1 * h / (a1 - a0) - a0 * j * j / (a1 * (a1 - a0));
}

// Integer matrix taking the frame on side `from` to the frame on the other
// side at the j = 0 crossing with the given g: T D(to) = D(from).
inline TransitionMatrix crossing_transition(const EllipsoidSpec& s, double h, double g, Side from) {
    double sf = from == Side::j_pos ? 1.0 : -1.0;
    Eigen::Matrix3d Df = action_frame(s, h, g, sf * glue_eps).dI;
    Eigen::Matrix3d Dt = action_frame(s, h, g, -sf * glue_eps).dI;
    return TransitionMatrix::from_real(Df * Dt.inverse());
}

struct GlueMatrices {
    TransitionMatrix M1;  // crossing at g > 0
    TransitionMatrix M2;  // crossing at g < 0
};

// M_i D(j = -0) = D(j = +0).  Default g values sit well inside the upper and
// lower halves of the j = 0 segment of the image.
inline GlueMatrices glue_matrices(const EllipsoidSpec& s, double h, std::optional<double> g_pos = {},
                                  std::optional<double> g_neg = {}) {
    s.require_equal_middle("gluing matrices");
    if (!(h > 0)) fail(ErrorCode::domain_error, "h must be positive");
    double gp = g_pos.value_or(0.25 * g_upper(s, h, 0.0));
    double gn = g_neg.value_or(0.5 * g_lower(s, h, 0.0));
    if (!(gp > 0) || !(gn < 0)) fail(ErrorCode::domain_error, "gluing needs g_pos > 0 > g_neg");
    return {crossing_transition(s, h, gp, Side::j_pos), crossing_transition(s, h, gn, Side::j_pos)};
}

struct LoopCrossing {
    double theta;
    double g;
    Side from;
    TransitionMatrix T;
};

struct MonodromyResult {
    double h = 0.0;
    double center_j = 0.0, center_g = 0.0, radius_j = 0.0, radius_g = 0.0;
    int n_steps = 0;
    std::vector<std::pair<double, double>> loop;  // (j, g)
    std::vector<LoopCrossing> crossings;
    bool encloses_singularity = false;
    TransitionMatrix M1, M2, H, M, N, T;
};

// Holonomy of the action lattice around the ellipse
// (j, g) = center + (rj cos theta, rg sin theta), counterclockwise.  Inside
// each half-plane j != 0 the frame is smooth; at each j = 0 crossing the
// continued actions pick up the integer transition between the two one-sided
// frames, so the continued vector after one turn is H I with H the ordered
// product.  M = S H S with S = diag(-1, 1, 1), the convention in which
// M = (M2 S)^{-1} (M1 S).
inline MonodromyResult monodromy(const EllipsoidSpec& s, double h, double rj, double rg, int n_steps = 64,
                                 double cj = 0.0, double cg = 0.0) {
    s.require_equal_middle("monodromy");
    if (!(h > 0) || !(rj > 0) || !(rg > 0)) fail(ErrorCode::domain_error, "h and loop radii must be positive");
    if (n_steps < 32) fail(ErrorCode::domain_error, "n_steps must be at least 32");
    MonodromyResult res;
    res.h = h;
    res.center_j = cj;
    res.center_g = cg;
    res.radius_j = rj;
    res.radius_g = rg;

    auto point = [&](double th) { return std::pair<double, double>{cj + rj * std::cos(th), cg + rg * std::sin(th)}; };
    auto frame_at = [&](double th) {
        auto [j, g] = point(th);
        QTildeCubic q;
        try {
            q = qtilde(s, h, g, j);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::outside_image)
                fail(ErrorCode::loop_outside_image, "loop leaves the energy-momentum image");
            throw;
        }
        if (q.r1 <= s.alpha(0) || q.r2 >= s.alpha(3))
            fail(ErrorCode::loop_outside_image, "loop touches the boundary of the image");
        return action_frame(s, h, g, j);
    };

    int n = n_steps;
    std::vector<ActionFrame> frames;
    std::vector<double> thetas;
    for (;;) {
        thetas.clear();
        frames.clear();
        // half-step offset keeps samples off the axis crossings of a centered loop
        for (int k = 0; k < n; ++k) thetas.push_back(2.0 * std::numbers::pi * (k + 0.5) / n);
        for (double th : thetas) frames.push_back(frame_at(th));
        double worst = 0.0;
        for (int k = 0; k < n; ++k) {
            const ActionFrame& a = frames[k];
            const ActionFrame& b = frames[(k + 1) % n];
            if (a.side == b.side) worst = std::max(worst, (b.dI - a.dI).cwiseAbs().maxCoeff());
        }
        if (worst < 0.25) break;
        if (n >= 4096) fail(ErrorCode::non_integer_transition, "frame continuation step control did not settle");
        n *= 2;
    }
    res.n_steps = n;
    for (double th : thetas) res.loop.push_back(point(th));

    TransitionMatrix H;
    bool seen_pos = false, seen_neg = false;
    for (int k = 0; k < n; ++k) {
        const ActionFrame& a = frames[k];
        const ActionFrame& b = frames[(k + 1) % n];
        if (a.side == b.side) continue;
        double lo = thetas[k], hi = (k + 1 < n) ? thetas[k + 1] : thetas[0] + 2.0 * std::numbers::pi;
        double jlo = point(lo).first;
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi);
            double jm = point(mid).first;
            if ((jm < 0.0) == (jlo < 0.0)) {
                lo = mid;
                jlo = jm;
            } else {
                hi = mid;
            }
        }
        double thc = 0.5 * (lo + hi);
        double gc = point(thc).second;
        TransitionMatrix T = crossing_transition(s, h, gc, a.side);
        H = H * T;
        res.crossings.push_back({thc, gc, a.side, T});
        // record the + to - orientation of each crossing
        TransitionMatrix plus_to_minus = a.side == Side::j_pos ? T : T.inverse();
        if (gc > 0) {
            res.M1 = plus_to_minus;
            seen_pos = true;
        } else {
            res.M2 = plus_to_minus;
            seen_neg = true;
        }
    }
    res.encloses_singularity = seen_pos && seen_neg;
    res.H = H;
    TransitionMatrix S = reflection_S();
    res.M = S * H * S;
    NormalForm nf = normal_form(res.M);
    res.N = nf.N;
    res.T = nf.T;
    return res;
}

}  // namespace ellgeo
