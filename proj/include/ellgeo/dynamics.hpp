#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include "core.hpp"

namespace ellgeo {

inline PhasePoint project_to_leaf(const EllipsoidSpec& s, const Vec4& x, const Vec4& y) {
    if (std::abs(casimirs(s, x, y).c1) > 1e-3) fail(ErrorCode::off_leaf, "|C1| > 1e-3, too far from the ellipsoid");
    Vec4 xp = x, yp = y;
    if (!detail::restore_leaf(s, xp, yp)) fail(ErrorCode::projection_failed, "Newton projection did not converge");
    return PhasePoint(s, xp, yp);
}

struct TrajectorySample {
    double t;
    PhasePoint p;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    EllipsoidSpec spec;
    double dt;
    std::string scheme_id;
};

namespace detail {

using wide = long double;
using WVec4 = Eigen::Matrix<wide, 4, 1>;

inline void wide_field(const WVec4& a, const WVec4& x, const WVec4& y, WVec4& dx, WVec4& dy) {
    WVec4 ax = x.array() / a.array();
    wide D = ax.squaredNorm();
    if (D <= wide(D_min)) fail(ErrorCode::degenerate_point, "D(x) vanishes");
    wide lambda = (y.array().square() / a.array()).sum() / D;
    dx = y;
    dy = -lambda * ax;
}

inline void rk4_step(const WVec4& a, WVec4& x, WVec4& y, wide h) {
    WVec4 k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y;
    wide_field(a, x, y, k1x, k1y);
    wide_field(a, x + h / 2 * k1x, y + h / 2 * k1y, k2x, k2y);
    wide_field(a, x + h / 2 * k2x, y + h / 2 * k2y, k3x, k3y);
    wide_field(a, x + h * k3x, y + h * k3y, k4x, k4y);
    x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
    y += h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
}

}  // namespace detail

// Classical RK4 on the Newton form of the constrained equations, with the
// state restored to the leaf after every step.  The state is carried in long
// double; at dt = 1e-3 the RK4 error in the integrals is already near 1e-13,
// so a double state would hit its rounding floor and hide the fourth order.
// The last step is shortened so the trajectory ends exactly at t_end.  Every
// `stride`-th step is recorded.
inline Trajectory integrate(const EllipsoidSpec& s, const PhasePoint& p0, double t_end, double dt, int stride = 1) {
    if (!(dt > 0)) fail(ErrorCode::domain_error, "dt must be positive");
    if (!(t_end >= 0)) fail(ErrorCode::domain_error, "t_end must be nonnegative");
    if (stride < 1) fail(ErrorCode::domain_error, "stride must be at least 1");
    Trajectory tr{{}, s, dt, "rk4+leaf_projection"};
    long long nsteps = static_cast<long long>(std::ceil(t_end / dt - 1e-9));
    tr.samples.reserve(static_cast<size_t>(nsteps / stride + 2));
    tr.samples.push_back({0.0, p0});
    const detail::WVec4 a = s.alphas().cast<detail::wide>();
    detail::WVec4 x = p0.x().cast<detail::wide>(), y = p0.y().cast<detail::wide>();
    for (long long k = 1; k <= nsteps; ++k) {
        detail::wide t0 = static_cast<detail::wide>(k - 1) * dt;
        detail::wide t1 = k == nsteps ? static_cast<detail::wide>(t_end) : static_cast<detail::wide>(k) * dt;
        detail::rk4_step(a, x, y, t1 - t0);
        if (!detail::restore_leaf_t<detail::wide>(a, x, y))
            fail(ErrorCode::projection_failed, "leaf projection failed at t = " + std::to_string(double(t1)));
        if (k % stride == 0 || k == nsteps) {
            Vec4 xd = x.cast<double>(), yd = y.cast<double>();
            tr.samples.push_back({double(t1), PhasePoint(s, xd, yd)});
        }
    }
    return tr;
}

// Poincare section x_3 = 0 of the reduced flow at j = 0, written on the
// ellipse (sqrt(a0) cos phi, sqrt(a1) sin phi) with conjugate momentum p_phi.
inline double section_identity(const EllipsoidSpec& s, double h, double g, double phi, double p) {
    double a0 = s.alpha(0), a1 = s.alpha(1), a3 = s.alpha(3);
    double sn = std::sin(phi), cs = std::cos(phi);
    double d = a0 * sn * sn + a1 * cs * cs;
    double kappa = (a1 + a0) / (a1 - a0);
    double c = (d * sn * sn / (a3 - a1) + 0.5 * (kappa + std::cos(2.0 * phi))) / (d * d);
    return 2.0 * h * sn * sn / (a3 - a1) + g / a1 - p * p * c;
}

namespace detail {

struct SectionJet {
    double r, r_phi, r_p, r_pphi, r_pp;
};

inline SectionJet section_jet(const EllipsoidSpec& s, double h, double g, double phi, double p) {
    double a0 = s.alpha(0), a1 = s.alpha(1), a3 = s.alpha(3);
    double sn = std::sin(phi), cs = std::cos(phi), s2 = std::sin(2.0 * phi);
    double d = a0 * sn * sn + a1 * cs * cs;
    double dd = (a0 - a1) * s2;
    double kappa = (a1 + a0) / (a1 - a0);
    double N = d * sn * sn / (a3 - a1) + 0.5 * (kappa + std::cos(2.0 * phi));
    double dN = (dd * sn * sn + d * s2) / (a3 - a1) - s2;
    double c = N / (d * d);
    double dc = dN / (d * d) - 2.0 * N * dd / (d * d * d);
    double a = 2.0 * h * sn * sn / (a3 - a1) + g / a1;
    double da = 2.0 * h * s2 / (a3 - a1);
    return {a - p * p * c, da - p * p * dc, -2.0 * p * c, -2.0 * p * dc, -2.0 * c};
}

inline double wrap_angle(double d) {
    const double tau = 2.0 * std::numbers::pi;
    d = std::fmod(d, tau);
    if (d > std::numbers::pi) d -= tau;
    if (d < -std::numbers::pi) d += tau;
    return d;
}

inline double mod_tau(double phi) {
    const double tau = 2.0 * std::numbers::pi;
    phi = std::fmod(phi, tau);
    return phi < 0 ? phi + tau : phi;
}

}  // namespace detail

struct SectionPoint {
    int branch;
    double phi;
    double p_phi;
};

struct SectionCurve {
    double h = 0.0, g = 0.0;
    std::vector<SectionPoint> points;
    std::vector<std::array<double, 2>> crossings;  // self-intersections (phi, p_phi)
    std::vector<int> winding;                      // per branch
    int branch_count() const { return static_cast<int>(winding.size()); }
};

// Zero level of section_identity on the cylinder [0, 2pi) x [-P, P].
// Marching squares gives the topology; self-intersections come from 2-d
// Newton on (r, dr/dp) and are confirmed as critical points of r; contour
// points near a crossing are discarded and the arcs reconnected through it
// by pairing opposite ends.
inline SectionCurve section_contour(const EllipsoidSpec& s, double h, double g, int n) {
    s.require_equal_middle("section");
    if (n < 64) fail(ErrorCode::domain_error, "section grid needs n >= 64");
    const double tau = 2.0 * std::numbers::pi;
    SectionCurve out;
    out.h = h;
    out.g = g;

    double pmax2 = 0.0;
    for (int k = 0; k < 8 * n; ++k) {
        double phi = tau * k / (8 * n);
        detail::SectionJet jt = detail::section_jet(s, h, g, phi, 1.0);
        double a = jt.r - 0.5 * jt.r_pp;  // r at p = 0
        double c = -0.5 * jt.r_pp;
        if (c > 0) pmax2 = std::max(pmax2, a / c);
    }
    if (!(pmax2 > 0)) fail(ErrorCode::contour_failed, "the zero level of the section identity is empty");
    const double P = 1.25 * std::sqrt(pmax2);
    const double dphi = tau / n, dp = 2.0 * P / n;
    auto phi_of = [&](int k) { return (k + 0.5) * dphi; };
    auto p_of = [&](int m) { return -P + (m + 0.5) * dp; };
    std::vector<double> val(static_cast<size_t>(n) * n);
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) val[m * n + k] = section_identity(s, h, g, phi_of(k), p_of(m));
    auto V = [&](int k, int m) { return val[m * n + ((k % n + n) % n)]; };

    // edge points: horizontal edge (k,m)-(k+1,m) has id 2(mn+k), vertical (k,m)-(k,m+1) id 2(mn+k)+1
    struct Node {
        double phi, p;
        std::vector<int> nb;
    };
    std::vector<Node> nodes;
    std::unordered_map<long long, int> by_edge;
    auto edge_point = [&](int k, int m, bool vertical) {
        k = (k % n + n) % n;
        long long id = 2LL * (static_cast<long long>(m) * n + k) + (vertical ? 1 : 0);
        auto it = by_edge.find(id);
        if (it != by_edge.end()) return it->second;
        double v0 = V(k, m), v1 = vertical ? V(k, m + 1) : V(k + 1, m);
        double t = v0 / (v0 - v1);
        Node nd;
        nd.phi = vertical ? phi_of(k) : phi_of(k) + t * dphi;
        nd.p = vertical ? p_of(m) + t * dp : p_of(m);
        nd.phi = detail::mod_tau(nd.phi);
        nodes.push_back(nd);
        by_edge.emplace(id, static_cast<int>(nodes.size()) - 1);
        return static_cast<int>(nodes.size()) - 1;
    };
    auto link = [&](int a, int b) {
        nodes[a].nb.push_back(b);
        nodes[b].nb.push_back(a);
    };
    for (int m = 0; m + 1 < n; ++m)
        for (int k = 0; k < n; ++k) {
            double v00 = V(k, m), v10 = V(k + 1, m), v11 = V(k + 1, m + 1), v01 = V(k, m + 1);
            bool b00 = v00 >= 0, b10 = v10 >= 0, b11 = v11 >= 0, b01 = v01 >= 0;
            std::vector<int> e;  // bottom, right, top, left when crossed
            int bottom = -1, right = -1, top = -1, left = -1;
            if (b00 != b10) bottom = edge_point(k, m, false);
            if (b10 != b11) right = edge_point(k + 1, m, true);
            if (b01 != b11) top = edge_point(k, m + 1, false);
            if (b00 != b01) left = edge_point(k, m, true);
            int cnt = (bottom >= 0) + (right >= 0) + (top >= 0) + (left >= 0);
            if (cnt == 2) {
                int ends[2], q = 0;
                for (int id : {bottom, right, top, left})
                    if (id >= 0) ends[q++] = id;
                link(ends[0], ends[1]);
            } else if (cnt == 4) {
                bool bc = 0.25 * (v00 + v10 + v11 + v01) >= 0;
                if (bc == b00) {
                    link(bottom, right);
                    link(top, left);
                } else {
                    link(bottom, left);
                    link(top, right);
                }
            }
        }

    // self-intersections
    auto scaled = [&](double dph, double dpp) {
        return std::hypot(detail::wrap_angle(dph) / dphi, dpp / dp);
    };
    double rscale = 2.0 * h / (s.alpha(3) - s.alpha(1)) + std::abs(g) / s.alpha(1);
    for (int m = 0; m + 1 < n; ++m)
        for (int k = 0; k < n; ++k) {
            double pa = p_of(m), pb = p_of(m + 1);
            double ph = phi_of(k) + 0.5 * dphi;
            double rp_a = detail::section_jet(s, h, g, ph, pa).r_p, rp_b = detail::section_jet(s, h, g, ph, pb).r_p;
            if ((rp_a > 0) == (rp_b > 0)) continue;
            double x = ph, y = 0.5 * (pa + pb);
            bool ok = false;
            for (int it = 0; it < 200; ++it) {
                detail::SectionJet jt = detail::section_jet(s, h, g, x, y);
                double det = jt.r_phi * jt.r_pp - jt.r_p * jt.r_pphi;
                if (det == 0.0) break;
                double sx = (jt.r * jt.r_pp - jt.r_p * jt.r_p) / det;
                double sy = (jt.r_phi * jt.r_p - jt.r_pphi * jt.r) / det;
                x -= sx;
                y -= sy;
                if (std::abs(sx) + std::abs(sy) <= 1e-15) {
                    ok = true;
                    break;
                }
            }
            if (!ok) continue;
            detail::SectionJet jt = detail::section_jet(s, h, g, x, y);
            if (std::abs(jt.r) > 1e-12 * rscale || std::abs(jt.r_phi) > 1e-6 * rscale) continue;
            x = detail::mod_tau(x);
            if (x > tau - 1e-12) x = 0.0;
            bool dup = false;
            for (const auto& c : out.crossings)
                if (std::abs(detail::wrap_angle(c[0] - x)) < 1e-6 && std::abs(c[1] - y) < 1e-6) dup = true;
            if (!dup) out.crossings.push_back({x, y});
        }

    // discard contour nodes next to crossings, then split into arcs
    const double R = 2.5;
    std::vector<char> keep(nodes.size(), 1);
    for (size_t i = 0; i < nodes.size(); ++i)
        for (const auto& c : out.crossings)
            if (scaled(nodes[i].phi - c[0], nodes[i].p - c[1]) < R) keep[i] = 0;

    std::vector<std::vector<int>> arcs;
    std::vector<char> closed;
    std::vector<char> seen(nodes.size(), 0);
    auto walk = [&](int start) {
        std::vector<int> arc{start};
        seen[start] = 1;
        int prev = -1, cur = start;
        for (;;) {
            int next = -1;
            for (int nb : nodes[cur].nb)
                if (nb != prev && keep[nb] && !seen[nb]) {
                    next = nb;
                    break;
                }
            if (next < 0) break;
            seen[next] = 1;
            arc.push_back(next);
            prev = cur;
            cur = next;
        }
        return arc;
    };
    for (size_t i = 0; i < nodes.size(); ++i) {
        if (!keep[i] || seen[i]) continue;
        int deg = 0;
        for (int nb : nodes[i].nb) deg += keep[nb];
        if (deg < 2) {
            arcs.push_back(walk(static_cast<int>(i)));
            closed.push_back(0);
        }
    }
    for (size_t i = 0; i < nodes.size(); ++i) {
        if (!keep[i] || seen[i]) continue;
        arcs.push_back(walk(static_cast<int>(i)));
        closed.push_back(1);
    }

    // polish along the gradient direction
    for (auto& nd : nodes) {
        for (int it = 0; it < 30; ++it) {
            detail::SectionJet jt = detail::section_jet(s, h, g, nd.phi, nd.p);
            if (std::abs(jt.r) <= 1e-14 * rscale) break;
            double g2 = jt.r_phi * jt.r_phi + jt.r_p * jt.r_p;
            if (g2 == 0.0) break;
            nd.phi -= jt.r * jt.r_phi / g2;
            nd.p -= jt.r * jt.r_p / g2;
        }
        nd.phi = detail::mod_tau(nd.phi);
    }

    // attach open arc ends to crossings and pair opposite ends
    struct End {
        int arc;
        bool at_tail;
        int crossing;
        double dx, dy;
    };
    std::vector<End> ends;
    for (size_t a = 0; a < arcs.size(); ++a) {
        if (closed[a]) continue;
        for (bool tail : {false, true}) {
            const Node& nd = nodes[tail ? arcs[a].back() : arcs[a].front()];
            int best = -1;
            double bd = R + 3.0;
            for (size_t c = 0; c < out.crossings.size(); ++c) {
                double d = scaled(nd.phi - out.crossings[c][0], nd.p - out.crossings[c][1]);
                if (d < bd) {
                    bd = d;
                    best = static_cast<int>(c);
                }
            }
            if (best < 0) fail(ErrorCode::contour_failed, "contour arc ends away from any crossing");
            double dx = detail::wrap_angle(nd.phi - out.crossings[best][0]) / dphi;
            double dy = (nd.p - out.crossings[best][1]) / dp;
            double nrm = std::hypot(dx, dy);
            ends.push_back({static_cast<int>(a), tail, best, dx / nrm, dy / nrm});
        }
    }
    std::vector<int> partner(ends.size(), -1);
    for (size_t c = 0; c < out.crossings.size(); ++c) {
        std::vector<int> here;
        for (size_t e = 0; e < ends.size(); ++e)
            if (ends[e].crossing == static_cast<int>(c)) here.push_back(static_cast<int>(e));
        if (here.size() % 2 != 0) fail(ErrorCode::contour_failed, "odd number of arcs meet at a crossing");
        while (!here.empty()) {
            double best = 2.0;
            size_t bi = 0, bj = 1;
            for (size_t i = 0; i < here.size(); ++i)
                for (size_t j = i + 1; j < here.size(); ++j) {
                    double dot = ends[here[i]].dx * ends[here[j]].dx + ends[here[i]].dy * ends[here[j]].dy;
                    if (dot < best) {
                        best = dot;
                        bi = i;
                        bj = j;
                    }
                }
            partner[here[bi]] = here[bj];
            partner[here[bj]] = here[bi];
            here.erase(here.begin() + static_cast<long>(bj));
            here.erase(here.begin() + static_cast<long>(bi));
        }
    }
    auto end_index = [&](int arc, bool tail) {
        for (size_t e = 0; e < ends.size(); ++e)
            if (ends[e].arc == arc && ends[e].at_tail == tail) return static_cast<int>(e);
        return -1;
    };

    // assemble branches and their winding numbers
    std::vector<char> used(arcs.size(), 0);
    for (size_t a0 = 0; a0 < arcs.size(); ++a0) {
        if (used[a0]) continue;
        int branch = out.branch_count();
        std::vector<std::array<double, 2>> pts;
        int a = static_cast<int>(a0);
        bool forward = true;
        for (;;) {
            used[a] = 1;
            const auto& arc = arcs[a];
            if (forward)
                for (int id : arc) pts.push_back({nodes[id].phi, nodes[id].p});
            else
                for (auto it = arc.rbegin(); it != arc.rend(); ++it) pts.push_back({nodes[*it].phi, nodes[*it].p});
            if (closed[a]) break;
            int e = end_index(a, forward);
            int pe = partner[e];
            if (pe < 0) fail(ErrorCode::contour_failed, "unpaired arc end at a crossing");
            const auto& c = out.crossings[ends[e].crossing];
            pts.push_back(c);
            a = ends[pe].arc;
            forward = !ends[pe].at_tail;
            if (a == static_cast<int>(a0)) {
                if (!forward) fail(ErrorCode::contour_failed, "branch closes with reversed orientation");
                break;
            }
            if (used[a]) fail(ErrorCode::contour_failed, "branch revisits an arc");
        }
        double turn = 0.0;
        for (size_t i = 0; i < pts.size(); ++i) {
            const auto& p0 = pts[i];
            const auto& p1 = pts[(i + 1) % pts.size()];
            turn += detail::wrap_angle(p1[0] - p0[0]);
        }
        // orient each branch towards increasing phi
        if (turn < 0) {
            std::reverse(pts.begin(), pts.end());
            turn = -turn;
        }
        out.winding.push_back(static_cast<int>(std::lround(turn / tau)));
        for (const auto& p : pts) out.points.push_back({branch, p[0], p[1]});
    }
    return out;
}

inline SectionCurve separatrix_section(const EllipsoidSpec& s, double h, int n) { return section_contour(s, h, 0.0, n); }

}  // namespace ellgeo
