#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include <ellgeo/bifurcation.hpp>

#include "oracles.hpp"

using namespace ellgeo;

namespace {

const EllipsoidSpec generic_spec({1.0 / 3.0, 1.0, 3.0, 4.0});
const EllipsoidSpec middle_spec({1.0, 2.0, 2.0, 4.0});

template <class F>
void expect_code(ErrorCode code, F&& f) {
    try {
        f();
        ADD_FAILURE() << "expected " << to_string(code);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

PointType expected_pair_type(int i, int j) {
    if (i == 1 && j == 2) return PointType::hyperbolic_hyperbolic;
    if ((i == 0 && j == 2) || (i == 1 && j == 3)) return PointType::elliptic_hyperbolic;
    return PointType::elliptic_elliptic;
}

// Point moving on the ellipse of the (k, l) coordinate plane with |y|^2 = 2h.
std::pair<Vec4, Vec4> plane_orbit_point(const EllipsoidSpec& s, int k, int l, double phi, double h) {
    Vec4 x = Vec4::Zero(), t = Vec4::Zero();
    x[k] = std::sqrt(s.alpha(k)) * std::cos(phi);
    x[l] = std::sqrt(s.alpha(l)) * std::sin(phi);
    t[k] = -std::sqrt(s.alpha(k)) * std::sin(phi);
    t[l] = std::sqrt(s.alpha(l)) * std::cos(phi);
    return {x, std::sqrt(2.0 * h) * t / t.norm()};
}

// Random leaf point with x_i = y_i = 0.
PhasePoint subflow_point(const EllipsoidSpec& s, int i, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Vec4 x, y;
    for (int k = 0; k < 4; ++k) {
        x[k] = n(rng);
        y[k] = n(rng);
    }
    x[i] = y[i] = 0.0;
    x /= std::sqrt((x.array().square() / s.alphas().array()).sum());
    Vec4 m = x.array() / s.alphas().array();
    y -= (y.dot(m) / m.squaredNorm()) * m;
    return PhasePoint(s, x, y);
}

int count_distinct_lines(const BifurcationDiagram& d) {
    std::set<double> lines;
    for (const auto& c : d.curves)
        if (c.kind == CurveKind::subflow_line) lines.insert(c.coefficients[1]);
    return static_cast<int>(lines.size());
}

}  // namespace

TEST(GenericDiagram, Counts) {
    BifurcationDiagram d = generic_diagram(generic_spec, 0.5);
    EXPECT_EQ(count_distinct_lines(d), 4);
    int arcs = 0, corank2 = 0, tangency = 0;
    for (const auto& c : d.curves) arcs += c.kind == CurveKind::double_root_curve;
    for (const auto& p : d.points) {
        corank2 += p.corank == 2;
        tangency += p.type == PointType::degenerate;
    }
    EXPECT_EQ(arcs, 1);
    EXPECT_EQ(corank2, 6);
    EXPECT_EQ(tangency, 2);
    for (const auto& c : d.curves) EXPECT_EQ(c.polyline.size(), 512u);
}

TEST(GenericDiagram, Corank2LocationsAndTypes) {
    BifurcationDiagram d = generic_diagram(generic_spec, 0.5);
    const CriticalPointRecord& p01 = d.points.front();
    EXPECT_EQ(p01.label, "F_0 = F_1 = 0");
    EXPECT_DOUBLE_EQ(p01.location.u, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(p01.location.v, -4.0 / 3.0);
    for (const auto& p : d.points) {
        if (p.corank != 2) continue;
        EXPECT_EQ(type_from_eigenvalues(p.eigenvalues), p.type) << p.label;
        int i = p.label[2] - '0', j = p.label[8] - '0';
        for (const auto& c : d.curves)
            if (c.kind == CurveKind::subflow_line &&
                (c.coefficients[1] == generic_spec.alpha(i) || c.coefficients[1] == generic_spec.alpha(j))) {
                EXPECT_LE(std::abs(c.residual(p.location.u, p.location.v)), 1e-12) << p.label << " / " << c.label;
            }
    }
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) EXPECT_EQ(corank2_eigenvalues(generic_spec, 0.5, i, j).type, expected_pair_type(i, j));
    Corank2Eigenvalues e12 = corank2_eigenvalues(generic_spec, 0.5, 1, 2);
    EXPECT_NEAR(std::norm(e12.lambda_i), 2.0, 1e-14);
    EXPECT_EQ(e12.lambda_i.imag(), 0.0);
}

TEST(GenericDiagram, TangencyPointsOnLineAndArc) {
    BifurcationDiagram d = generic_diagram(generic_spec, 0.5);
    std::vector<std::pair<double, double>> found;
    for (const auto& p : d.points) {
        if (p.type != PointType::degenerate) continue;
        found.emplace_back(p.location.u, p.location.v);
        int axis = p.location.u == 1.0 ? 1 : 2;
        for (const auto& c : d.curves) {
            bool on_line = c.kind == CurveKind::subflow_line && c.coefficients[1] == generic_spec.alpha(axis);
            if (on_line || c.kind == CurveKind::double_root_curve) {
                EXPECT_LE(std::abs(c.residual(p.location.u, p.location.v)), 1e-12) << c.label;
            }
        }
    }
    ASSERT_EQ(found.size(), 2u);
    EXPECT_EQ(found[0], std::make_pair(1.0, -2.0));
    EXPECT_EQ(found[1], std::make_pair(9.0, -6.0));
}

TEST(GenericDiagram, Corank2EigenvaluesMatchFiniteDifferenceJacobian) {
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            int kl[2], n = 0;
            for (int m = 0; m < 4; ++m)
                if (m != i && m != j) kl[n++] = m;
            Corank2Eigenvalues c = corank2_eigenvalues(generic_spec, 0.5, i, j);
            for (double phi : {0.3, 1.1, 2.5}) {
                auto [x, y] = plane_orbit_point(generic_spec, kl[0], kl[1], phi, 0.5);
                for (int a : {i, j}) {
                    auto q = detail::uhlenbeck_form(generic_spec, a);
                    Mat8 J = oracle::flow_jacobian(generic_spec, x, y,
                                                   [&](const Vec4& u, const Vec4& v) { return Vec8(q.gradient(u, v)); });
                    Eigen::VectorXcd ev = oracle::eigenvalues(J);
                    std::complex<double> l = a == i ? c.lambda_i : c.lambda_j;
                    EXPECT_LE(oracle::nearest(ev, l), 1e-8);
                    EXPECT_LE(oracle::nearest(ev, -l), 1e-8);
                    CriticalPointRecord r = classify_corank1(generic_spec, a, PhasePoint(generic_spec, x, y));
                    EXPECT_NEAR(std::abs(r.eigenvalues[0] - l), 0.0, 1e-12);
                }
            }
        }
}

TEST(GenericDiagram, CriticalValuesInImage) {
    BifurcationDiagram d = generic_diagram(generic_spec, 0.5);
    for (const auto& c : d.curves)
        for (const auto& p : c.polyline) EXPECT_TRUE(in_generic_image(generic_spec, 0.5, p.c1, p.c2)) << c.label;
    for (const auto& p : d.points) EXPECT_TRUE(in_generic_image(generic_spec, 0.5, p.location.u, p.location.v)) << p.label;
    EXPECT_FALSE(in_generic_image(generic_spec, 0.5, 20.0, -2.0));  // complex roots
    EXPECT_FALSE(in_generic_image(generic_spec, 0.5, 0.0, 0.0));    // root at 0 < alpha_0
    EXPECT_TRUE(in_generic_image(generic_spec, 0.5, 4.0, -4.5));    // roots 1.5, 3
}

TEST(GenericDiagram, Homogeneity) {
    BifurcationDiagram ref = generic_diagram(generic_spec, 0.5);
    for (double c : {0.5, 1.0, 2.0}) {
        BifurcationDiagram d = generic_diagram(generic_spec, 0.5 * c * c);
        ASSERT_EQ(d.points.size(), ref.points.size());
        for (size_t k = 0; k < d.points.size(); ++k) {
            EXPECT_EQ(d.points[k].type, ref.points[k].type);
            EXPECT_NEAR(d.points[k].location.u, c * c * ref.points[k].location.u, 1e-12);
            EXPECT_NEAR(d.points[k].location.v, c * c * ref.points[k].location.v, 1e-12);
        }
        for (size_t k = 0; k < d.curves.size(); ++k) EXPECT_EQ(d.curves[k].type, ref.curves[k].type);
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                EXPECT_EQ(corank2_eigenvalues(generic_spec, 0.5 * c * c, i, j).type, expected_pair_type(i, j));
    }
}

TEST(GenericDiagram, NearDegenerateKeepsTopology) {
    EllipsoidSpec s({0.25, 0.25003, 1.0, 2.0});
    BifurcationDiagram d = generic_diagram(s, 0.5);
    EXPECT_EQ(count_distinct_lines(d), 4);
    int corank2 = 0, tangency = 0;
    for (const auto& p : d.points) {
        corank2 += p.corank == 2;
        tangency += p.type == PointType::degenerate;
    }
    EXPECT_EQ(corank2, 6);
    EXPECT_EQ(tangency, 2);
}

TEST(GenericDiagram, Errors) {
    expect_code(ErrorCode::degenerate_axes, [] { generic_diagram(middle_spec, 0.5); });
    expect_code(ErrorCode::domain_error, [] { generic_diagram(generic_spec, 0.0); });
    expect_code(ErrorCode::domain_error, [] { corank2_eigenvalues(generic_spec, 0.5, 2, 1); });
}

TEST(SymmetricDiagram, ParabolasCornersAndFocusFocus) {
    BifurcationDiagram d = symmetric_diagram(middle_spec, 0.5);
    ASSERT_EQ(d.curves.size(), 2u);
    const CriticalCurve& lower = d.curves[0];
    const CriticalCurve& upper = d.curves[1];
    EXPECT_DOUBLE_EQ(lower.coefficients[0], -1.0);
    EXPECT_DOUBLE_EQ(lower.coefficients[1], 1.0);
    EXPECT_DOUBLE_EQ(upper.coefficients[0], 2.0);
    EXPECT_DOUBLE_EQ(upper.coefficients[1], -0.5);
    EXPECT_DOUBLE_EQ(lower.param_max, std::sqrt(2.0));

    int corners = 0, ff = 0;
    for (const auto& p : d.points) {
        if (p.type == PointType::elliptic_elliptic) {
            ++corners;
            EXPECT_NEAR(std::abs(p.location.u), std::sqrt(2.0), 1e-15);
            EXPECT_NEAR(p.location.v, 1.0, 1e-15);
            EXPECT_LE(std::abs(lower.residual(p.location.u, p.location.v)), 1e-14);
            EXPECT_LE(std::abs(upper.residual(p.location.u, p.location.v)), 1e-14);
        }
        if (p.type == PointType::focus_focus) {
            ++ff;
            EXPECT_EQ(p.location.u, 0.0);
            EXPECT_EQ(p.location.v, 0.0);
            double lo = lower.coefficients[0], hi = upper.coefficients[0];
            EXPECT_LT(lo, p.location.v);
            EXPECT_LT(p.location.v, hi);
        }
        EXPECT_EQ(type_from_eigenvalues(p.eigenvalues), p.type) << p.label;
    }
    EXPECT_EQ(corners, 2);
    EXPECT_EQ(ff, 1);
    for (int k = 0; k <= 20; ++k) {
        double j = -std::sqrt(2.0) + k * std::sqrt(2.0) / 10.0;
        EXPECT_GE(upper.coefficients[0] + upper.coefficients[1] * j * j + 1e-12,
                  lower.coefficients[0] + lower.coefficients[1] * j * j);
    }
    expect_code(ErrorCode::wrong_symmetry, [] { symmetric_diagram(generic_spec, 0.5); });
}

TEST(SymmetricDiagram, Homogeneity) {
    BifurcationDiagram ref = symmetric_diagram(middle_spec, 0.5);
    for (double c : {0.5, 1.0, 2.0}) {
        BifurcationDiagram d = symmetric_diagram(middle_spec, 0.5 * c * c);
        for (size_t k = 0; k < d.points.size(); ++k) {
            EXPECT_EQ(d.points[k].type, ref.points[k].type);
            EXPECT_NEAR(d.points[k].location.u, c * ref.points[k].location.u, 1e-12);
            EXPECT_NEAR(d.points[k].location.v, c * c * ref.points[k].location.v, 1e-12);
        }
        for (size_t k = 0; k < d.curves.size(); ++k) {
            EXPECT_NEAR(d.curves[k].coefficients[0], c * c * ref.curves[k].coefficients[0], 1e-12);
            EXPECT_NEAR(d.curves[k].coefficients[1], ref.curves[k].coefficients[1], 1e-12);
        }
    }
}

TEST(SymmetricDiagram, SpecialEigenvalues) {
    for (auto [mu, nu] : {std::pair{1.0, 1.0}, {0.7, -1.3}}) {
        SymmetricSpecialEigenvalues e = symmetric_special_eigenvalues(middle_spec, 0.5, mu, nu);
        const auto& c = e.corner.eigenvalues;
        EXPECT_NEAR(std::abs(c[0] - std::complex<double>(0, 2.0 * mu)), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(c[2] - std::complex<double>(0, 2.0 * nu)), 0.0, 1e-15);
        for (const auto& l : e.focus_focus.eigenvalues) {
            EXPECT_NEAR(std::abs(l.real()), 2.0 * std::abs(mu), 1e-15);
            EXPECT_NEAR(std::abs(l.imag()), std::abs(nu), 1e-15);
        }
        EXPECT_EQ(type_from_eigenvalues(e.focus_focus.eigenvalues), PointType::focus_focus);
    }
}

TEST(SymmetricDiagram, FocusFocusQuadrupletFromFiniteDifferences) {
    // mu X_G + nu X_J on the circle x_1 = x_2 = y_1 = y_2 = 0
    auto gq = detail::g_form(middle_spec);
    for (auto [mu, nu] : {std::pair{1.0, 1.0}, {0.5, 2.0}}) {
        for (double phi : {0.2, 0.7, 2.0}) {
            auto [x, y] = plane_orbit_point(middle_spec, 0, 3, phi, 0.5);
            Mat8 J = oracle::flow_jacobian(middle_spec, x, y, [&](const Vec4& a, const Vec4& b) {
                Vec8 g = mu * gq.gradient(a, b);
                g[1] += nu * b[2];
                g[2] -= nu * b[1];
                g[5] -= nu * a[2];
                g[6] += nu * a[1];
                return g;
            });
            Eigen::VectorXcd ev = oracle::eigenvalues(J);
            for (const auto& l : symmetric_special_eigenvalues(middle_spec, 0.5, mu, nu).focus_focus.eigenvalues)
                EXPECT_LE(oracle::nearest(ev, l), 1e-8) << "phi " << phi;
        }
    }
}

TEST(SymmetricDiagram, CornerEigenvaluesFromFiniteDifferences) {
    // mu X_F0 + nu X_F3 at a relative equilibrium x_0 = x_3 = y_0 = y_3 = 0 with |j| = sqrt(2 a_1 h)
    EllipsoidSpec s({1.0, 2.0, 2.0, 4.0});
    Vec4 x(0.0, std::sqrt(2.0), 0.0, 0.0), y(0.0, 0.0, 1.0, 0.0);
    auto f0 = detail::uhlenbeck_form(s, 0), f3 = detail::uhlenbeck_form(s, 3);
    for (auto [mu, nu] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}) {
        Mat8 J = oracle::flow_jacobian(s, x, y, [&](const Vec4& a, const Vec4& b) {
            return Vec8(mu * f0.gradient(a, b) + nu * f3.gradient(a, b));
        });
        Eigen::VectorXcd ev = oracle::eigenvalues(J);
        for (const auto& l : symmetric_special_eigenvalues(s, 0.5, mu, nu).corner.eigenvalues)
            if (std::abs(l) > 0) {
                EXPECT_LE(oracle::nearest(ev, l), 1e-8) << mu << ' ' << nu;
            }
    }
}

TEST(Corank1, OuterAxesAlwaysElliptic) {
    std::mt19937_64 rng(11);
    for (int i : {0, 3})
        for (int k = 0; k < 50; ++k) {
            CriticalPointRecord r = classify_corank1(generic_spec, i, subflow_point(generic_spec, i, rng));
            EXPECT_EQ(r.type, PointType::elliptic);
            EXPECT_EQ(type_from_eigenvalues(r.eigenvalues), PointType::elliptic);
        }
}

TEST(Corank1, TangencyPointIsDegenerateAndTypeFlips) {
    const double h = 0.5, a0 = generic_spec.alpha(0), a1 = generic_spec.alpha(1), a3 = generic_spec.alpha(3);
    double y0sq = 2.0 * h * (a0 - a1) / (a0 - a3);
    auto at = [&](double y0s) {
        Vec4 x(0.0, 0.0, std::sqrt(generic_spec.alpha(2)), 0.0);
        Vec4 y(std::sqrt(y0s), 0.0, 0.0, std::sqrt(2.0 * h - y0s));
        return classify_corank1(generic_spec, 1, PhasePoint(generic_spec, x, y));
    };
    CriticalPointRecord r = at(y0sq);
    EXPECT_EQ(r.type, PointType::degenerate);
    EXPECT_NEAR(r.location.u, 1.0, 1e-12);
    EXPECT_NEAR(r.location.v, -2.0, 1e-12);
    PointType below = at(0.5 * y0sq).type, above = at(2.0 * y0sq).type;
    EXPECT_NE(below, PointType::degenerate);
    EXPECT_NE(above, PointType::degenerate);
    EXPECT_NE(below, above);
}

TEST(Corank1, Errors) {
    std::mt19937_64 rng(12);
    PhasePoint p = random_leaf_point(generic_spec, rng);
    expect_code(ErrorCode::not_on_subflow, [&] { classify_corank1(generic_spec, 1, p); });
    expect_code(ErrorCode::domain_error, [&] { classify_corank1(generic_spec, 4, p); });
    expect_code(ErrorCode::degenerate_axes, [&] { classify_corank1(middle_spec, 0, random_leaf_point(middle_spec, rng)); });
}

TEST(TypeFromEigenvalues, Patterns) {
    using C = std::complex<double>;
    EXPECT_EQ(type_from_eigenvalues({C(0, 1), C(0, -1)}), PointType::elliptic);
    EXPECT_EQ(type_from_eigenvalues({C(1, 0), C(-1, 0)}), PointType::hyperbolic);
    EXPECT_EQ(type_from_eigenvalues({C(0, 0), C(0, 0)}), PointType::degenerate);
    EXPECT_EQ(type_from_eigenvalues({C(0, 1), C(0, -1), C(2, 0), C(-2, 0)}), PointType::elliptic_hyperbolic);
    EXPECT_EQ(type_from_eigenvalues({C(1, 1), C(1, -1), C(-1, 1), C(-1, -1)}), PointType::focus_focus);
}

// Folding the generic chart onto the symmetric one as alpha_2 -> alpha_1: with
// j^2 = (a_1 - a_2) F_1 and g = F_1 + F_2, the lines F_0 = 0 and F_3 = 0 land on the
// two boundary parabolas and the double-root arc collapses onto j = 0.
TEST(Folding, GenericLinesApproachParabolas) {
    const double eps = 1e-4;
    EllipsoidSpec s({1.0, 2.0, 2.0 + eps, 4.0});
    BifurcationDiagram gd = generic_diagram(s, 0.5, 64);
    BifurcationDiagram sd = symmetric_diagram(middle_spec, 0.5);
    auto fold = [&](const CurveSample& p) {
        Vec4 f = constants_to_integrals(s, SeparationConstants{0.5, p.c1, p.c2});
        double j2 = (s.alpha(1) - s.alpha(2)) * f[1];
        return std::pair<double, double>{j2, f[1] + f[2]};
    };
    double worst = 0.0, arc_j = 0.0;
    int used = 0;
    for (const auto& c : gd.curves) {
        if (c.kind == CurveKind::double_root_curve) {
            for (const auto& p : c.polyline) arc_j = std::max(arc_j, std::sqrt(std::max(0.0, fold(p).first)));
            continue;
        }
        const CriticalCurve* target = nullptr;
        if (c.label == "F_0 = 0") target = &sd.curves[0];
        if (c.label == "F_3 = 0") target = &sd.curves[1];
        if (!target) continue;
        for (const auto& p : c.polyline) {
            auto [j2, g] = fold(p);
            if (j2 < -1e-12) continue;  // the part of the line beyond the second band edge has no symmetric partner
            ++used;
            worst = std::max(worst, std::abs(target->residual(std::sqrt(std::max(0.0, j2)), g)));
        }
    }
    EXPECT_GT(used, 64);
    EXPECT_LE(worst, 1e-2);
    EXPECT_LE(arc_j, 1e-2);
}
