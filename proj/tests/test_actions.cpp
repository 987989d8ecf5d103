#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <ellgeo/actions.hpp>
#include <ellgeo/dynamics.hpp>

#include "oracles.hpp"

using namespace ellgeo;

namespace {

const EllipsoidSpec spec({1.0, 2.0, 2.0, 4.0});

template <class F>
void expect_code(ErrorCode code, F&& f) {
    try {
        f();
        ADD_FAILURE() << "expected " << to_string(code);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

struct Level {
    double h, g, j;
};

// Random (h, g, j) strictly inside the image, away from the boundary and the j = 0 line.
std::vector<Level> interior_levels(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Level> out;
    while (static_cast<int>(out.size()) < n) {
        double h = 0.25 + 0.75 * u(rng);
        double jc = std::sqrt(2.0 * spec.alpha(1) * h);
        double j = (0.1 + 0.75 * u(rng)) * jc;
        double lo = g_lower(spec, h, j), hi = g_upper(spec, h, j);
        double g = lo + (0.1 + 0.8 * u(rng)) * (hi - lo);
        out.push_back({h, g, j});
    }
    return out;
}

double frame_gap(const TransitionMatrix& T, const Eigen::Matrix3d& from, const Eigen::Matrix3d& to) {
    Eigen::Matrix3d Tm;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) Tm(r, c) = static_cast<double>(T.entries()[r][c]);
    return (Tm * from - to).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Actions, MatchAdaptiveQuadratureOracle) {
    std::vector<Level> levels = {{0.5, 0.5, 0.5}, {0.5, -0.5, 0.3}, {0.5, 1.2, 0.9}, {0.8, 0.1, -0.6}};
    for (const auto& [h, g, j] : levels) {
        EXPECT_NEAR(action_I2(spec, h, g, j), oracle::action_I2(spec, h, g, j), 1e-9) << h << ' ' << g << ' ' << j;
        EXPECT_NEAR(action_I3(spec, h, g, j), oracle::action_I3(spec, h, g, j), 1e-9) << h << ' ' << g << ' ' << j;
    }
}

TEST(Actions, FrameInvariants) {
    for (const auto& [h, g, j] : interior_levels(10, 1)) {
        ActionFrame fr = action_frame(spec, h, g, j);
        EXPECT_EQ(fr.I[0], j);
        EXPECT_GE(fr.I[1], 0.0);
        EXPECT_GE(fr.I[2], 0.0);
        EXPECT_EQ(fr.dI(0, 0), 1.0);
        EXPECT_EQ(fr.dI(0, 1), 0.0);
        EXPECT_EQ(fr.dI(0, 2), 0.0);
        EXPECT_EQ(fr.side, Side::j_pos);
    }
}

TEST(Actions, BandCollapseAtBoundary) {
    for (double j : {0.0, 0.5, 1.0}) {
        double gl = g_lower(spec, 0.5, j), gu = g_upper(spec, 0.5, j);
        EXPECT_LE(action_I2(spec, 0.5, gl + 1e-8, j), 1e-6) << j;
        EXPECT_LE(action_I3(spec, 0.5, gu - 1e-8, j), 1e-6) << j;
    }
}

TEST(Actions, EvenInJWithOddDerivatives) {
    for (const auto& [h, g, j] : interior_levels(20, 2)) {
        ActionFrame p = action_frame(spec, h, g, j), m = action_frame(spec, h, g, -j);
        EXPECT_NEAR(p.I[1], m.I[1], 1e-9);
        EXPECT_NEAR(p.I[2], m.I[2], 1e-9);
        EXPECT_NEAR(p.dI(1, 0), -m.dI(1, 0), 1e-9);
        EXPECT_NEAR(p.dI(2, 0), -m.dI(2, 0), 1e-9);
        EXPECT_EQ(m.side, Side::j_neg);
    }
}

TEST(Actions, JacobianMatchesFiniteDifferences) {
    const double step = 1e-5;
    for (const auto& [h, g, j] : interior_levels(10, 3)) {
        ActionFrame fr = action_frame(spec, h, g, j);
        for (int c = 0; c < 3; ++c) {
            Level p{h, g, j}, m{h, g, j};
            double* lp = c == 0 ? &p.j : c == 1 ? &p.g : &p.h;
            double* lm = c == 0 ? &m.j : c == 1 ? &m.g : &m.h;
            *lp += step;
            *lm -= step;
            ActionFrame a = action_frame(spec, p.h, p.g, p.j), b = action_frame(spec, m.h, m.g, m.j);
            for (int r = 1; r < 3; ++r)
                EXPECT_NEAR(fr.dI(r, c), (a.I[r] - b.I[r]) / (2.0 * step), 1e-6) << "row " << r << " col " << c;
        }
        auto [d2, d3] = action_gradient(spec, h, g, j);
        EXPECT_EQ(d2, fr.dI(1, 0));
        EXPECT_EQ(d3, fr.dI(2, 0));
    }
}

TEST(Actions, DerivativeLimitsAtZeroMomentum) {
    for (double sg : {1.0, -1.0}) {
        auto [d2n, d3n] = action_gradient(spec, 0.5, -0.5, sg * 1e-4);
        EXPECT_NEAR(d3n, -sg, 1e-2);
        EXPECT_NEAR(d2n, 0.0, 1e-2);
        auto [d2p, d3p] = action_gradient(spec, 0.5, 0.5, sg * 1e-4);
        EXPECT_NEAR(d2p, -sg, 1e-2);
        EXPECT_NEAR(d3p, 0.0, 1e-2);
    }
}

TEST(Actions, Errors) {
    expect_code(ErrorCode::pole_collision, [] { action_frame(spec, 0.5, 1e-9, 0.0); });
    expect_code(ErrorCode::outside_image, [] { action_frame(spec, 0.5, 3.0, 0.0); });
    expect_code(ErrorCode::wrong_symmetry, [] { action_frame(EllipsoidSpec({1, 2, 3, 4}), 0.5, 0.5, 0.5); });
    // g = 0 with |j| above j_floor is regular
    EXPECT_GT(action_I2(spec, 0.5, 0.0, 1e-6), 0.0);
}

// The residue of z/((z - a1) w) at a1 is -i a1/((a1 - a0)(a3 - a1)|j|) on the
// branch with w(a1) in the upper half plane.
TEST(Residue, ClosedFormAndContourOracle) {
    std::complex<double> r1 = residue_at_pole(spec, 1.0), r2 = residue_at_pole(spec, -2.0);
    EXPECT_NEAR(std::abs(r1 - std::complex<double>(0.0, -1.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(r2 - std::complex<double>(0.0, -0.5)), 0.0, 1e-15);
    for (auto [g, j] : {std::pair{0.5, 1.0}, {-0.2, 0.7}, {0.3, 0.4}}) {
        QTildeCubic q = qtilde(spec, 0.5, g, j);
        std::complex<double> c = oracle::contour_residue(spec, 0.5, q.r1, q.r2);
        std::complex<double> r = residue_at_pole(spec, j);
        EXPECT_LE(std::abs(r - c) / std::abs(c), 1e-8) << g << ' ' << j;
    }
    expect_code(ErrorCode::zero_momentum, [] { residue_at_pole(spec, 0.0); });
}

TEST(Gluing, MatricesAtHalfEnergy) {
    GlueMatrices m = glue_matrices(spec, 0.5, 0.5, -0.5);
    IMat3 M1{{{1, 0, 0}, {-2, 1, 0}, {0, 0, 1}}}, M2{{{1, 0, 0}, {0, 1, 0}, {-2, 0, 1}}};
    EXPECT_EQ(m.M1.entries(), M1);
    EXPECT_EQ(m.M2.entries(), M2);
    EXPECT_EQ(m.M1.determinant(), 1);
    EXPECT_EQ(m.M2.determinant(), 1);
    GlueMatrices d = glue_matrices(spec, 0.5);
    EXPECT_EQ(d.M1.entries(), M1);
    EXPECT_EQ(d.M2.entries(), M2);
    expect_code(ErrorCode::domain_error, [] { glue_matrices(spec, 0.5, -0.1, -0.5); });
}

TEST(Gluing, FramesJoinAcrossZeroMomentum) {
    const double d = 1e-4;
    for (double g : {0.5, 1.2, -0.3, -0.7}) {
        TransitionMatrix T = crossing_transition(spec, 0.5, g, Side::j_pos);
        EXPECT_EQ(crossing_transition(spec, 0.5, g, Side::j_neg).entries(), T.inverse().entries());
        // T D(-0) = D(+0), read at |j| = d
        EXPECT_LE(frame_gap(T, action_frame(spec, 0.5, g, -d).dI, action_frame(spec, 0.5, g, d).dI), 1e-3) << g;
        ActionFrame p = action_frame(spec, 0.5, g, d), m = action_frame(spec, 0.5, g, -d);
        EXPECT_LE((p.I.tail<2>() - m.I.tail<2>()).cwiseAbs().maxCoeff(), 1e-3);
    }
}

TEST(Monodromy, MatrixAndNormalForm) {
    MonodromyResult r = monodromy(spec, 0.5, 0.5, 0.5, 64);
    IMat3 M{{{1, 0, 0}, {2, 1, 0}, {-2, 0, 1}}}, N{{{1, 0, 0}, {0, 1, 0}, {2, 0, 1}}};
    EXPECT_TRUE(r.encloses_singularity);
    EXPECT_EQ(r.crossings.size(), 2u);
    EXPECT_EQ(r.M.entries(), M);
    EXPECT_EQ(r.N.entries(), N);
    EXPECT_EQ((r.T * r.M * r.T.inverse()).entries(), N);
    TransitionMatrix S = reflection_S();
    EXPECT_EQ(((r.M2 * S).inverse() * (r.M1 * S)).entries(), M);
    TransitionMatrix Tp(IMat3{{{1, 0, 0}, {0, -1, -1}, {0, 0, -1}}});
    EXPECT_EQ((Tp * r.M * Tp.inverse()).entries(), N);
    EXPECT_EQ(r.loop.size(), static_cast<size_t>(r.n_steps));
}

TEST(Monodromy, IndependentOfLoopShape) {
    IMat3 M{{{1, 0, 0}, {2, 1, 0}, {-2, 0, 1}}};
    for (auto [rj, rg] : {std::pair{0.2, 0.8}, {0.8, 0.2}, {0.3, 0.3}}) {
        MonodromyResult r = monodromy(spec, 0.5, rj, rg, 64);
        EXPECT_EQ(r.M.entries(), M) << rj << ' ' << rg;
    }
}

TEST(Monodromy, NonEnclosingLoopIsTrivial) {
    MonodromyResult r = monodromy(spec, 0.5, 0.2, 0.2, 64, 0.0, 1.5);
    EXPECT_FALSE(r.encloses_singularity);
    EXPECT_TRUE(r.M.is_identity());
    MonodromyResult side = monodromy(spec, 0.5, 0.2, 0.2, 64, 0.6, 0.0);
    EXPECT_TRUE(side.crossings.empty());
    EXPECT_TRUE(side.M.is_identity());
}

TEST(Monodromy, Errors) {
    expect_code(ErrorCode::loop_outside_image, [] { monodromy(spec, 0.5, 0.5, 2.5, 64); });
    expect_code(ErrorCode::domain_error, [] { monodromy(spec, 0.5, 0.5, 0.5, 16); });
    expect_code(ErrorCode::domain_error, [] { monodromy(spec, 0.5, -0.5, 0.5, 64); });
}

// x_0 vanishes exactly when the lower-band coordinate reaches a0, once per
// oscillation, and the band is covered twice per period of its angle, so the
// zero crossings of x_0 are spaced pi/omega_2 with omega = dh/dI (similarly x_3 and omega_3).
TEST(Frequencies, ZeroCrossingSpacingMatchesActionJacobian) {
    std::mt19937_64 rng(9);
    PhasePoint p0 = random_leaf_point(spec, rng);
    for (;;) {
        double j = angular_momentum(p0);
        if (std::abs(j) > 0.1 && std::abs(p0.x()[0]) > 0.1) break;
        p0 = random_leaf_point(spec, rng);
    }
    SymmetricIntegrals I = symmetric_integrals(spec, p0);
    Eigen::Matrix3d Dinv = action_frame(spec, I.h, I.g, I.j).dI.inverse();
    double w2 = Dinv(2, 1), w3 = Dinv(2, 2);
    Trajectory tr = integrate(spec, p0, 60.0, 1e-3);
    auto spacing = [&](int axis) {
        std::vector<double> zeros;
        for (size_t k = 1; k < tr.samples.size(); ++k) {
            double a = tr.samples[k - 1].p.x()[axis], b = tr.samples[k].p.x()[axis];
            if ((a < 0) != (b < 0))
                zeros.push_back(tr.samples[k - 1].t + (tr.samples[k].t - tr.samples[k - 1].t) * a / (a - b));
        }
        EXPECT_GE(zeros.size(), 4u);
        return (zeros.back() - zeros.front()) / static_cast<double>(zeros.size() - 1);
    };
    double t2 = spacing(0), t3 = spacing(3);
    EXPECT_NEAR(t2 * w2 / std::numbers::pi, 1.0, 1e-2) << "measured " << t2 << " predicted " << std::numbers::pi / w2;
    EXPECT_NEAR(t3 * w3 / std::numbers::pi, 1.0, 1e-2) << "measured " << t3 << " predicted " << std::numbers::pi / w3;
}
