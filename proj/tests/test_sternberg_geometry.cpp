#include <gtest/gtest.h>

#include "support.hpp"

using namespace gaugeflow;
using testing_support::random_vec;

namespace {

/// Omega# written from its coordinate expression, entry by entry, for (q, p, z) ordering.
Mat omega_oracle(const GaugeSystem& sys, const Vec& q, const Vec& z) {
    const int n = sys.n(), m = sys.m(), d = sys.d();
    const Mat A = sys.A(q);
    const Tensor3 dA = sys.dA(q);
    const Vec phi = sys.Phi(z);
    const Mat dphi = sys.dPhi(z);
    const Mat w = sys.omega_fiber(z);
    Mat o = Mat::Zero(2 * n + m, 2 * n + m);
    for (int i = 0; i < n; ++i) {
        o(i, n + i) = 1.0;
        o(n + i, i) = -1.0;
        for (int j = 0; j < n; ++j) {
            double f = 0.0;
            for (int k = 0; k < d; ++k) f += (dA[i](j, k) - dA[j](i, k)) * phi[k];
            o(i, j) = f;
        }
        for (int a = 0; a < m; ++a) {
            double c = 0.0;
            for (int k = 0; k < d; ++k) c += A(i, k) * dphi(a, k);
            o(i, 2 * n + a) = -c;
            o(2 * n + a, i) = c;
        }
    }
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) o(2 * n + a, 2 * n + b) = w(a, b);
    return o;
}

std::vector<std::pair<Vec, Vec>> base_points(const ScenarioInstance& inst, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<Vec, Vec>> pts;
    for (int k = 0; k < count; ++k) {
        const SternbergPoint x = inst.box.sample(rng);
        pts.emplace_back(x.q, x.z);
    }
    return pts;
}

} // namespace

TEST(OmegaSharp, MatchesCoordinateExpression) {
    for (const auto& s : testing_support::all_scenarios()) {
        const GaugeSystem& sys = s.instance.system;
        for (const auto& [q, z] : base_points(s.instance, 25, 1)) {
            const OmegaSharpMatrix om = assemble_omega_sharp(sys, q, z);
            EXPECT_LT(max_abs(Mat(om.small - omega_oracle(sys, q, z))), 1e-14) << s.name;
            EXPECT_LT(max_abs(Mat(om.small + om.small.transpose())), 1e-15) << s.name;
        }
    }
}

TEST(OmegaSharp, ExtendedMatrixHasZeroVelocityBlock) {
    const GaugeSystem sys = make_nonabelian_demo();
    Vec q(2), z(2);
    q << 0.1, 0.2;
    z << -0.3, 0.4;
    const OmegaSharpMatrix om = assemble_omega_sharp(sys, q, z);
    const BundleLayout l{2, 2};
    ASSERT_EQ(om.extended.rows(), l.dim());
    EXPECT_EQ(max_abs(Mat(om.extended.middleRows(l.v(), 2))), 0.0);
    EXPECT_EQ(max_abs(Mat(om.extended.middleCols(l.v(), 2))), 0.0);
    EXPECT_EQ(om.extended.block(l.q(), l.p(), 2, 2), Mat::Identity(2, 2));
    EXPECT_EQ(om.extended.block(l.z(), l.z(), 2, 2), FiberSymplectic::darboux_matrix(2));
}

TEST(OmegaSharp, UniformMagneticFieldBlock) {
    // F_ij = -e (d_i A_j - d_j A_i) = -e eps_ijk B_k
    EMFieldParams p;
    p.e = 1.5;
    p.B = {0.2, -0.7, 1.1};
    const GaugeSystem sys = make_em_nonrelativistic(make_fields(p));
    Vec q(3);
    q << 0.3, 0.1, -0.2;
    const Mat f = assemble_omega_sharp(sys, q, Vec(0)).small.topLeftCorner(3, 3);
    EXPECT_NEAR(f(0, 1), -1.5 * 1.1, 1e-14);
    EXPECT_NEAR(f(1, 2), -1.5 * 0.2, 1e-14);
    EXPECT_NEAR(f(2, 0), -1.5 * -0.7, 1e-14);
}

TEST(Closedness, AllScenariosAreClosed) {
    for (const auto& s : testing_support::all_scenarios()) {
        const CheckResult r = exterior_derivative_check(s.instance.system, base_points(s.instance, 100, 2));
        EXPECT_TRUE(r.passed) << s.name << " residual " << r.measured;
        EXPECT_EQ(r.samples, 100u);
    }
}

TEST(Closedness, ExactFormOracleAgreesWithCyclicSum) {
    // d(d theta) = 0 for any smooth one-form: a nonzero generic two-form is not closed but
    // d of a one-form is.
    auto theta = [](const Vec& y) {
        Vec t(3);
        t << std::sin(y[1]) * y[2], y[0] * y[0] * std::cos(y[2]), std::exp(0.3 * y[0] * y[1]);
        return t;
    };
    auto exact = [&](const Vec& y) { return Mat(exterior_derivative(theta, y, 1e-4)); };
    auto generic = [](const Vec& y) {
        Mat w = Mat::Zero(3, 3);
        w(0, 1) = y[2];
        w(1, 0) = -y[2];
        return w;
    };
    Vec y(3);
    y << 0.2, -0.5, 0.7;
    EXPECT_LT(closedness_residual(exact, y, 1e-3), 1e-5);
    EXPECT_NEAR(closedness_residual(generic, y, 1e-4), 1.0, 1e-8);
}

TEST(Closedness, InjectedSignErrorInFieldStrengthIsCaught) {
    const GaugeSystem sys = make_nonabelian_demo();
    const int n = sys.n(), m = sys.m();
    auto corrupted = [&sys, n](const Vec& y) {
        Mat o = assemble_omega_sharp(sys, y.head(n), y.tail(sys.m())).small;
        o.topLeftCorner(n, n) *= -1.0;
        return o;
    };
    const auto inst = default_registry().build("nonabelian_demo", {});
    const CheckResult r = exterior_derivative_check(corrupted, n, m, base_points(inst, 100, 3));
    EXPECT_FALSE(r.passed);
    EXPECT_GT(r.measured, 0.1);
}

TEST(Closedness, FlippedCouplingTermIsCaught) {
    const GaugeSystem sys = make_nonabelian_demo();
    const int n = sys.n(), m = sys.m();
    auto corrupted = [&](const Vec& y) {
        Mat o = assemble_omega_sharp(sys, y.head(n), y.tail(m)).small;
        o.block(0, 2 * n, n, m) *= -1.0;
        o.block(2 * n, 0, m, n) *= -1.0;
        return o;
    };
    const auto inst = default_registry().build("nonabelian_demo", {});
    const CheckResult r = exterior_derivative_check(corrupted, n, m, base_points(inst, 100, 4));
    EXPECT_FALSE(r.passed);
    EXPECT_GT(r.measured, 0.1);
}

TEST(Closedness, NonPositiveStepIsRejected) {
    const GaugeSystem sys = make_nonabelian_demo();
    EXPECT_THROW(exterior_derivative_check(sys, {{Vec::Zero(2), Vec::Zero(2)}}, 0.0), Error);
}

TEST(ThetaSharp, PotentialOfOmegaSharpInAllScenarios) {
    for (const auto& s : testing_support::all_scenarios()) {
        std::mt19937_64 rng(5);
        std::vector<Vec> ys;
        for (int k = 0; k < 50; ++k) {
            const SternbergPoint x = s.instance.box.sample(rng);
            Vec y(2 * x.q.size() + x.z.size());
            y << x.q, x.p, x.z;
            ys.push_back(y);
        }
        const CheckResult r = theta_potential_check(s.instance.system, ys);
        EXPECT_TRUE(r.passed) << s.name << " " << r.measured;
    }
}

TEST(ThetaSharp, ComponentsInDarbouxCoordinates) {
    const GaugeSystem sys = make_nonabelian_demo();
    Vec q(2), p(2), z(2);
    q << 0.3, -0.6;
    p << 1.0, 2.0;
    z << 0.25, -0.75;
    const ThetaSharpCovector th = theta_sharp(sys, q, p, z);
    EXPECT_LT((th.theta_q - (p - sys.A(q) * sys.Phi(z))).norm(), 1e-15);
    EXPECT_EQ(th.theta_p, Vec::Zero(2));
    EXPECT_DOUBLE_EQ(th.theta_z[0], -0.75);
    EXPECT_DOUBLE_EQ(th.theta_z[1], 0.0);
}

TEST(ThetaSharp, NonDarbouxFiberIsRefused) {
    const GaugeSystem demo = make_nonabelian_demo();
    FiberSymplectic f;
    f.m = 2;
    f.darboux = false;
    f.value = [](const Vec& z) {
        Mat w(2, 2);
        w << 0, 1 + z[0] * z[0], -(1 + z[0] * z[0]), 0;
        return w;
    };
    const GaugeSystem sys(demo.algebra(), demo.connection(), demo.moment(), f, demo.lagrangian());
    try {
        theta_sharp(sys, Vec::Zero(2), Vec::Zero(2), Vec::Zero(2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RequiresDarboux);
    }
    // closedness holds for any closed fiber form, Darboux or not
    std::vector<std::pair<Vec, Vec>> pts{{Vec::Constant(2, 0.1), Vec::Constant(2, 0.3)}};
    EXPECT_TRUE(exterior_derivative_check(sys, pts).passed);
}

TEST(TulczyjewMap, IndependentTranscription) {
    const GaugeSystem sys = make_nonabelian_demo();
    const int n = 2, m = 2, d = 3;
    std::mt19937_64 rng(21);
    for (int k = 0; k < 50; ++k) {
        PhaseTangent t{random_vec(rng, n), random_vec(rng, n), random_vec(rng, m),
                       random_vec(rng, n), random_vec(rng, n), random_vec(rng, m)};
        const TulczyjewImage img = alpha_F(sys, t);
        const Mat A = sys.A(t.q);
        const Tensor3 dA = sys.dA(t.q);
        const Vec phi = sys.Phi(t.z);
        const Mat dphi = sys.dPhi(t.z);
        const Mat w = sys.omega_fiber(t.z);
        for (int i = 0; i < n; ++i) {
            // pi_i = pdot_i - <qdot^j (d_j A_i - d_i A_j), Phi> - <A_i, zdot^a d_a Phi>
            double pi = t.pdot[i];
            for (int j = 0; j < n; ++j)
                for (int c = 0; c < d; ++c) pi -= t.qdot[j] * (dA[j](i, c) - dA[i](j, c)) * phi[c];
            for (int a = 0; a < m; ++a)
                for (int c = 0; c < d; ++c) pi -= A(i, c) * t.zdot[a] * dphi(a, c);
            EXPECT_NEAR(img.pi_q[i], pi, 1e-14);
            EXPECT_EQ(img.pi_v[i], t.p[i]);
        }
        for (int a = 0; a < m; ++a) {
            double pz = 0.0;
            for (int b = 0; b < m; ++b) pz += w(a, b) * t.zdot[b];
            for (int i = 0; i < n; ++i)
                for (int c = 0; c < d; ++c) pz += t.qdot[i] * A(i, c) * dphi(a, c);
            EXPECT_NEAR(img.pi_z[a], pz, 1e-14);
        }
    }
}

TEST(TulczyjewMap, RoundTripIsIdentity) {
    for (const auto& s : testing_support::all_scenarios()) {
        std::mt19937_64 rng(31);
        const CheckResult r = tulczyjew_roundtrip_check(s.instance.system, s.instance.box, rng, 1000, 1e-12);
        EXPECT_TRUE(r.passed) << s.name << " " << r.measured;
    }
}

TEST(TulczyjewMap, GaugeFreeCaseIsCanonical) {
    const GaugeSystem sys = make_trivial_gauge(2, oscillator_lagrangian(2, 1.0));
    std::mt19937_64 rng(8);
    PhaseTangent t{random_vec(rng, 2), random_vec(rng, 2), Vec(0), random_vec(rng, 2), random_vec(rng, 2), Vec(0)};
    const TulczyjewImage img = alpha_F(sys, t);
    EXPECT_EQ(img.pi_q, t.pdot);
    EXPECT_EQ(img.pi_v, t.p);
    EXPECT_EQ(img.pi_z.size(), 0);
}

TEST(TulczyjewMap, DimensionErrors) {
    const GaugeSystem sys = make_nonabelian_demo();
    PhaseTangent t{Vec::Zero(2), Vec::Zero(2), Vec::Zero(2), Vec::Zero(3), Vec::Zero(2), Vec::Zero(2)};
    EXPECT_THROW(alpha_F(sys, t), Error);
}
