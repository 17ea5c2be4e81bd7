#include <gtest/gtest.h>

#include "support.hpp"

using namespace gaugeflow;
using testing_support::random_vec;

namespace {

Vec cross(const Vec& a, const Vec& b) {
    Vec c(3);
    c << a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0];
    return c;
}

std::vector<SternbergPoint> sample_points(const ScenarioInstance& inst, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<SternbergPoint> out;
    for (int k = 0; k < count; ++k) out.push_back(inst.box.sample(rng));
    return out;
}

} // namespace

TEST(GeneralizedEnergy, RelativisticRestFrame) {
    const GaugeSystem sys = make_em_relativistic(make_fields({}));
    Vec v = Vec::Zero(4);
    v[0] = 1.0;
    const SternbergPoint x = on_shell_point(sys, Vec::Zero(4), v, Vec(0));
    EXPECT_DOUBLE_EQ(generalized_energy(sys, x), -0.5);
}

TEST(GeneralizedEnergy, NonrelativisticIsKineticPlusPotential) {
    EMFieldParams p;
    p.E = {0.4, 0.0, 0.0};
    p.e = 2.0;
    const GaugeSystem sys = make_em_nonrelativistic(make_fields(p));
    Vec q(3), v(3);
    q << 1.0, 0.0, 0.0;
    v << 0.5, 0.5, 0.0;
    // E = |v|^2/2 + e phi with phi = -0.4 x
    EXPECT_NEAR(generalized_energy(sys, on_shell_point(sys, q, v, Vec(0))), 0.25 - 0.8, 1e-15);
}

TEST(GeneralizedEnergy, DifferentialMatchesDifferences) {
    for (const auto& s : testing_support::all_scenarios()) {
        std::mt19937_64 rng(4);
        const CheckResult r = energy_differential_check(s.instance.system, s.instance.box, rng, 1000, 1e-6);
        EXPECT_TRUE(r.passed) << s.name << " " << r.measured;
    }
}

TEST(ReducedDynamics, LorentzForceLaw) {
    EMFieldParams p;
    p.e = 0.7;
    p.E = {0.3, -0.1, 0.25};
    p.B = {0.4, -0.6, 1.2};
    p.dipole = 0.5;
    const EMFields f = make_fields(p);
    const GaugeSystem sys = make_em_nonrelativistic(f);
    std::mt19937_64 rng(1);
    for (int k = 0; k < 100; ++k) {
        Vec q = random_vec(rng, 3, 0.5);
        q[0] += 1.5;
        const Vec v = random_vec(rng, 3, 2.0);
        const ExplicitRates r = reduce_to_explicit(sys, q, v, Vec(0));
        const Vec expect = p.e * (f.electric(q) + cross(v, f.magnetic(q)));
        EXPECT_LT((r.vdot - expect).norm(), 1e-10);
        EXPECT_EQ(r.qdot, v);
    }
}

TEST(ReducedDynamics, CyclotronTurnsClockwiseForPositiveCharge) {
    const GaugeSystem sys = make_em_nonrelativistic(make_fields({}));
    Vec v = Vec::Zero(3);
    v[0] = 1.0;
    const ExplicitRates r = reduce_to_explicit(sys, Vec::Zero(3), v, Vec(0));
    EXPECT_NEAR(r.vdot[0], 0.0, 1e-15);
    EXPECT_NEAR(r.vdot[1], -1.0, 1e-15);
}

TEST(ReducedDynamics, ZeroChargeIsFree) {
    EMFieldParams p;
    p.e = 0.0;
    p.E = {1.0, 1.0, 1.0};
    const GaugeSystem sys = make_em_nonrelativistic(make_fields(p));
    const ExplicitRates r = reduce_to_explicit(sys, Vec::Ones(3), Vec::Ones(3), Vec(0));
    EXPECT_EQ(r.vdot, Vec::Zero(3));
}

TEST(ReducedDynamics, RelativisticCovariantForce) {
    EMFieldParams p;
    p.e = 1.3;
    p.E = {0.2, 0.5, -0.3};
    p.B = {-0.4, 0.1, 0.9};
    const EMFields f = make_fields(p);
    const GaugeSystem sys = make_em_relativistic(f);
    std::mt19937_64 rng(2);
    for (int k = 0; k < 50; ++k) {
        const Vec q = random_vec(rng, 4);
        const Vec v = random_vec(rng, 4);
        const ExplicitRates r = reduce_to_explicit(sys, q, v, Vec(0));
        // F_{nu mu} = d_nu A_mu - d_mu A_nu with A_0 = phi: F_{i0} = -E_i, F_{ij} = eps_ijk B_k
        Mat fmat = Mat::Zero(4, 4);
        const Vec E = f.electric(q.tail(3)), B = f.magnetic(q.tail(3));
        for (int i = 0; i < 3; ++i) {
            fmat(i + 1, 0) = -E[i];
            fmat(0, i + 1) = E[i];
        }
        fmat(1, 2) = B[2];
        fmat(2, 1) = -B[2];
        fmat(2, 3) = B[0];
        fmat(3, 2) = -B[0];
        fmat(3, 1) = B[1];
        fmat(1, 3) = -B[1];
        for (int mu = 0; mu < 4; ++mu) {
            double force = 0.0;
            for (int nu = 0; nu < 4; ++nu) force -= p.e * v[nu] * fmat(nu, mu);
            EXPECT_NEAR(r.pdot[mu], force, 1e-12);
        }
        // p_0 = -v^0; dp_0/dtau = e qdot . E
        EXPECT_NEAR(r.pdot[0], p.e * v.tail(3).dot(E), 1e-12);
    }
}

TEST(ReducedDynamics, FiberDecouplesWithoutConnection) {
    NonabelianParams p;
    p.g = 0.0;
    const GaugeSystem sys = make_nonabelian_demo(p);
    std::mt19937_64 rng(6);
    const Mat inv = FiberSymplectic::darboux_matrix(2).inverse();
    for (int k = 0; k < 20; ++k) {
        const Vec q = random_vec(rng, 2), v = random_vec(rng, 2), z = random_vec(rng, 2);
        const ExplicitRates r = reduce_to_explicit(sys, q, v, z);
        EXPECT_LT((r.zdot - inv * sys.dL_dz(q, v, z)).norm(), 1e-14);
    }
}

TEST(ReducedDynamics, DegenerateLagrangianIsRefused) {
    const GaugeSystem sys = make_trivial_gauge(2, linear_lagrangian(2));
    try {
        reduce_to_explicit(sys, Vec::Zero(2), Vec::Ones(2), Vec(0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::LagrangianDegenerate);
    }
    // the intrinsic residual is still defined for any candidate tangent
    const SternbergPoint x{Vec::Zero(2), Vec::Ones(2), Vec::Ones(2), Vec(0)};
    const BundleTangent xdot{Vec::Ones(2), Vec::Zero(2), Vec::Zero(2), Vec(0)};
    EXPECT_EQ(intrinsic_residual(sys, x, xdot).norm(), 0.0);
    EXPECT_EQ(dirac_inclusion_residual(sys, x, xdot), 0.0);
}

TEST(Residuals, VanishOnTheVectorFieldForAllScenarios) {
    for (const auto& s : testing_support::all_scenarios()) {
        const GaugeSystem& sys = s.instance.system;
        for (const SternbergPoint& raw : sample_points(s.instance, 100, 7)) {
            const SternbergPoint x = on_shell_point(sys, raw.q, raw.v, raw.z);
            const BundleTangent xdot = vector_field(sys, x);
            EXPECT_LT(intrinsic_residual(sys, x, xdot).norm(), 1e-12) << s.name;
            EXPECT_LT(dirac_inclusion_residual(sys, x, xdot), 1e-12) << s.name;
            EXPECT_LT(tulczyjew_residual(sys, x, xdot), 1e-12) << s.name;
        }
    }
}

TEST(Residuals, MatrixAndComponentRoutesAgreeOffShell) {
    for (const auto& s : testing_support::all_scenarios()) {
        const GaugeSystem& sys = s.instance.system;
        std::mt19937_64 rng(8);
        for (int k = 0; k < 100; ++k) {
            const SternbergPoint x = s.instance.box.sample(rng);
            const BundleTangent xdot{random_vec(rng, sys.n()), random_vec(rng, sys.n()), random_vec(rng, sys.n()),
                                     random_vec(rng, sys.m())};
            EXPECT_NEAR(intrinsic_residual(sys, x, xdot).norm(), dirac_inclusion_residual(sys, x, xdot), 1e-13)
                << s.name;
        }
    }
}

TEST(Residuals, DetectPerturbedRates) {
    const GaugeSystem sys = make_nonabelian_demo();
    Vec q(2), v(2), z(2);
    q << 0.2, 0.1;
    v << -0.3, 0.5;
    z << 0.4, 0.6;
    const SternbergPoint x = on_shell_point(sys, q, v, z);
    BundleTangent xdot = vector_field(sys, x);
    xdot.zdot[1] += 1e-3;
    EXPECT_GT(intrinsic_residual(sys, x, xdot).norm(), 1e-4);
    EXPECT_GT(dirac_inclusion_residual(sys, x, xdot), 1e-4);
    EXPECT_GT(tulczyjew_residual(sys, x, xdot), 1e-4);
}

TEST(Residuals, EulerLagrangeEquivalenceWithoutGauge) {
    const GaugeSystem sys = make_trivial_gauge(3, oscillator_lagrangian(3, 1.3, 0.4));
    const auto inst = default_registry().build("trivial_gauge", {{"dim", 3}, {"omega", 1.3}, {"lambda", 0.4}});
    std::mt19937_64 rng(9);
    const CheckResult r = euler_lagrange_equivalence_check(sys, inst.box, rng, 1000, 1e-12);
    EXPECT_TRUE(r.passed) << r.measured;
}

TEST(ExtendedLagrangian, CouplingAndFiberTerms) {
    const GaugeSystem sys = make_nonabelian_demo();
    std::mt19937_64 rng(10);
    const Vec q = random_vec(rng, 2), v = random_vec(rng, 2), z = random_vec(rng, 2);
    const Vec qd = random_vec(rng, 2), zd = random_vec(rng, 2);
    const double expect = sys.L(q, v, z) - sys.Phi(z).dot(sys.A(q).transpose() * qd) + zd[0] * z[1];
    EXPECT_NEAR(extended_lagrangian(sys, q, v, z, qd, Vec::Zero(2), zd), expect, 1e-15);
}

TEST(DiracStructure, AxiomsForAllScenarios) {
    for (const auto& s : testing_support::all_scenarios()) {
        const ReportFragment r = dirac_axioms_check(s.instance.system, sample_points(s.instance, 100, 11));
        for (const auto& c : r) EXPECT_TRUE(c.passed) << s.name << " " << c.name << " " << c.measured;
    }
}

TEST(DiracStructure, RandomAntisymmetricMatrices) {
    std::mt19937_64 rng(12);
    for (int k = 0; k < 50; ++k) {
        const int dim = 1 + static_cast<int>(rng() % 9);
        const DiracAxioms a = check_dirac_structure(testing_support::random_antisymmetric(rng, dim));
        EXPECT_EQ(a.dimension, dim);
        EXPECT_LE(a.isotropy, 1e-12);
        EXPECT_TRUE(a.maximal);
    }
}

TEST(DiracStructure, SymmetricPartBreaksIsotropy) {
    std::mt19937_64 rng(13);
    Mat w = testing_support::random_antisymmetric(rng, 4);
    w(1, 2) += 0.5;
    const DiracAxioms a = check_dirac_structure(w);
    EXPECT_GT(a.isotropy, 0.4);
    EXPECT_FALSE(a.maximal);
}

TEST(Legendre, VelocityFromMomentumInvertsDlDv) {
    const GaugeSystem sys = make_nonabelian_demo();
    Vec q(2), v(2), z(2);
    q << 0.1, 0.2;
    v << 0.7, -0.1;
    z << 0.3, -0.2;
    const Vec p = sys.dL_dv(q, v, z);
    EXPECT_LT((velocity_from_momentum(sys, q, p, z, Vec::Zero(2)) - v).norm(), 1e-13);
}
