#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gaugeflow/errors.hpp"
#include "gaugeflow/gauge_model.hpp"
#include "gaugeflow/linalg.hpp"
#include "gaugeflow/report.hpp"
#include "gaugeflow/sternberg_geometry.hpp"

namespace gaugeflow {

/// A point x = (q, v, p, z) of the Sternberg-Pontryagin bundle.
struct SternbergPoint {
    Vec q, v, p, z;

    Vec pack() const { return concat({&q, &v, &p, &z}); }

    static SternbergPoint unpack(const BundleLayout& l, const Vec& x) {
        require_size(x, l.dim(), "bundle point");
        return {x.segment(l.q(), l.n), x.segment(l.v(), l.n), x.segment(l.p(), l.n), x.segment(l.z(), l.m)};
    }
};

/// A tangent vector (qdot, vdot, pdot, zdot) to the Sternberg-Pontryagin bundle.
struct BundleTangent {
    Vec qdot, vdot, pdot, zdot;

    Vec pack() const { return concat({&qdot, &vdot, &pdot, &zdot}); }

    static BundleTangent unpack(const BundleLayout& l, const Vec& x) {
        require_size(x, l.dim(), "bundle tangent");
        return {x.segment(l.q(), l.n), x.segment(l.v(), l.n), x.segment(l.p(), l.n), x.segment(l.z(), l.m)};
    }
};

/// alpha_i dq^i + beta_i dv^i + u^i dp_i + mu_a dz^a.
struct CovectorSP {
    Vec alpha, beta, u, mu;

    Vec pack() const { return concat({&alpha, &beta, &u, &mu}); }

    static CovectorSP unpack(const BundleLayout& l, const Vec& x) {
        require_size(x, l.dim(), "bundle covector");
        return {x.segment(l.q(), l.n), x.segment(l.v(), l.n), x.segment(l.p(), l.n), x.segment(l.z(), l.m)};
    }

    /// Max-norm over all blocks.
    double norm() const {
        return std::max({max_abs(alpha), max_abs(beta), max_abs(u), max_abs(mu)});
    }
};

inline void require_point(const GaugeSystem& sys, const SternbergPoint& x) {
    require_size(x.q, sys.n(), "q");
    require_size(x.v, sys.n(), "v");
    require_size(x.p, sys.n(), "p");
    require_size(x.z, sys.m(), "z");
}

inline void require_tangent(const GaugeSystem& sys, const BundleTangent& t) {
    require_size(t.qdot, sys.n(), "qdot");
    require_size(t.vdot, sys.n(), "vdot");
    require_size(t.pdot, sys.n(), "pdot");
    require_size(t.zdot, sys.m(), "zdot");
}

/// E = <p, v> - L#(q, v, z).
inline double generalized_energy(const GaugeSystem& sys, const SternbergPoint& x) {
    require_point(sys, x);
    return x.p.dot(x.v) - sys.L(x.q, x.v, x.z);
}

/// dE = (-dL/dq, p - dL/dv, v, -dL/dz).
inline CovectorSP d_generalized_energy(const GaugeSystem& sys, const SternbergPoint& x) {
    require_point(sys, x);
    return {-sys.dL_dq(x.q, x.v, x.z), x.p - sys.dL_dv(x.q, x.v, x.z), x.v, -sys.dL_dz(x.q, x.v, x.z)};
}

/// Extended Lagrangian L# - <qdot^i A_i, Phi> + delta_{a abar} zdot^a z^abar. Independent of vdot.
inline double extended_lagrangian(const GaugeSystem& sys, const Vec& q, const Vec& v, const Vec& z,
                                  const Vec& qdot, const Vec& /*vdot*/, const Vec& zdot) {
    require_darboux(sys);
    require_size(qdot, sys.n(), "qdot");
    require_size(zdot, sys.m(), "zdot");
    const int half = sys.m() / 2;
    const double coupling = pairing(sys.Phi(z), sys.A(q).transpose() * qdot);
    const double fiber = zdot.head(half).dot(z.tail(half));
    return sys.L(q, v, z) - coupling + fiber;
}

/// i_xdot Omega# - dE with (i_w Omega)_J = w^I Omega_IJ, from the assembled bundle matrix.
/// Vanishes exactly on solutions of the equations of motion.
inline CovectorSP intrinsic_residual(const GaugeSystem& sys, const SternbergPoint& x, const BundleTangent& xdot) {
    require_point(sys, x);
    require_tangent(sys, xdot);
    const BundleLayout l{sys.n(), sys.m()};
    const Mat omega = assemble_omega_sharp(sys, x.q, x.z).extended;
    const Vec flat = omega.transpose() * xdot.pack();
    const Vec de = d_generalized_energy(sys, x).pack();
    return CovectorSP::unpack(l, flat - de);
}

/// Defect of (xdot, dE(x)) from D#(x), written out component by component:
///   alpha_i = qdot^j <d_jA_i - d_iA_j, Phi> - pdot_i + zdot^a <A_i, d_a Phi>
///   beta_i  = 0
///   u^i     = qdot^i
///   mu_a    = -qdot^i <A_i, d_a Phi> + zdot^b Omega_ba
/// Deliberately does not share code with the matrix route in intrinsic_residual.
inline double dirac_inclusion_residual(const GaugeSystem& sys, const SternbergPoint& x,
                                       const BundleTangent& xdot) {
    require_point(sys, x);
    require_tangent(sys, xdot);
    const int n = sys.n(), m = sys.m(), d = sys.d();
    const Mat A = sys.A(x.q);
    const Tensor3 dA = sys.dA(x.q);
    const Vec phi = sys.Phi(x.z);
    const Mat dphi = sys.dPhi(x.z);
    const Mat w = sys.omega_fiber(x.z);
    const CovectorSP de = d_generalized_energy(sys, x);

    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double rhs = -xdot.pdot[i];
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < d; ++k)
                rhs += xdot.qdot[j] * (dA[j](i, k) - dA[i](j, k)) * phi[k];
        for (int a = 0; a < m; ++a)
            for (int k = 0; k < d; ++k)
                rhs += xdot.zdot[a] * A(i, k) * dphi(a, k);
        worst = std::max(worst, std::abs(de.alpha[i] - rhs));
        worst = std::max(worst, std::abs(de.beta[i]));
        worst = std::max(worst, std::abs(de.u[i] - xdot.qdot[i]));
    }
    for (int a = 0; a < m; ++a) {
        double rhs = 0.0;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < d; ++k)
                rhs -= xdot.qdot[i] * A(i, k) * dphi(a, k);
        for (int b = 0; b < m; ++b) rhs += xdot.zdot[b] * w(b, a);
        worst = std::max(worst, std::abs(de.mu[a] - rhs));
    }
    return worst;
}

/// Standard Euler-Lagrange conditions (dL/dq - pdot, dL/dv - p, qdot - v) for a gauge-free model.
inline Vec euler_lagrange_residual(const GaugeSystem& sys, const SternbergPoint& x, const BundleTangent& xdot) {
    require_point(sys, x);
    require_tangent(sys, xdot);
    const Vec force = sys.dL_dq(x.q, x.v, x.z) - xdot.pdot;
    const Vec legendre = sys.dL_dv(x.q, x.v, x.z) - x.p;
    const Vec kinematic = xdot.qdot - x.v;
    return concat({&force, &legendre, &kinematic});
}

struct DiracAxioms {
    Eigen::Index expected_dim = 0;
    Eigen::Index dimension = 0;      // rank of the graph basis
    double isotropy = 0.0;           // max |<<e_I, e_J>>| over basis pairs
    Eigen::Index orthogonal_dim = 0;  // dim of D-perp
    bool maximal = false;            // D-perp == D
};

/// Checks that graph(omega-flat) is a Dirac structure on R^N for an N x N component matrix.
inline DiracAxioms check_dirac_structure(const Mat& omega) {
    const Eigen::Index dim = omega.rows();
    DiracAxioms r;
    r.expected_dim = dim;

    // Basis rows (e_I, omega-flat(e_I)) with omega-flat(w) = omega(w, .) = omega^T w.
    Mat basis(dim, 2 * dim);
    basis.leftCols(dim) = Mat::Identity(dim, dim);
    basis.rightCols(dim) = (omega.transpose() * Mat::Identity(dim, dim)).transpose();
    r.dimension = numerical_rank(basis);

    // Symmetric pairing <<(w1, a1), (w2, a2)>> = a1(w2) + a2(w1).
    Mat g = Mat::Zero(2 * dim, 2 * dim);
    g.topRightCorner(dim, dim) = Mat::Identity(dim, dim);
    g.bottomLeftCorner(dim, dim) = Mat::Identity(dim, dim);
    const Mat pairing_matrix = basis * g * basis.transpose();
    r.isotropy = max_abs(pairing_matrix);

    // D-perp is the kernel of basis * g; D is maximal iff D-perp has dim N and spans the same space.
    Eigen::FullPivLU<Mat> lu(basis * g);
    lu.setThreshold(1e-10);
    const Mat perp = lu.kernel();
    r.orthogonal_dim = (lu.dimensionOfKernel() == 0) ? 0 : perp.cols();
    if (r.orthogonal_dim == dim) {
        Mat stacked(2 * dim, 2 * dim);
        stacked.topRows(dim) = basis;
        stacked.bottomRows(dim) = perp.transpose();
        r.maximal = numerical_rank(stacked) == dim;
    }
    return r;
}

inline constexpr double kIsotropyTolerance = 1e-12;

inline ReportFragment dirac_axioms_check(const GaugeSystem& sys, const std::vector<SternbergPoint>& points) {
    if (points.empty()) throw Error(ErrorCode::InvalidArgument, "dirac_axioms_check needs samples");
    double dim_defect = 0.0, isotropy = 0.0, failures = 0.0;
    for (const auto& x : points) {
        require_point(sys, x);
        const DiracAxioms a = check_dirac_structure(assemble_omega_sharp(sys, x.q, x.z).extended);
        dim_defect = std::max(dim_defect, std::abs(static_cast<double>(a.dimension - a.expected_dim)));
        isotropy = std::max(isotropy, a.isotropy);
        if (!a.maximal) failures += 1.0;
    }
    return {
        threshold_check("dirac.dimension", dim_defect, 0.0, points.size(), "max |dim D - (3n+m)|"),
        threshold_check("dirac.isotropy", isotropy, kIsotropyTolerance, points.size()),
        threshold_check("dirac.maximality", failures, 0.0, points.size(), "points where D-perp != D"),
    };
}

inline constexpr double kMinHessianReciprocalCondition = 1e-10;
// nested finite differences resolve d2L/dvdv only to about 1e-6 relative
inline constexpr double kMinDifferencedHessianReciprocalCondition = 1e-4;

inline double hessian_condition_floor(const GaugeSystem& sys) {
    return sys.has_analytic_hess_vv() ? kMinHessianReciprocalCondition : kMinDifferencedHessianReciprocalCondition;
}

struct ExplicitRates {
    Vec qdot, vdot, zdot;
    Vec pdot;  // d/dt (dL/dv), the momentum balance
};

/// zdot from the fiber equation Omega_F zdot = dL/dz - C^T v, which needs no velocity Hessian.
inline Vec fiber_rate(const GaugeSystem& sys, const GaugeCoupling& g, const Vec& q, const Vec& v, const Vec& z) {
    if (!sys.m()) return Vec(0);
    return g.omega_f.partialPivLu().solve(sys.dL_dz(q, v, z) - g.coupling().transpose() * v);
}

inline Vec fiber_rate(const GaugeSystem& sys, const Vec& q, const Vec& v, const Vec& z) {
    require_size(v, sys.n(), "v");
    return fiber_rate(sys, evaluate_coupling(sys, q, z), q, v, z);
}

/// Solves the equations of motion for (qdot, vdot, zdot) given (q, v, z), assuming a regular
/// Lagrangian. The fiber equation is algebraic in (q, v, z) and is solved first.
inline ExplicitRates reduce_to_explicit(const GaugeSystem& sys, const Vec& q, const Vec& v, const Vec& z) {
    require_size(v, sys.n(), "v");
    const GaugeCoupling g = evaluate_coupling(sys, q, z);
    const Mat c = g.coupling();
    const Mat f = g.field_strength();

    ExplicitRates r;
    r.qdot = v;
    r.zdot = fiber_rate(sys, g, q, v, z);
    r.pdot = sys.dL_dq(q, v, z) - f * v + c * r.zdot;

    const Mat hvv = sys.d2L_dvdv(q, v, z);
    if (reciprocal_condition(hvv) < hessian_condition_floor(sys))
        throw Error(ErrorCode::LagrangianDegenerate,
                    "d2L/dvdv is singular at q = " + format_point(q) + ", v = " + format_point(v));
    Vec rhs = r.pdot - sys.d2L_dvdq(q, v, z) * v;
    if (sys.m()) rhs -= sys.d2L_dvdz(q, v, z) * r.zdot;
    r.vdot = hvv.partialPivLu().solve(rhs);
    return r;
}

/// The bundle vector field at x, using p only through the caller's Legendre constraint.
inline BundleTangent vector_field(const GaugeSystem& sys, const SternbergPoint& x) {
    const ExplicitRates r = reduce_to_explicit(sys, x.q, x.v, x.z);
    return {r.qdot, r.vdot, r.pdot, r.zdot};
}

/// Point on the bundle with p = dL/dv(q, v, z).
inline SternbergPoint on_shell_point(const GaugeSystem& sys, const Vec& q, const Vec& v, const Vec& z) {
    return {q, v, sys.dL_dv(q, v, z), z};
}

/// Newton solve of dL/dv(q, v, z) = p for v.
inline Vec velocity_from_momentum(const GaugeSystem& sys, const Vec& q, const Vec& p, const Vec& z,
                                  Vec v_guess) {
    require_size(p, sys.n(), "p");
    require_size(v_guess, sys.n(), "v guess");
    Vec v = std::move(v_guess);
    const double tol = 1e-13 * std::max(1.0, max_abs(p));
    for (int it = 0; it < 50; ++it) {
        const Vec res = sys.dL_dv(q, v, z) - p;
        if (max_abs(res) <= tol) return v;
        const Mat h = sys.d2L_dvdv(q, v, z);
        if (reciprocal_condition(h) < hessian_condition_floor(sys))
            throw Error(ErrorCode::LagrangianDegenerate, "cannot invert the Legendre map at q = " + format_point(q));
        v -= h.partialPivLu().solve(res);
    }
    const Vec res = sys.dL_dv(q, v, z) - p;
    if (max_abs(res) <= 1e3 * tol) return v;
    throw Error(ErrorCode::NewtonDivergence, "Legendre inversion did not converge, residual " +
                                                 std::to_string(max_abs(res)));
}

/// Residual of x, xdot against alpha_F^{-1}(dL#(q, v, z)): the Lagrangian submanifold route.
inline double tulczyjew_residual(const GaugeSystem& sys, const SternbergPoint& x, const BundleTangent& xdot) {
    require_point(sys, x);
    require_tangent(sys, xdot);
    TulczyjewImage img;
    img.q = x.q;
    img.qdot = x.v;
    img.z = x.z;
    img.pi_q = sys.dL_dq(x.q, x.v, x.z);
    img.pi_v = sys.dL_dv(x.q, x.v, x.z);
    img.pi_z = sys.dL_dz(x.q, x.v, x.z);
    const PhaseTangent t = alpha_F_inv(sys, img);
    return std::max({max_abs(Vec(xdot.qdot - x.v)), max_abs(Vec(t.p - x.p)), max_abs(Vec(t.pdot - xdot.pdot)),
                     max_abs(Vec(t.zdot - xdot.zdot))});
}

} // namespace gaugeflow
