#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "gaugeflow/errors.hpp"
#include "gaugeflow/finite_difference.hpp"
#include "gaugeflow/gauge_model.hpp"
#include "gaugeflow/linalg.hpp"
#include "gaugeflow/report.hpp"

namespace gaugeflow {

/// Offsets of the (q, p, z) blocks of the Sternberg phase space.
struct PhaseLayout {
    int n = 0, m = 0;
    int q() const { return 0; }
    int p() const { return n; }
    int z() const { return 2 * n; }
    int dim() const { return 2 * n + m; }
};

/// Offsets of the (q, v, p, z) blocks of the Sternberg-Pontryagin bundle.
struct BundleLayout {
    int n = 0, m = 0;
    int q() const { return 0; }
    int v() const { return n; }
    int p() const { return 2 * n; }
    int z() const { return 3 * n; }
    int dim() const { return 3 * n + m; }
};

/// Gauge data evaluated once at a base point (q, z).
struct GaugeCoupling {
    Mat A;        // n x d, row i = A_i
    Tensor3 dA;   // dA[j](i, k) = d A_i^k / d q^j
    Vec phi;      // d
    Mat dphi;     // m x d, row alpha = d Phi / d z^alpha
    Mat omega_f;  // m x m

    /// F(i, j) = <d_i A_j - d_j A_i, Phi>.
    Mat field_strength() const {
        const auto n = A.rows();
        Mat f(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                f(i, j) = dA[static_cast<std::size_t>(i)].row(j).dot(phi) -
                          dA[static_cast<std::size_t>(j)].row(i).dot(phi);
        return f;
    }

    /// C(i, alpha) = <A_i, d_alpha Phi>.
    Mat coupling() const { return A * dphi.transpose(); }

    /// s_i = <A_i, Phi>, the minimal-coupling shift.
    Vec shift() const { return A * phi; }
};

inline GaugeCoupling evaluate_coupling(const GaugeSystem& sys, const Vec& q, const Vec& z) {
    require_size(q, sys.n(), "q");
    require_size(z, sys.m(), "z");
    return GaugeCoupling{sys.A(q), sys.dA(q), sys.Phi(z), sys.dPhi(z), sys.omega_fiber(z)};
}

struct OmegaSharpMatrix {
    Vec q, z;
    Mat small;     // (q, p, z) order, symplectic on the Sternberg phase space
    Mat extended;  // (q, v, p, z) order, presymplectic on the Sternberg-Pontryagin bundle
};

/// Local Sternberg two-form
///   dq^i ^ dp_i + 1/2 Omega_ab dz^a ^ dz^b + 1/2 <d_iA_j - d_jA_i, Phi> dq^i ^ dq^j
///   - <A_i, d_a Phi> dq^i ^ dz^a
/// as its antisymmetric component matrix, plus its pullback with zero v rows and columns.
inline OmegaSharpMatrix assemble_omega_sharp(const GaugeSystem& sys, const Vec& q, const Vec& z) {
    const GaugeCoupling g = evaluate_coupling(sys, q, z);
    const int n = sys.n(), m = sys.m();
    const PhaseLayout ph{n, m};
    const BundleLayout bl{n, m};
    const Mat f = g.field_strength();
    const Mat c = g.coupling();

    OmegaSharpMatrix out;
    out.q = q;
    out.z = z;
    out.small = Mat::Zero(ph.dim(), ph.dim());
    out.small.block(ph.q(), ph.q(), n, n) = f;
    out.small.block(ph.q(), ph.p(), n, n) = Mat::Identity(n, n);
    out.small.block(ph.p(), ph.q(), n, n) = -Mat::Identity(n, n);
    out.small.block(ph.q(), ph.z(), n, m) = -c;
    out.small.block(ph.z(), ph.q(), m, n) = c.transpose();
    out.small.block(ph.z(), ph.z(), m, m) = g.omega_f;

    out.extended = Mat::Zero(bl.dim(), bl.dim());
    const int from[3] = {ph.q(), ph.p(), ph.z()};
    const int to[3] = {bl.q(), bl.p(), bl.z()};
    const int len[3] = {n, n, m};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            out.extended.block(to[a], to[b], len[a], len[b]) =
                out.small.block(from[a], from[b], len[a], len[b]);
    return out;
}

/// Theta# = (p_i - <A_i, Phi>) dq^i + z^abar dz^a in Darboux fiber coordinates.
struct ThetaSharpCovector {
    Vec theta_q, theta_p, theta_z;

    Vec phase_components() const { return concat({&theta_q, &theta_p, &theta_z}); }
};

inline void require_darboux(const GaugeSystem& sys) {
    if (!sys.darboux())
        throw Error(ErrorCode::RequiresDarboux, "fiber form of '" + sys.label() + "' is not Darboux");
}

inline ThetaSharpCovector theta_sharp(const GaugeSystem& sys, const Vec& q, const Vec& p, const Vec& z) {
    require_darboux(sys);
    require_size(p, sys.n(), "p");
    const int half = sys.m() / 2;
    ThetaSharpCovector th;
    th.theta_q = p - sys.A(q) * sys.Phi(z);
    th.theta_p = Vec::Zero(sys.n());
    th.theta_z = Vec::Zero(sys.m());
    th.theta_z.head(half) = z.tail(half);
    return th;
}

/// Central-difference exterior derivative of a one-form: (d theta)_{IJ} = d_I theta_J - d_J theta_I.
inline Mat exterior_derivative(const std::function<Vec(const Vec&)>& one_form, const Vec& y, double h) {
    const auto dim = y.size();
    Mat jac(dim, dim);  // jac(J, I) = d theta_J / d y^I
    Vec yp = y;
    for (Eigen::Index i = 0; i < dim; ++i) {
        yp[i] = y[i] + h;
        const Vec fp = one_form(yp);
        yp[i] = y[i] - h;
        const Vec fm = one_form(yp);
        yp[i] = y[i];
        jac.col(i) = (fp - fm) / (2.0 * h);
    }
    return jac.transpose() - jac;
}

/// Max over I < J < K of |d_I w_JK + d_J w_KI + d_K w_IJ| by central differences at y.
inline double closedness_residual(const std::function<Mat(const Vec&)>& two_form, const Vec& y, double h) {
    const Tensor3 d = fd::matrix_derivative(two_form, y, h);
    const auto dim = y.size();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = i + 1; j < dim; ++j)
            for (Eigen::Index k = j + 1; k < dim; ++k) {
                const double cyc = d[static_cast<std::size_t>(i)](j, k) +
                                   d[static_cast<std::size_t>(j)](k, i) +
                                   d[static_cast<std::size_t>(k)](i, j);
                worst = std::max(worst, std::abs(cyc));
            }
    return worst;
}

inline constexpr double kClosednessStep = 1e-4;
inline constexpr double kClosednessTolerance = 1e-5;

/// Omega# as a function of the phase coordinates y = (q, p, z).
inline std::function<Mat(const Vec&)> omega_sharp_field(const GaugeSystem& sys) {
    const PhaseLayout ph{sys.n(), sys.m()};
    return [&sys, ph](const Vec& y) {
        return assemble_omega_sharp(sys, y.segment(ph.q(), ph.n), y.segment(ph.z(), ph.m)).small;
    };
}

/// Numerical closedness of a phase-space two-form over base points (q, z); p is set to zero.
inline CheckResult exterior_derivative_check(const std::function<Mat(const Vec&)>& two_form, int n, int m,
                                             const std::vector<std::pair<Vec, Vec>>& points,
                                             double h = kClosednessStep,
                                             double tol = kClosednessTolerance) {
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "closedness step must be positive");
    double worst = 0.0;
    for (const auto& [q, z] : points) {
        Vec y = Vec::Zero(2 * n + m);
        y.head(n) = q;
        y.tail(m) = z;
        worst = std::max(worst, closedness_residual(two_form, y, h));
    }
    return threshold_check("omega_sharp.closedness", worst, tol, points.size());
}

inline CheckResult exterior_derivative_check(const GaugeSystem& sys,
                                             const std::vector<std::pair<Vec, Vec>>& points,
                                             double h = kClosednessStep,
                                             double tol = kClosednessTolerance) {
    return exterior_derivative_check(omega_sharp_field(sys), sys.n(), sys.m(), points, h, tol);
}

/// max |(-d Theta#) - Omega#| entrywise at phase points (q, p, z).
inline CheckResult theta_potential_check(const GaugeSystem& sys, const std::vector<Vec>& phase_points,
                                         double h = kClosednessStep, double tol = 1e-6) {
    const PhaseLayout ph{sys.n(), sys.m()};
    auto theta = [&](const Vec& y) {
        return theta_sharp(sys, y.segment(ph.q(), ph.n), y.segment(ph.p(), ph.n), y.segment(ph.z(), ph.m))
            .phase_components();
    };
    double worst = 0.0;
    for (const Vec& y : phase_points) {
        const Mat minus_d_theta = -exterior_derivative(theta, y, h);
        const Mat omega = assemble_omega_sharp(sys, y.segment(ph.q(), ph.n), y.segment(ph.z(), ph.m)).small;
        worst = std::max(worst, max_abs(Mat(minus_d_theta - omega)));
    }
    return threshold_check("theta_sharp.potential", worst, tol, phase_points.size());
}

/// A tangent vector (qdot, pdot, zdot) to the Sternberg phase space at (q, p, z).
struct PhaseTangent {
    Vec q, p, z;
    Vec qdot, pdot, zdot;
};

/// A covector on the dual Sternberg bundle at base point (q, qdot, z).
struct TulczyjewImage {
    Vec q, qdot, z;
    Vec pi_q, pi_v, pi_z;
};

/// Magnetized Tulczyjew map:
///   pi_q = pdot_i - <qdot^j (d_jA_i - d_iA_j), Phi> - <A_i, zdot^a d_a Phi>
///   pi_v = p
///   pi_z = Omega_ab zdot^b + <qdot^i A_i, d_a Phi>
inline TulczyjewImage alpha_F(const GaugeSystem& sys, const PhaseTangent& t) {
    require_size(t.qdot, sys.n(), "qdot");
    require_size(t.pdot, sys.n(), "pdot");
    require_size(t.zdot, sys.m(), "zdot");
    const GaugeCoupling g = evaluate_coupling(sys, t.q, t.z);
    const Mat f = g.field_strength();
    const Mat c = g.coupling();
    TulczyjewImage img{t.q, t.qdot, t.z, {}, {}, {}};
    img.pi_q = t.pdot + f * t.qdot - c * t.zdot;
    img.pi_v = t.p;
    img.pi_z = g.omega_f * t.zdot + c.transpose() * t.qdot;
    return img;
}

/// Inverse of alpha_F. Only the fiber form needs a factorization; the rest is back-substitution.
inline PhaseTangent alpha_F_inv(const GaugeSystem& sys, const TulczyjewImage& img) {
    require_size(img.pi_q, sys.n(), "pi_q");
    require_size(img.pi_v, sys.n(), "pi_v");
    require_size(img.pi_z, sys.m(), "pi_z");
    const GaugeCoupling g = evaluate_coupling(sys, img.q, img.z);
    const Mat f = g.field_strength();
    const Mat c = g.coupling();
    PhaseTangent t;
    t.q = img.q;
    t.z = img.z;
    t.qdot = img.qdot;
    t.p = img.pi_v;
    t.zdot = sys.m() ? Vec(g.omega_f.partialPivLu().solve(img.pi_z - c.transpose() * img.qdot))
                     : Vec(0);
    t.pdot = img.pi_q - f * img.qdot + c * t.zdot;
    return t;
}

} // namespace gaugeflow
