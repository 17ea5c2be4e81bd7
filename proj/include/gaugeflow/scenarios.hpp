#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gaugeflow/dirac_dynamics.hpp"
#include "gaugeflow/finite_difference.hpp"
#include "gaugeflow/gauge_model.hpp"
#include "gaugeflow/integrators.hpp"
#include "gaugeflow/linalg.hpp"

namespace gaugeflow {

/// Minkowski metric diag(-1, +1, +1, +1) with c = 1.
struct MinkowskiMetric {
    static Mat eta() {
        Mat m = Mat::Identity(4, 4);
        m(0, 0) = -1.0;
        return m;
    }
};

/// Matrix [b]_x with [b]_x w = b x w.
inline Mat cross_matrix(const Vec& b) {
    Mat m(3, 3);
    m << 0.0, -b[2], b[1], b[2], 0.0, -b[0], -b[1], b[0], 0.0;
    return m;
}

/// Static electromagnetic potentials on R^3 with charge e. E = -grad phi, B = curl A.
struct EMFields {
    std::function<double(const Vec&)> phi;
    std::function<Vec(const Vec&)> grad_phi;
    std::function<Vec(const Vec&)> a_vec;
    /// a_jacobian(q)(i, j) = d A_i / d q^j.
    std::function<Mat(const Vec&)> a_jacobian;
    double e = 1.0;

    Vec potential_gradient(const Vec& q) const {
        return grad_phi ? grad_phi(q) : fd::gradient(phi, q);
    }
    Mat vector_potential_jacobian(const Vec& q) const {
        return a_jacobian ? a_jacobian(q) : fd::jacobian(a_vec, q, 3);
    }
    Vec electric(const Vec& q) const { return -potential_gradient(q); }
    Vec magnetic(const Vec& q) const {
        const Mat j = vector_potential_jacobian(q);
        Vec b(3);
        b << j(2, 1) - j(1, 2), j(0, 2) - j(2, 0), j(1, 0) - j(0, 1);
        return b;
    }
};

/// Field configuration used by the EM scenarios: uniform E and B, an optional point magnetic
/// dipole mu*z_hat at the origin, and an optional pure-gauge shift A -> A + grad chi with
/// chi = gauge * (sin x cos y + z^2 / 2 + x y).
struct EMFieldParams {
    double e = 1.0;
    std::array<double, 3> E{0.0, 0.0, 0.0};
    std::array<double, 3> B{0.0, 0.0, 1.0};
    double dipole = 0.0;
    double gauge = 0.0;
};

inline EMFields make_fields(const EMFieldParams& p) {
    const Vec E = Eigen::Map<const Vec>(p.E.data(), 3);
    const Vec B = Eigen::Map<const Vec>(p.B.data(), 3);
    const Mat half_bx = 0.5 * cross_matrix(B);
    Vec mu = Vec::Zero(3);
    mu[2] = p.dipole;
    const Mat mux = cross_matrix(mu);
    const double dip = p.dipole;
    const double kappa = p.gauge;

    EMFields f;
    f.e = p.e;
    f.phi = [E](const Vec& q) { return -E.dot(q); };
    f.grad_phi = [E](const Vec&) { return Vec(-E); };
    f.a_vec = [half_bx, mux, dip, kappa](const Vec& q) {
        Vec a = half_bx * q;
        if (dip != 0.0) a += mux * q / std::pow(q.norm(), 3);
        if (kappa != 0.0) {
            Vec g(3);
            g << std::cos(q[0]) * std::cos(q[1]) + q[1], -std::sin(q[0]) * std::sin(q[1]) + q[0], q[2];
            a += kappa * g;
        }
        return a;
    };
    f.a_jacobian = [half_bx, mux, dip, kappa](const Vec& q) {
        Mat j = half_bx;
        if (dip != 0.0) {
            const double r = q.norm();
            j += mux / std::pow(r, 3) - 3.0 * (mux * q) * q.transpose() / std::pow(r, 5);
        }
        if (kappa != 0.0) {
            const double sxcy = std::sin(q[0]) * std::cos(q[1]);
            const double cxsy = std::cos(q[0]) * std::sin(q[1]);
            Mat h(3, 3);
            h << -sxcy, 1.0 - cxsy, 0.0, 1.0 - cxsy, -sxcy, 0.0, 0.0, 0.0, 1.0;
            j += kappa * h;
        }
        return j;
    };
    return f;
}

namespace detail {

inline LagrangianSharp zero_fiber_terms(LagrangianSharp l, int n) {
    l.grad_z = [](const Vec&, const Vec&, const Vec&) { return Vec(0); };
    l.hess_vz = [n](const Vec&, const Vec&, const Vec&) { return Mat(n, 0); };
    return l;
}

} // namespace detail

/// Nonrelativistic U(1) charge: n = 3, d = 1, m = 0, Phi = -e, L# = |v|^2 / 2 - e phi(q).
inline GaugeSystem make_em_nonrelativistic(const EMFields& fields) {
    const double e = fields.e;
    ConnectionForm conn;
    conn.n = 3;
    conn.d = 1;
    conn.value = [fields](const Vec& q) { return Mat(fields.a_vec(q)); };
    conn.jacobian = [fields](const Vec& q) {
        const Mat j = fields.vector_potential_jacobian(q);
        Tensor3 out(3, Mat(3, 1));
        for (int k = 0; k < 3; ++k) out[static_cast<std::size_t>(k)].col(0) = j.col(k);
        return out;
    };

    LagrangianSharp lag;
    lag.value = [fields, e](const Vec& q, const Vec& v, const Vec&) { return 0.5 * v.squaredNorm() - e * fields.phi(q); };
    lag.grad_q = [fields, e](const Vec& q, const Vec&, const Vec&) { return Vec(-e * fields.potential_gradient(q)); };
    lag.grad_v = [](const Vec&, const Vec& v, const Vec&) { return v; };
    lag.hess_vv = [](const Vec&, const Vec&, const Vec&) { return Mat(Mat::Identity(3, 3)); };
    lag.hess_vq = [](const Vec&, const Vec&, const Vec&) { return Mat(Mat::Zero(3, 3)); };
    lag = detail::zero_fiber_terms(std::move(lag), 3);

    LieAlgebraSpec u1{1, std::vector<double>{0.0}};
    return GaugeSystem(u1, conn, MomentMap::constant(Vec::Constant(1, -e)), FiberSymplectic::canonical(0), lag,
                       "em_nonrelativistic");
}

/// Relativistic U(1) charge on Minkowski space with A_mu = (phi, A_i), proper-time
/// parametrized: n = 4, L# = eta(v, v) / 2, Phi = -e. Fields are static.
inline GaugeSystem make_em_relativistic(const EMFields& fields) {
    const double e = fields.e;
    const Mat eta = MinkowskiMetric::eta();
    ConnectionForm conn;
    conn.n = 4;
    conn.d = 1;
    conn.value = [fields](const Vec& q) {
        const Vec x = q.tail(3);
        Mat a(4, 1);
        a(0, 0) = fields.phi(x);
        a.block(1, 0, 3, 1) = fields.a_vec(x);
        return a;
    };
    conn.jacobian = [fields](const Vec& q) {
        const Vec x = q.tail(3);
        const Vec gphi = fields.potential_gradient(x);
        const Mat ja = fields.vector_potential_jacobian(x);
        Tensor3 out(4, Mat::Zero(4, 1));
        for (int j = 0; j < 3; ++j) {
            Mat& slice = out[static_cast<std::size_t>(j + 1)];
            slice(0, 0) = gphi[j];
            slice.block(1, 0, 3, 1) = ja.col(j);
        }
        return out;
    };

    LagrangianSharp lag;
    lag.value = [eta](const Vec&, const Vec& v, const Vec&) { return 0.5 * v.dot(eta * v); };
    lag.grad_q = [](const Vec&, const Vec&, const Vec&) { return Vec(Vec::Zero(4)); };
    lag.grad_v = [eta](const Vec&, const Vec& v, const Vec&) { return Vec(eta * v); };
    lag.hess_vv = [eta](const Vec&, const Vec&, const Vec&) { return eta; };
    lag.hess_vq = [](const Vec&, const Vec&, const Vec&) { return Mat(Mat::Zero(4, 4)); };
    lag = detail::zero_fiber_terms(std::move(lag), 4);

    LieAlgebraSpec u1{1, std::vector<double>{0.0}};
    return GaugeSystem(u1, conn, MomentMap::constant(Vec::Constant(1, -e)), FiberSymplectic::canonical(0), lag,
                       "em_relativistic");
}

/// Ordinary Lagrangian mechanics on R^n: no gauge group, no fiber.
inline GaugeSystem make_trivial_gauge(int n, LagrangianSharp lagrangian) {
    if (!lagrangian.grad_z) lagrangian.grad_z = [](const Vec&, const Vec&, const Vec&) { return Vec(0); };
    if (!lagrangian.hess_vz)
        lagrangian.hess_vz = [n](const Vec&, const Vec&, const Vec&) { return Mat(n, 0); };
    return GaugeSystem(LieAlgebraSpec{0, std::nullopt}, ConnectionForm::zero(n, 0), MomentMap::constant(Vec(0)),
                       FiberSymplectic::canonical(0), std::move(lagrangian), "trivial_gauge");
}

/// L = |v|^2 / 2 - omega^2 |q|^2 / 2 - lambda |q|^4 / 4.
inline LagrangianSharp oscillator_lagrangian(int n, double omega, double lambda = 0.0) {
    const double w2 = omega * omega;
    LagrangianSharp l;
    l.value = [w2, lambda](const Vec& q, const Vec& v, const Vec&) {
        const double r2 = q.squaredNorm();
        return 0.5 * v.squaredNorm() - 0.5 * w2 * r2 - 0.25 * lambda * r2 * r2;
    };
    l.grad_q = [w2, lambda](const Vec& q, const Vec&, const Vec&) {
        return Vec(-(w2 + lambda * q.squaredNorm()) * q);
    };
    l.grad_v = [](const Vec&, const Vec& v, const Vec&) { return v; };
    l.hess_vv = [n](const Vec&, const Vec&, const Vec&) { return Mat(Mat::Identity(n, n)); };
    l.hess_vq = [n](const Vec&, const Vec&, const Vec&) { return Mat(Mat::Zero(n, n)); };
    return l;
}

/// L = sum_i v^i, degenerate (zero velocity Hessian).
inline LagrangianSharp linear_lagrangian(int n) {
    LagrangianSharp l;
    l.value = [](const Vec&, const Vec& v, const Vec&) { return v.sum(); };
    l.grad_q = [n](const Vec&, const Vec&, const Vec&) { return Vec(Vec::Zero(n)); };
    l.grad_v = [n](const Vec&, const Vec&, const Vec&) { return Vec(Vec::Ones(n)); };
    l.hess_vv = [n](const Vec&, const Vec&, const Vec&) { return Mat(Mat::Zero(n, n)); };
    l.hess_vq = [n](const Vec&, const Vec&, const Vec&) { return Mat(Mat::Zero(n, n)); };
    return l;
}

struct NonabelianParams {
    double g = 1.0;      // connection strength
    double omega = 1.0;  // configuration potential frequency
    double kappa = 1.0;  // fiber potential stiffness
    double beta = 0.2;   // velocity-fiber coupling
};

/// su(2)-like demo: n = 2, d = 3, m = 2 (Darboux). Every term of the equations of motion is
/// nonzero for generic states.
///   A_1 = g (sin q2, q1 q2 / 2, 0.3 cos q1),  A_2 = g (q1^2, exp(-q2^2) / 2, 0.2 q1 q2 + 0.1)
///   Phi = ((z1^2 - z2^2) / 2 + 0.3 z1, z1 z2, (z1^2 + z2^2) / 2 - 0.2 z2)
///   L#  = |v|^2 / 2 + beta z1 v2 - omega^2 |q|^2 / 2 - kappa |z|^2 / 2
inline GaugeSystem make_nonabelian_demo(const NonabelianParams& p = {}) {
    std::vector<double> eps(27, 0.0);
    auto at = [](int k, int i, int j) { return static_cast<std::size_t>((k * 3 + i) * 3 + j); };
    for (int k = 0; k < 3; ++k) {
        eps[at(k, (k + 1) % 3, (k + 2) % 3)] = 1.0;
        eps[at(k, (k + 2) % 3, (k + 1) % 3)] = -1.0;
    }
    LieAlgebraSpec su2{3, eps};

    const double g = p.g;
    ConnectionForm conn;
    conn.n = 2;
    conn.d = 3;
    conn.value = [g](const Vec& q) {
        Mat a(2, 3);
        a << std::sin(q[1]), 0.5 * q[0] * q[1], 0.3 * std::cos(q[0]),
            q[0] * q[0], 0.5 * std::exp(-q[1] * q[1]), 0.2 * q[0] * q[1] + 0.1;
        return Mat(g * a);
    };
    conn.jacobian = [g](const Vec& q) {
        Tensor3 out(2, Mat(2, 3));
        out[0] << 0.0, 0.5 * q[1], -0.3 * std::sin(q[0]),
            2.0 * q[0], 0.0, 0.2 * q[1];
        out[1] << std::cos(q[1]), 0.5 * q[0], 0.0,
            0.0, -q[1] * std::exp(-q[1] * q[1]), 0.2 * q[0];
        out[0] *= g;
        out[1] *= g;
        return out;
    };

    MomentMap mom;
    mom.m = 2;
    mom.d = 3;
    mom.value = [](const Vec& z) {
        Vec phi(3);
        phi << 0.5 * (z[0] * z[0] - z[1] * z[1]) + 0.3 * z[0], z[0] * z[1], 0.5 * (z[0] * z[0] + z[1] * z[1]) - 0.2 * z[1];
        return phi;
    };
    mom.jacobian = [](const Vec& z) {
        Mat j(2, 3);
        j << z[0] + 0.3, z[1], z[0],
            -z[1], z[0], z[1] - 0.2;
        return j;
    };

    const double w2 = p.omega * p.omega, kappa = p.kappa, beta = p.beta;
    LagrangianSharp lag;
    lag.value = [=](const Vec& q, const Vec& v, const Vec& z) {
        return 0.5 * v.squaredNorm() + beta * z[0] * v[1] - 0.5 * w2 * q.squaredNorm() - 0.5 * kappa * z.squaredNorm();
    };
    lag.grad_q = [=](const Vec& q, const Vec&, const Vec&) { return Vec(-w2 * q); };
    lag.grad_v = [=](const Vec&, const Vec& v, const Vec& z) {
        Vec gv = v;
        gv[1] += beta * z[0];
        return gv;
    };
    lag.grad_z = [=](const Vec&, const Vec& v, const Vec& z) {
        Vec gz(2);
        gz << beta * v[1] - kappa * z[0], -kappa * z[1];
        return gz;
    };
    lag.hess_vv = [](const Vec&, const Vec&, const Vec&) { return Mat(Mat::Identity(2, 2)); };
    lag.hess_vq = [](const Vec&, const Vec&, const Vec&) { return Mat(Mat::Zero(2, 2)); };
    lag.hess_vz = [=](const Vec&, const Vec&, const Vec&) {
        Mat h = Mat::Zero(2, 2);
        h(1, 0) = beta;
        return h;
    };

    return GaugeSystem(su2, conn, mom, FiberSymplectic::canonical(2), lag, "nonabelian_demo");
}

// Closed-form ground truth.

/// Charge e in uniform B = (0, 0, b), E = 0, unit mass: (position, velocity) at time t.
inline std::pair<Vec, Vec> cyclotron_solution(const Vec& q0, const Vec& v0, double e, double b, double t) {
    const double w = e * b;
    Vec q(3), v(3);
    if (w == 0.0) {
        q = q0 + t * v0;
        v = v0;
        return {q, v};
    }
    const double c = std::cos(w * t), s = std::sin(w * t);
    v << v0[0] * c + v0[1] * s, -v0[0] * s + v0[1] * c, v0[2];
    q << q0[0] + (v0[0] * s - v0[1] * c + v0[1]) / w, q0[1] + (v0[0] * c - v0[0] + v0[1] * s) / w,
        q0[2] + v0[2] * t;
    return {q, v};
}

/// Harmonic oscillator L = v^2/2 - omega^2 q^2/2.
inline std::pair<double, double> oscillator_solution(double q0, double v0, double omega, double t) {
    const double c = std::cos(omega * t), s = std::sin(omega * t);
    return {q0 * c + v0 / omega * s, -q0 * omega * s + v0 * c};
}

/// Relativistic scenario with phi = -E0 x, A = 0 (A_0 = phi convention): proper-time solution of
///   vdot^0 = -k v^1, vdot^1 = -k v^0, k = e E0, from q(0) = 0 and v(0) = (v0_0, v0_1, 0, 0).
inline std::pair<Vec, Vec> relativistic_electric_solution(double v00, double v01, double k, double tau) {
    const double ch = std::cosh(k * tau), sh = std::sinh(k * tau);
    Vec q = Vec::Zero(4), v = Vec::Zero(4);
    v[0] = v00 * ch - v01 * sh;
    v[1] = v01 * ch - v00 * sh;
    q[0] = (v00 * sh - v01 * (ch - 1.0)) / k;
    q[1] = (v01 * sh - v00 * (ch - 1.0)) / k;
    return {q, v};
}

} // namespace gaugeflow
