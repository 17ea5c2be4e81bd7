#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gaugeflow/dirac_dynamics.hpp"
#include "gaugeflow/errors.hpp"
#include "gaugeflow/gauge_model.hpp"
#include "gaugeflow/linalg.hpp"
#include "gaugeflow/sternberg_geometry.hpp"

namespace gaugeflow {

/// State of the reduced second-order system on the dual Sternberg bundle.
struct ReducedState {
    Vec q, v, z;
};

inline ReducedState step_rk4(const GaugeSystem& sys, const ReducedState& s, double h) {
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "rk4 step must be positive");
    auto rate = [&sys](const ReducedState& x) {
        const ExplicitRates r = reduce_to_explicit(sys, x.q, x.v, x.z);
        return ReducedState{r.qdot, r.vdot, r.zdot};
    };
    auto axpy = [](const ReducedState& x, double a, const ReducedState& k) {
        return ReducedState{x.q + a * k.q, x.v + a * k.v, x.z + a * k.z};
    };
    const ReducedState k1 = rate(s);
    const ReducedState k2 = rate(axpy(s, 0.5 * h, k1));
    const ReducedState k3 = rate(axpy(s, 0.5 * h, k2));
    const ReducedState k4 = rate(axpy(s, h, k3));
    const double w = h / 6.0;
    return ReducedState{s.q + w * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
                        s.v + w * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
                        s.z + w * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z)};
}

struct NewtonOptions {
    double tolerance = 1e-10;  // max-norm of the stationarity residual
    int max_iterations = 50;
    double jacobian_step = 1e-7;
};

/// Node state of the discrete Hamilton-Pontryagin scheme. pq and pz are the discrete
/// momenta conjugate to q and z carried across the node; the guesses warm-start Newton.
struct VariationalState {
    Vec q, z;
    Vec pq, pz;
    Vec v_guess, zdot_guess;
};

struct VariationalStep {
    VariationalState next;
    Vec v, p;  // per-step velocity and momentum unknowns
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> trace;  // residual norm per Newton iterate
};

/// Continuous Legendre map of the extended Lagrangian at (q, v, z): pq = dL/dv - <A, Phi>,
/// pz = dL_ext/dzdot = (z^abar on a slots, 0 on abar slots).
inline VariationalState make_variational_state(const GaugeSystem& sys, const Vec& q, const Vec& v,
                                               const Vec& z) {
    require_darboux(sys);
    const int half = sys.m() / 2;
    VariationalState s;
    s.q = q;
    s.z = z;
    s.pq = sys.dL_dv(q, v, z) - sys.A(q) * sys.Phi(z);
    s.pz = Vec::Zero(sys.m());
    s.pz.head(half) = z.tail(half);
    s.v_guess = v;
    s.zdot_guess = fiber_rate(sys, q, v, z);
    return s;
}

namespace detail {

/// Midpoint discretization of the extended Lagrangian over one step and its partial derivatives.
struct DiscreteTerms {
    Vec dL_dq, dL_dqdot, dL_dz, dL_dzdot, dL_dv;
};

inline DiscreteTerms discrete_terms(const GaugeSystem& sys, const Vec& q0, const Vec& z0, const Vec& q1,
                                    const Vec& z1, const Vec& v, double h) {
    const int n = sys.n(), m = sys.m(), half = m / 2;
    const Vec qm = 0.5 * (q0 + q1);
    const Vec zm = 0.5 * (z0 + z1);
    const Vec qd = (q1 - q0) / h;
    const Vec zd = (z1 - z0) / h;
    const Mat A = sys.A(qm);
    const Tensor3 dA = sys.dA(qm);
    const Vec phi = sys.Phi(zm);
    const Mat dphi = sys.dPhi(zm);

    DiscreteTerms t;
    t.dL_dq = sys.dL_dq(qm, v, zm);
    for (int i = 0; i < n; ++i) t.dL_dq[i] -= qd.dot(dA[i] * phi);
    t.dL_dqdot = -A * phi;
    t.dL_dz = sys.dL_dz(qm, v, zm) - dphi * (A.transpose() * qd);
    t.dL_dz.tail(half) += zd.head(half);
    t.dL_dzdot = Vec::Zero(m);
    t.dL_dzdot.head(half) = zm.tail(half);
    t.dL_dv = sys.dL_dv(qm, v, zm);
    return t;
}

} // namespace detail

/// Stationarity residual of the discrete action sum_k h [<p_k, (q_{k+1}-q_k)/h - v_k> + L_ext(midpoint)]
/// in the unknowns u = (q1, z1, v, p) given the node state s.
inline Vec variational_residual(const GaugeSystem& sys, const VariationalState& s, const Vec& u, double h) {
    const int n = sys.n(), m = sys.m();
    const Vec q1 = u.segment(0, n);
    const Vec z1 = u.segment(n, m);
    const Vec v = u.segment(n + m, n);
    const Vec p = u.segment(2 * n + m, n);
    const detail::DiscreteTerms t = detail::discrete_terms(sys, s.q, s.z, q1, z1, v, h);
    Vec r(3 * n + m);
    r.segment(0, n) = (q1 - s.q) / h - v;
    r.segment(n, n) = t.dL_dv - p;
    r.segment(2 * n, n) = p - 0.5 * h * t.dL_dq + t.dL_dqdot - s.pq;
    r.segment(3 * n, m) = -0.5 * h * t.dL_dz + t.dL_dzdot - s.pz;
    return r;
}

inline VariationalStep step_variational(const GaugeSystem& sys, const VariationalState& s, double h,
                                        const NewtonOptions& opt = {}) {
    require_darboux(sys);
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "variational step must be positive");
    const int n = sys.n(), m = sys.m(), dim = 3 * n + m;

    Vec u(dim);
    u.segment(0, n) = s.q + h * s.v_guess;
    u.segment(n, m) = s.z + h * s.zdot_guess;
    u.segment(n + m, n) = s.v_guess;
    u.segment(2 * n + m, n) = sys.dL_dv(s.q, s.v_guess, s.z);

    VariationalStep out;
    auto fail = [&](const std::string& why) {
        std::ostringstream os;
        os << why << "; residual trace:";
        for (double r : out.trace) os << ' ' << r;
        throw Error(ErrorCode::NewtonDivergence, os.str());
    };

    Vec r = variational_residual(sys, s, u, h);
    for (int it = 0;; ++it) {
        const double norm = max_abs(r);
        out.trace.push_back(norm);
        if (!std::isfinite(norm)) fail("non-finite residual");
        if (norm <= opt.tolerance) {
            out.iterations = it;
            out.residual = norm;
            break;
        }
        if (it == opt.max_iterations) fail("no convergence after " + std::to_string(it) + " iterations");

        Mat jac(dim, dim);
        Vec up = u;
        for (int c = 0; c < dim; ++c) {
            const double step = opt.jacobian_step * std::max(1.0, std::abs(u[c]));
            up[c] = u[c] + step;
            jac.col(c) = (variational_residual(sys, s, up, h) - r) / step;
            up[c] = u[c];
        }
        Eigen::FullPivLU<Mat> lu(jac);
        if (!lu.isInvertible()) fail("singular Newton jacobian");
        u -= lu.solve(r);
        r = variational_residual(sys, s, u, h);
    }

    const Vec q1 = u.segment(0, n);
    const Vec z1 = u.segment(n, m);
    out.v = u.segment(n + m, n);
    out.p = u.segment(2 * n + m, n);
    const detail::DiscreteTerms t = detail::discrete_terms(sys, s.q, s.z, q1, z1, out.v, h);
    out.next.q = q1;
    out.next.z = z1;
    out.next.pq = out.p + 0.5 * h * t.dL_dq + t.dL_dqdot;
    out.next.pz = 0.5 * h * t.dL_dz + t.dL_dzdot;
    out.next.v_guess = out.v;
    out.next.zdot_guess = (z1 - s.z) / h;
    return out;
}

/// Bundle point at a variational node: p from the carried momentum, v from the Legendre map.
/// A degenerate Legendre map cannot be inverted; v is then the last step velocity.
inline SternbergPoint variational_node_point(const GaugeSystem& sys, const VariationalState& s) {
    const Vec p = s.pq + sys.A(s.q) * sys.Phi(s.z);
    try {
        return {s.q, velocity_from_momentum(sys, s.q, p, s.z, s.v_guess), p, s.z};
    } catch (const Error& e) {
        if (e.code() != ErrorCode::LagrangianDegenerate) throw;
        return {s.q, s.v_guess, p, s.z};
    }
}

enum class Integrator { RK4, Variational };

constexpr std::string_view to_string(Integrator i) noexcept {
    return i == Integrator::RK4 ? "rk4" : "variational";
}

inline std::optional<Integrator> parse_integrator(std::string_view s) {
    if (s == "rk4") return Integrator::RK4;
    if (s == "variational") return Integrator::Variational;
    return std::nullopt;
}

struct StepDiagnostics {
    double intrinsic_residual = 0.0;
    double dirac_residual = 0.0;
    double tulczyjew_residual = 0.0;
    double energy = 0.0;
    int newton_iterations = 0;
    double stationarity_residual = 0.0;
    bool rates_from_vector_field = true;
};

/// Time-stamped bundle states with per-state diagnostics. On solver failure the states hold
/// everything up to the last good step and `failure` names the error.
struct Trajectory {
    std::vector<double> times;
    std::vector<SternbergPoint> states;
    std::vector<StepDiagnostics> diagnostics;
    std::optional<Error> failure;

    bool ok() const { return !failure.has_value(); }
    std::size_t size() const { return times.size(); }

    double max_intrinsic() const { return max_of(&StepDiagnostics::intrinsic_residual); }
    double max_dirac() const { return max_of(&StepDiagnostics::dirac_residual); }
    double max_tulczyjew() const { return max_of(&StepDiagnostics::tulczyjew_residual); }
    double max_stationarity() const { return max_of(&StepDiagnostics::stationarity_residual); }
    double max_formulation_gap() const {
        double w = 0.0;
        for (const auto& d : diagnostics) w = std::max(w, std::abs(d.intrinsic_residual - d.dirac_residual));
        return w;
    }

private:
    double max_of(double StepDiagnostics::*field) const {
        double w = 0.0;
        for (const auto& d : diagnostics) w = std::max(w, d.*field);
        return w;
    }
};

struct SimulationOptions {
    Integrator integrator = Integrator::RK4;
    double h = 1e-3;
    double t_start = 0.0;
    double t_end = 1.0;
    NewtonOptions newton{};
    bool diagnostics = true;
};

namespace detail {

inline void fill_state_diagnostics(const GaugeSystem& sys, const BundleLayout& l, Trajectory& traj, std::size_t k) {
    const std::size_t count = traj.states.size();
    const SternbergPoint& x = traj.states[k];
    StepDiagnostics& d = traj.diagnostics[k];
    d.energy = generalized_energy(sys, x);
    BundleTangent xdot;
    try {
        xdot = vector_field(sys, x);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::LagrangianDegenerate || count < 2) throw;
        const std::size_t a = (k + 1 < count) ? k : k - 1;
        const double dt = traj.times[a + 1] - traj.times[a];
        xdot = BundleTangent::unpack(l, (traj.states[a + 1].pack() - traj.states[a].pack()) / dt);
        d.rates_from_vector_field = false;
    }
    d.intrinsic_residual = intrinsic_residual(sys, x, xdot).norm();
    d.dirac_residual = dirac_inclusion_residual(sys, x, xdot);
    if (d.rates_from_vector_field) d.tulczyjew_residual = tulczyjew_residual(sys, x, xdot);
}

/// Diagnostics for every stored state. A state whose model evaluation fails truncates the
/// trajectory there and is recorded as the failure.
inline void fill_diagnostics(const GaugeSystem& sys, Trajectory& traj) {
    const BundleLayout l{sys.n(), sys.m()};
    const std::size_t count = traj.states.size();
    for (std::size_t k = 0; k < count; ++k) {
        try {
            fill_state_diagnostics(sys, l, traj, k);
        } catch (const Error& e) {
            if (k == 0) throw;
            traj.times.resize(k);
            traj.states.resize(k);
            traj.diagnostics.resize(k);
            if (!traj.failure) traj.failure = e;
            return;
        }
    }
}

} // namespace detail

/// Fixed-step integration from (q0, v0, z0). Stops early, keeping the good prefix, when the
/// stepper fails; precondition violations throw.
inline Trajectory simulate(const GaugeSystem& sys, const ReducedState& initial, const SimulationOptions& opt) {
    require_size(initial.q, sys.n(), "initial q");
    require_size(initial.v, sys.n(), "initial v");
    require_size(initial.z, sys.m(), "initial z");
    if (!(opt.h > 0.0)) throw Error(ErrorCode::InvalidArgument, "h must be positive");
    if (!(opt.t_end > opt.t_start)) throw Error(ErrorCode::InvalidArgument, "t_end must exceed t_start");
    if (opt.integrator == Integrator::Variational) require_darboux(sys);

    const double span = opt.t_end - opt.t_start;
    const auto steps = static_cast<long long>(std::ceil(span / opt.h - 1e-9));

    Trajectory traj;
    traj.times.reserve(static_cast<std::size_t>(steps + 1));
    traj.states.reserve(static_cast<std::size_t>(steps + 1));
    traj.diagnostics.reserve(static_cast<std::size_t>(steps + 1));
    traj.times.push_back(opt.t_start);
    traj.states.push_back(on_shell_point(sys, initial.q, initial.v, initial.z));
    traj.diagnostics.emplace_back();

    auto step_size = [&](long long k) {
        return (k + 1 == steps) ? opt.t_end - (opt.t_start + static_cast<double>(k) * opt.h) : opt.h;
    };
    auto time_at = [&](long long k) {
        return (k == steps) ? opt.t_end : opt.t_start + static_cast<double>(k) * opt.h;
    };

    try {
        if (opt.integrator == Integrator::RK4) {
            ReducedState s = initial;
            for (long long k = 0; k < steps; ++k) {
                s = step_rk4(sys, s, step_size(k));
                traj.times.push_back(time_at(k + 1));
                traj.states.push_back(on_shell_point(sys, s.q, s.v, s.z));
                traj.diagnostics.emplace_back();
            }
        } else {
            VariationalState s = make_variational_state(sys, initial.q, initial.v, initial.z);
            for (long long k = 0; k < steps; ++k) {
                VariationalStep st = step_variational(sys, s, step_size(k), opt.newton);
                s = std::move(st.next);
                traj.times.push_back(time_at(k + 1));
                traj.states.push_back(variational_node_point(sys, s));
                StepDiagnostics d;
                d.newton_iterations = st.iterations;
                d.stationarity_residual = st.residual;
                traj.diagnostics.push_back(d);
                s.v_guess = traj.states.back().v;
            }
        }
    } catch (const Error& e) {
        traj.failure = e;
    }

    if (opt.diagnostics) detail::fill_diagnostics(sys, traj);
    return traj;
}

} // namespace gaugeflow
