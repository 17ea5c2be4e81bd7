#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gaugeflow/errors.hpp"
#include "gaugeflow/finite_difference.hpp"
#include "gaugeflow/linalg.hpp"
#include "gaugeflow/report.hpp"

namespace gaugeflow {

/// Pairing of g* with g. Both are identified with R^d through the Euclidean inner product.
inline double pairing(const Vec& xi, const Vec& eta) {
    if (xi.size() != eta.size()) {
        std::ostringstream os;
        os << "pairing of lengths " << xi.size() << " and " << eta.size();
        throw Error(ErrorCode::DimensionMismatch, os.str());
    }
    return xi.dot(eta);
}

struct LieAlgebraSpec {
    int dim = 0;
    /// c[k][i][j] flattened as k*d*d + i*d + j. Metadata only; the dynamics never read it.
    std::optional<std::vector<double>> structure_constants;

    double structure_constant(int k, int i, int j) const {
        if (!structure_constants) return 0.0;
        return (*structure_constants)[static_cast<std::size_t>((k * dim + i) * dim + j)];
    }

    void validate() const {
        if (dim < 0) throw Error(ErrorCode::InvalidArgument, "algebra dimension is negative");
        if (!structure_constants) return;
        const auto d = static_cast<std::size_t>(dim);
        if (structure_constants->size() != d * d * d)
            throw Error(ErrorCode::DimensionMismatch, "structure constants must have d^3 entries");
        for (int k = 0; k < dim; ++k)
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    if (structure_constant(k, i, j) != -structure_constant(k, j, i))
                        throw Error(ErrorCode::InvalidArgument,
                                    "structure constants are not antisymmetric in (i, j)");
    }
};

/// Local connection one-form A. Row i of value(q) is A_i in g.
struct ConnectionForm {
    int n = 0;
    int d = 0;
    std::function<Mat(const Vec&)> value;
    /// jacobian(q)[j](i, k) = d A_i^k / d q^j. Central differences are used when empty.
    std::function<Tensor3(const Vec&)> jacobian;

    bool has_analytic_jacobian() const { return static_cast<bool>(jacobian); }

    Mat evaluate(const Vec& q) const {
        Mat a = value(q);
        require_shape(a, n, d, "connection value");
        require_finite(a, [&] { return "connection at q = " + format_point(q); });
        return a;
    }

    Tensor3 derivative(const Vec& q) const {
        Tensor3 out = jacobian ? jacobian(q)
                               : fd::matrix_derivative([this](const Vec& x) { return evaluate(x); }, q);
        if (out.size() != static_cast<std::size_t>(n))
            throw Error(ErrorCode::DimensionMismatch, "connection jacobian must have n slices");
        for (const auto& slice : out) {
            require_shape(slice, n, d, "connection jacobian slice");
            require_finite(slice, [&] { return "connection jacobian at q = " + format_point(q); });
        }
        return out;
    }

    static ConnectionForm zero(int n, int d) {
        ConnectionForm c;
        c.n = n;
        c.d = d;
        c.value = [n, d](const Vec&) { return Mat::Zero(n, d).eval(); };
        c.jacobian = [n, d](const Vec&) { return Tensor3(static_cast<std::size_t>(n), Mat::Zero(n, d)); };
        return c;
    }
};

/// Moment map Phi: F -> g*. Row alpha of jacobian(z) is d Phi / d z^alpha.
struct MomentMap {
    int m = 0;
    int d = 0;
    std::function<Vec(const Vec&)> value;
    std::function<Mat(const Vec&)> jacobian;

    bool has_analytic_jacobian() const { return static_cast<bool>(jacobian); }

    Vec evaluate(const Vec& z) const {
        Vec phi = value(z);
        require_size(phi, d, "moment map value");
        require_finite(phi, [&] { return "moment map at z = " + format_point(z); });
        return phi;
    }

    Mat derivative(const Vec& z) const {
        Mat out;
        if (jacobian) {
            out = jacobian(z);
        } else {
            out = fd::jacobian([this](const Vec& x) { return evaluate(x); }, z, d).transpose();
        }
        require_shape(out, m, d, "moment map jacobian");
        require_finite(out, [&] { return "moment map jacobian at z = " + format_point(z); });
        return out;
    }

    /// Point orbit (m = 0) with a fixed value, e.g. -e for a U(1) charge.
    static MomentMap constant(Vec phi) {
        MomentMap mm;
        mm.m = 0;
        mm.d = static_cast<int>(phi.size());
        mm.value = [phi](const Vec&) { return phi; };
        const auto d = phi.size();
        mm.jacobian = [d](const Vec&) { return Mat(0, d); };
        return mm;
    }
};

/// Symplectic form of the fiber F, as the antisymmetric component matrix Omega_{alpha beta}(z).
struct FiberSymplectic {
    int m = 0;
    std::function<Mat(const Vec&)> value;
    bool darboux = false;

    static constexpr double kAntisymmetryTol = 1e-12;
    static constexpr double kMinReciprocalCondition = 1e-10;

    /// [[0, I], [-I, 0]] in (z^a, z^abar) order.
    static Mat darboux_matrix(int m) {
        Mat j = Mat::Zero(m, m);
        const int half = m / 2;
        j.topRightCorner(half, half) = Mat::Identity(half, half);
        j.bottomLeftCorner(half, half) = -Mat::Identity(half, half);
        return j;
    }

    static FiberSymplectic canonical(int m) {
        FiberSymplectic f;
        f.m = m;
        f.darboux = true;
        const Mat j = darboux_matrix(m);
        f.value = [j](const Vec&) { return j; };
        return f;
    }

    /// Evaluates and enforces antisymmetry and invertibility.
    Mat evaluate(const Vec& z) const {
        Mat w = value(z);
        require_shape(w, m, m, "fiber form");
        require_finite(w, [&] { return "fiber form at z = " + format_point(z); });
        if (m == 0) return w;
        if (max_abs(Mat(w + w.transpose())) > kAntisymmetryTol)
            throw Error(ErrorCode::InvalidArgument,
                        "fiber form is not antisymmetric at z = " + format_point(z));
        if (reciprocal_condition(w) < kMinReciprocalCondition)
            throw Error(ErrorCode::FiberFormSingular, "at z = " + format_point(z));
        return w;
    }
};

/// Lagrangian L(q, v, z) on the dual Sternberg bundle, with optional analytic derivatives.
struct LagrangianSharp {
    using Scalar = std::function<double(const Vec&, const Vec&, const Vec&)>;
    using Vector = std::function<Vec(const Vec&, const Vec&, const Vec&)>;
    using Matrix = std::function<Mat(const Vec&, const Vec&, const Vec&)>;

    Scalar value;
    Vector grad_q, grad_v, grad_z;
    Matrix hess_vv;
    /// hess_vq(i, j) = d^2 L / dv^i dq^j; hess_vz(i, alpha) = d^2 L / dv^i dz^alpha.
    Matrix hess_vq, hess_vz;
};

/// The full model: configuration R^n, algebra R^d, fiber R^m and all geometric data.
/// Immutable after construction; callables must be pure.
class GaugeSystem {
public:
    GaugeSystem(LieAlgebraSpec algebra, ConnectionForm connection, MomentMap moment,
                FiberSymplectic fiber_form, LagrangianSharp lagrangian, std::string label = {})
        : algebra_(std::move(algebra)),
          connection_(std::move(connection)),
          moment_(std::move(moment)),
          fiber_(std::move(fiber_form)),
          lagrangian_(std::move(lagrangian)),
          label_(std::move(label)) {
        validate();
    }

    int n() const { return connection_.n; }
    int m() const { return fiber_.m; }
    int d() const { return algebra_.dim; }
    int bundle_dim() const { return 3 * n() + m(); }
    const std::string& label() const { return label_; }

    const LieAlgebraSpec& algebra() const { return algebra_; }
    const ConnectionForm& connection() const { return connection_; }
    const MomentMap& moment() const { return moment_; }
    const FiberSymplectic& fiber_form() const { return fiber_; }
    const LagrangianSharp& lagrangian() const { return lagrangian_; }

    bool darboux() const { return m() == 0 || fiber_.darboux; }

    Mat A(const Vec& q) const { return connection_.evaluate(q); }
    Tensor3 dA(const Vec& q) const { return connection_.derivative(q); }
    Vec Phi(const Vec& z) const { return moment_.evaluate(z); }
    Mat dPhi(const Vec& z) const { return moment_.derivative(z); }
    Mat omega_fiber(const Vec& z) const { return fiber_.evaluate(z); }

    double L(const Vec& q, const Vec& v, const Vec& z) const {
        const double val = lagrangian_.value(q, v, z);
        require_finite(val, [&] { return "lagrangian at " + where(q, v, z); });
        return val;
    }

    Vec dL_dq(const Vec& q, const Vec& v, const Vec& z) const {
        return checked(lagrangian_.grad_q ? lagrangian_.grad_q(q, v, z)
                                          : fd::gradient([&](const Vec& x) { return L(x, v, z); }, q),
                       n(), "dL/dq", q, v, z);
    }
    Vec dL_dv(const Vec& q, const Vec& v, const Vec& z) const {
        return checked(lagrangian_.grad_v ? lagrangian_.grad_v(q, v, z)
                                          : fd::gradient([&](const Vec& x) { return L(q, x, z); }, v),
                       n(), "dL/dv", q, v, z);
    }
    Vec dL_dz(const Vec& q, const Vec& v, const Vec& z) const {
        return checked(lagrangian_.grad_z ? lagrangian_.grad_z(q, v, z)
                                          : fd::gradient([&](const Vec& x) { return L(q, v, x); }, z),
                       m(), "dL/dz", q, v, z);
    }

    Mat d2L_dvdv(const Vec& q, const Vec& v, const Vec& z) const {
        Mat h = lagrangian_.hess_vv
                    ? lagrangian_.hess_vv(q, v, z)
                    : fd::jacobian([&](const Vec& x) { return dL_dv(q, x, z); }, v, n());
        return checked(h, n(), n(), "d2L/dvdv", q, v, z);
    }
    Mat d2L_dvdq(const Vec& q, const Vec& v, const Vec& z) const {
        Mat h = lagrangian_.hess_vq
                    ? lagrangian_.hess_vq(q, v, z)
                    : fd::jacobian([&](const Vec& x) { return dL_dv(x, v, z); }, q, n());
        return checked(h, n(), n(), "d2L/dvdq", q, v, z);
    }
    Mat d2L_dvdz(const Vec& q, const Vec& v, const Vec& z) const {
        Mat h = lagrangian_.hess_vz
                    ? lagrangian_.hess_vz(q, v, z)
                    : fd::jacobian([&](const Vec& x) { return dL_dv(q, v, x); }, z, n());
        return checked(h, n(), m(), "d2L/dvdz", q, v, z);
    }

    /// Names of derivatives that are not supplied and fall back to central differences.
    bool has_analytic_hess_vv() const { return static_cast<bool>(lagrangian_.hess_vv); }

    std::vector<std::string> fd_fallbacks() const {
        std::vector<std::string> out;
        if (!connection_.has_analytic_jacobian()) out.emplace_back("connection.jacobian");
        if (!moment_.has_analytic_jacobian()) out.emplace_back("moment.jacobian");
        if (!lagrangian_.grad_q) out.emplace_back("lagrangian.grad_q");
        if (!lagrangian_.grad_v) out.emplace_back("lagrangian.grad_v");
        if (!lagrangian_.grad_z) out.emplace_back("lagrangian.grad_z");
        if (!lagrangian_.hess_vv) out.emplace_back("lagrangian.hess_vv");
        if (!lagrangian_.hess_vq) out.emplace_back("lagrangian.hess_vq");
        if (!lagrangian_.hess_vz) out.emplace_back("lagrangian.hess_vz");
        return out;
    }

private:
    void validate() const {
        algebra_.validate();
        if (connection_.n < 0) throw Error(ErrorCode::InvalidArgument, "n is negative");
        if (fiber_.m < 0 || fiber_.m % 2 != 0)
            throw Error(ErrorCode::InvalidArgument, "fiber dimension m must be even and >= 0");
        if (connection_.d != algebra_.dim || moment_.d != algebra_.dim)
            throw Error(ErrorCode::DimensionMismatch, "connection/moment algebra dimension differs from d");
        if (moment_.m != fiber_.m)
            throw Error(ErrorCode::DimensionMismatch, "moment map fiber dimension differs from m");
        if (!connection_.value || !moment_.value || !fiber_.value || !lagrangian_.value)
            throw Error(ErrorCode::InvalidArgument, "model callables must be set");
    }

    static std::string where(const Vec& q, const Vec& v, const Vec& z) {
        return "q = " + format_point(q) + ", v = " + format_point(v) + ", z = " + format_point(z);
    }

    static Vec checked(Vec x, int len, const char* what, const Vec& q, const Vec& v, const Vec& z) {
        require_size(x, len, what);
        require_finite(x, [&] { return std::string(what) + " at " + where(q, v, z); });
        return x;
    }
    static Mat checked(Mat x, int rows, int cols, const char* what, const Vec& q, const Vec& v,
                       const Vec& z) {
        require_shape(x, rows, cols, what);
        require_finite(x, [&] { return std::string(what) + " at " + where(q, v, z); });
        return x;
    }

    LieAlgebraSpec algebra_;
    ConnectionForm connection_;
    MomentMap moment_;
    FiberSymplectic fiber_;
    LagrangianSharp lagrangian_;
    std::string label_;
};

/// A sample point (q, v, z) on the dual Sternberg bundle.
struct ConfigSample {
    Vec q, v, z;
};

inline constexpr double kDerivativeTolerance = 1e-5;

namespace detail {

inline void track(double& worst, double deviation) { worst = std::max(worst, deviation); }

} // namespace detail

/// Compares every supplied analytic derivative with central differences of the underlying
/// value callable at each sample. One check per supplied derivative; fallbacks are noted.
inline ReportFragment validate_derivatives(const GaugeSystem& sys, const std::vector<ConfigSample>& samples,
                                           double tol = kDerivativeTolerance) {
    if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "validate_derivatives needs samples");
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "validate_derivatives needs tol > 0");

    const auto& conn = sys.connection();
    const auto& mom = sys.moment();
    const auto& lag = sys.lagrangian();
    const int n = sys.n();
    const int m = sys.m();

    struct Entry {
        std::string name;
        bool supplied;
        double worst = 0.0;
    };
    std::vector<Entry> entries = {
        {"connection.jacobian", conn.has_analytic_jacobian()},
        {"moment.jacobian", mom.has_analytic_jacobian()},
        {"lagrangian.grad_q", static_cast<bool>(lag.grad_q)},
        {"lagrangian.grad_v", static_cast<bool>(lag.grad_v)},
        {"lagrangian.grad_z", static_cast<bool>(lag.grad_z)},
        {"lagrangian.hess_vv", static_cast<bool>(lag.hess_vv)},
        {"lagrangian.hess_vq", static_cast<bool>(lag.hess_vq)},
        {"lagrangian.hess_vz", static_cast<bool>(lag.hess_vz)},
    };

    for (const auto& s : samples) {
        require_size(s.q, n, "sample q");
        require_size(s.v, n, "sample v");
        require_size(s.z, m, "sample z");
        try {
            if (entries[0].supplied) {
                const Tensor3 analytic = conn.derivative(s.q);
                const Tensor3 numeric =
                    fd::matrix_derivative([&](const Vec& x) { return conn.evaluate(x); }, s.q);
                for (int j = 0; j < n; ++j)
                    detail::track(entries[0].worst, max_abs(Mat(analytic[j] - numeric[j])));
            }
            if (entries[1].supplied && m > 0) {
                const Mat numeric =
                    fd::jacobian([&](const Vec& x) { return mom.evaluate(x); }, s.z, sys.d()).transpose();
                detail::track(entries[1].worst, max_abs(Mat(mom.derivative(s.z) - numeric)));
            }
            auto fd_grad = [&](int block) {
                if (block == 0) return fd::gradient([&](const Vec& x) { return sys.L(x, s.v, s.z); }, s.q);
                if (block == 1) return fd::gradient([&](const Vec& x) { return sys.L(s.q, x, s.z); }, s.v);
                return fd::gradient([&](const Vec& x) { return sys.L(s.q, s.v, x); }, s.z);
            };
            if (entries[2].supplied)
                detail::track(entries[2].worst, max_abs(Vec(sys.dL_dq(s.q, s.v, s.z) - fd_grad(0))));
            if (entries[3].supplied)
                detail::track(entries[3].worst, max_abs(Vec(sys.dL_dv(s.q, s.v, s.z) - fd_grad(1))));
            if (entries[4].supplied)
                detail::track(entries[4].worst, max_abs(Vec(sys.dL_dz(s.q, s.v, s.z) - fd_grad(2))));
            if (entries[5].supplied) {
                const Mat numeric = fd::jacobian([&](const Vec& x) { return sys.dL_dv(s.q, x, s.z); }, s.v, n);
                detail::track(entries[5].worst, max_abs(Mat(sys.d2L_dvdv(s.q, s.v, s.z) - numeric)));
            }
            if (entries[6].supplied) {
                const Mat numeric = fd::jacobian([&](const Vec& x) { return sys.dL_dv(x, s.v, s.z); }, s.q, n);
                detail::track(entries[6].worst, max_abs(Mat(sys.d2L_dvdq(s.q, s.v, s.z) - numeric)));
            }
            if (entries[7].supplied && m > 0) {
                const Mat numeric = fd::jacobian([&](const Vec& x) { return sys.dL_dv(s.q, s.v, x); }, s.z, n);
                detail::track(entries[7].worst, max_abs(Mat(sys.d2L_dvdz(s.q, s.v, s.z) - numeric)));
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ModelEvaluation) throw;
            throw Error(ErrorCode::ModelEvaluation,
                        std::string(e.what()) + " (sample q = " + format_point(s.q) +
                            ", v = " + format_point(s.v) + ", z = " + format_point(s.z) + ")");
        }
    }

    ReportFragment out;
    for (const auto& e : entries) {
        if (e.supplied) {
            out.push_back(threshold_check("derivatives." + e.name, e.worst, tol, samples.size()));
        } else {
            CheckResult r = threshold_check("derivatives." + e.name, 0.0, tol, samples.size(),
                                            "not supplied; central-difference fallback in use");
            out.push_back(std::move(r));
        }
    }
    return out;
}

/// Antisymmetry, Darboux consistency and invertibility of the fiber form over sample fibers.
inline ReportFragment check_fiber_form(const GaugeSystem& sys, const std::vector<Vec>& zs) {
    const auto& fiber = sys.fiber_form();
    double asym = 0.0, darboux_dev = 0.0, min_rcond = 1.0;
    const Mat reference = FiberSymplectic::darboux_matrix(fiber.m);
    for (const Vec& z : zs) {
        const Mat w = fiber.value(z);
        require_shape(w, fiber.m, fiber.m, "fiber form");
        asym = std::max(asym, max_abs(Mat(w + w.transpose())));
        if (fiber.darboux) darboux_dev = std::max(darboux_dev, max_abs(Mat(w - reference)));
        min_rcond = std::min(min_rcond, reciprocal_condition(w));
    }
    ReportFragment out;
    out.push_back(threshold_check("fiber.antisymmetry", asym, FiberSymplectic::kAntisymmetryTol, zs.size()));
    if (fiber.darboux)
        out.push_back(threshold_check("fiber.darboux", darboux_dev, 0.0, zs.size()));
    CheckResult inv;
    inv.name = "fiber.invertibility";
    inv.measured = min_rcond;
    inv.tolerance = FiberSymplectic::kMinReciprocalCondition;
    inv.passed = min_rcond >= FiberSymplectic::kMinReciprocalCondition;
    inv.samples = zs.size();
    inv.detail = "measured is the minimum reciprocal condition number";
    out.push_back(std::move(inv));
    return out;
}

} // namespace gaugeflow
