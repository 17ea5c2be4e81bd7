#pragma once

#include <cmath>
#include <functional>

#include "gaugeflow/linalg.hpp"

namespace gaugeflow::fd {

/// Cube root of double epsilon; balances truncation against round-off for central differences.
inline constexpr double kRelativeStep = 6.06e-6;

inline double step_for(double x) { return kRelativeStep * std::max(1.0, std::abs(x)); }

/// Central-difference gradient of a scalar function.
template <typename F>
Vec gradient(F&& f, const Vec& x) {
    Vec g(x.size());
    Vec xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step_for(x[i]);
        xp[i] = x[i] + h;
        const double fp = f(xp);
        xp[i] = x[i] - h;
        const double fm = f(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Central-difference Jacobian J(r, c) = d f_r / d x_c of a vector function.
template <typename F>
Mat jacobian(F&& f, const Vec& x, Eigen::Index out_dim) {
    Mat jac(out_dim, x.size());
    Vec xp = x;
    for (Eigen::Index c = 0; c < x.size(); ++c) {
        const double h = step_for(x[c]);
        xp[c] = x[c] + h;
        const Vec fp = f(xp);
        xp[c] = x[c] - h;
        const Vec fm = f(xp);
        xp[c] = x[c];
        jac.col(c) = (fp - fm) / (2.0 * h);
    }
    return jac;
}

/// Central-difference derivative of a matrix function along each coordinate: out[c] = dF/dx_c.
template <typename F>
Tensor3 matrix_derivative(F&& f, const Vec& x, double fixed_step = 0.0) {
    Tensor3 out;
    out.reserve(static_cast<std::size_t>(x.size()));
    Vec xp = x;
    for (Eigen::Index c = 0; c < x.size(); ++c) {
        const double h = fixed_step > 0.0 ? fixed_step : step_for(x[c]);
        xp[c] = x[c] + h;
        const Mat fp = f(xp);
        xp[c] = x[c] - h;
        const Mat fm = f(xp);
        xp[c] = x[c];
        out.push_back((fp - fm) / (2.0 * h));
    }
    return out;
}

} // namespace gaugeflow::fd
