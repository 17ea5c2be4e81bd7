#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "gaugeflow/errors.hpp"

namespace gaugeflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Rank-3 array stored as one matrix per leading index.
using Tensor3 = std::vector<Mat>;

inline void require_size(const Vec& x, Eigen::Index expected, const char* what) {
    if (x.size() != expected) {
        std::ostringstream os;
        os << what << " has length " << x.size() << ", expected " << expected;
        throw Error(ErrorCode::DimensionMismatch, os.str());
    }
}

inline void require_shape(const Mat& a, Eigen::Index rows, Eigen::Index cols, const char* what) {
    if (a.rows() != rows || a.cols() != cols) {
        std::ostringstream os;
        os << what << " has shape " << a.rows() << "x" << a.cols() << ", expected " << rows << "x"
           << cols;
        throw Error(ErrorCode::DimensionMismatch, os.str());
    }
}

inline std::string format_point(const Vec& x) {
    std::string out = "[";
    char buf[32];
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i) out += ", ";
        const auto res = std::to_chars(buf, buf + sizeof buf, x[i]);
        out.append(buf, res.ptr);
    }
    return out + "]";
}

namespace detail {

template <typename Msg>
std::string message_of(const Msg& msg) {
    if constexpr (std::is_invocable_v<const Msg&>) return msg();
    else return std::string(msg);
}

} // namespace detail

/// `what` is a string or a callable producing one; callables are only invoked on failure.
template <typename Derived, typename Msg>
void require_finite(const Eigen::MatrixBase<Derived>& a, const Msg& what) {
    if (!a.allFinite()) throw Error(ErrorCode::ModelEvaluation, detail::message_of(what) + " returned NaN/Inf");
}

template <typename Msg>
void require_finite(double a, const Msg& what) {
    if (!std::isfinite(a)) throw Error(ErrorCode::ModelEvaluation, detail::message_of(what) + " returned NaN/Inf");
}

/// Reciprocal 2-norm condition number sigma_min / sigma_max (1 for empty matrices).
inline double reciprocal_condition(const Mat& a) {
    if (a.size() == 0) return 1.0;
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& s = svd.singularValues();
    if (s[0] == 0.0) return 0.0;
    return s[s.size() - 1] / s[0];
}

inline Eigen::Index numerical_rank(const Mat& a, double rel_tol = 1e-10) {
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& s = svd.singularValues();
    const double cutoff = rel_tol * std::max(1.0, s[0]);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] > cutoff) ++r;
    return r;
}

inline double max_abs(const Vec& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; }
inline double max_abs(const Mat& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; }

/// Concatenate vectors end to end.
inline Vec concat(std::initializer_list<const Vec*> parts) {
    Eigen::Index total = 0;
    for (const Vec* p : parts) total += p->size();
    Vec out(total);
    Eigen::Index at = 0;
    for (const Vec* p : parts) {
        out.segment(at, p->size()) = *p;
        at += p->size();
    }
    return out;
}

} // namespace gaugeflow
