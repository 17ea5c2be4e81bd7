#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <system_error>

#include "json.hpp"

#include "gaugeflow/errors.hpp"
#include "gaugeflow/integrators.hpp"
#include "gaugeflow/linalg.hpp"
#include "gaugeflow/report.hpp"

namespace gaugeflow {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string csv_header(int n, int m) {
    std::string h = "t";
    for (const char* block : {"q", "v", "p"})
        for (int i = 0; i < n; ++i) h += std::string(",") + block + "_" + std::to_string(i);
    for (int a = 0; a < m; ++a) h += ",z_" + std::to_string(a);
    h += ",energy,intrinsic_residual,dirac_residual";
    return h;
}

/// One row per stored state; 1 + 3n + m + 3 columns.
inline void write_trajectory_csv(std::ostream& os, int n, int m, const Trajectory& traj) {
    os << csv_header(n, m) << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const SternbergPoint& x = traj.states[k];
        const StepDiagnostics& d = traj.diagnostics[k];
        std::string row = format_double(traj.times[k]);
        for (const Vec* block : {&x.q, &x.v, &x.p, &x.z})
            for (Eigen::Index i = 0; i < block->size(); ++i) row += "," + format_double((*block)[i]);
        row += "," + format_double(d.energy);
        row += "," + format_double(d.intrinsic_residual);
        row += "," + format_double(d.dirac_residual);
        os << row << '\n';
    }
}

inline nlohmann::json to_json(const Vec& x) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(x[i]);
    return a;
}

inline nlohmann::json to_json(const CheckResult& c) {
    return {{"name", c.name},         {"passed", c.passed},   {"measured", c.measured},
            {"tolerance", c.tolerance}, {"samples", c.samples}, {"seed", c.seed},
            {"detail", c.detail}};
}

inline nlohmann::json to_json(const VerificationReport& r) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    return {{"scenario", r.scenario}, {"seed", r.seed}, {"all_passed", r.all_passed()}, {"checks", checks}};
}

/// Run summary: config echo, status, final state and residual maxima.
inline nlohmann::json trajectory_summary(const nlohmann::json& config, const Trajectory& traj) {
    nlohmann::json s;
    s["config"] = config;
    s["status"] = traj.ok() ? "ok" : "solver-failure";
    if (!traj.ok())
        s["failure"] = {{"code", std::string(to_string(traj.failure->code()))}, {"message", traj.failure->what()}};
    s["stored_states"] = traj.size();
    if (traj.size()) {
        const SternbergPoint& x = traj.states.back();
        s["final"] = {{"t", traj.times.back()}, {"q", to_json(x.q)}, {"v", to_json(x.v)},
                      {"p", to_json(x.p)},      {"z", to_json(x.z)}, {"energy", traj.diagnostics.back().energy}};
    }
    s["max_residuals"] = {{"intrinsic", traj.max_intrinsic()},
                          {"dirac", traj.max_dirac()},
                          {"tulczyjew", traj.max_tulczyjew()},
                          {"formulation_gap", traj.max_formulation_gap()},
                          {"stationarity", traj.max_stationarity()}};
    return s;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
    f << text;
    if (!f) throw Error(ErrorCode::ConfigError, "failed writing " + path.string());
}

} // namespace gaugeflow
