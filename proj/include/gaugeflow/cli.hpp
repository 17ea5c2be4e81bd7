#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "gaugeflow/dirac_dynamics.hpp"
#include "gaugeflow/errors.hpp"
#include "gaugeflow/gauge_model.hpp"
#include "gaugeflow/integrators.hpp"
#include "gaugeflow/io.hpp"
#include "gaugeflow/log.hpp"
#include "gaugeflow/registry.hpp"
#include "gaugeflow/report.hpp"
#include "gaugeflow/sternberg_geometry.hpp"

namespace gaugeflow {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitSolverFailure = 2, kExitConfigError = 3 };

struct OutputPaths {
    std::string trajectory = "trajectory.csv";
    std::string summary = "summary.json";
    std::string report = "report.json";
};

struct RunConfig {
    std::string scenario;
    ParamMap params;
    Integrator integrator = Integrator::RK4;
    double h = 0.0;
    double t_start = 0.0;
    double t_end = 0.0;
    std::optional<Vec> q, v, p, z;
    OutputPaths outputs;
    std::uint64_t seed = 0;
    bool record_wall_time = false;
    NewtonOptions newton{};
    nlohmann::json raw;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& field, const std::string& why) {
    throw Error(ErrorCode::ConfigError, field + ": " + why);
}

inline double number_field(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number()) config_fail(field, "expected a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) config_fail(field, "must be finite");
    return x;
}

inline Vec array_field(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array()) config_fail(field, "expected an array of numbers");
    Vec x(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        x[static_cast<Eigen::Index>(i)] = number_field(j[i], field + "[" + std::to_string(i) + "]");
    return x;
}

inline std::string string_field(const nlohmann::json& j, const std::string& field) {
    if (!j.is_string()) config_fail(field, "expected a string");
    return j.get<std::string>();
}

template <typename F>
void for_each_member(const nlohmann::json& obj, const std::string& field, F&& f) {
    if (!obj.is_object()) config_fail(field, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) f(it.key(), it.value());
}

} // namespace detail

/// Schema-checks a parsed config. Every diagnostic starts with the offending field path.
inline RunConfig parse_config(const nlohmann::json& j) {
    using detail::config_fail;
    RunConfig c;
    c.raw = j;
    if (!j.is_object()) config_fail("<root>", "expected a JSON object");
    if (!j.contains("schema_version")) config_fail("schema_version", "missing");
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion)
        config_fail("schema_version", "unsupported, expected " + std::to_string(kSchemaVersion));

    bool have_scenario = false, have_h = false, have_t_end = false;
    detail::for_each_member(j, "<root>", [&](const std::string& key, const nlohmann::json& val) {
        if (key == "schema_version" || key == "description") {
        } else if (key == "scenario") {
            c.scenario = detail::string_field(val, key);
            have_scenario = true;
        } else if (key == "params") {
            detail::for_each_member(val, key, [&](const std::string& k, const nlohmann::json& x) {
                c.params[k] = detail::number_field(x, "params." + k);
            });
        } else if (key == "integrator") {
            const auto parsed = parse_integrator(detail::string_field(val, key));
            if (!parsed) config_fail(key, "expected \"rk4\" or \"variational\"");
            c.integrator = *parsed;
        } else if (key == "h") {
            c.h = detail::number_field(val, key);
            have_h = true;
        } else if (key == "t_start") {
            c.t_start = detail::number_field(val, key);
        } else if (key == "t_end") {
            c.t_end = detail::number_field(val, key);
            have_t_end = true;
        } else if (key == "initial") {
            detail::for_each_member(val, key, [&](const std::string& k, const nlohmann::json& x) {
                const std::string field = "initial." + k;
                if (k == "q") c.q = detail::array_field(x, field);
                else if (k == "v") c.v = detail::array_field(x, field);
                else if (k == "p") c.p = detail::array_field(x, field);
                else if (k == "z") c.z = detail::array_field(x, field);
                else config_fail(field, "unknown key (expected q, v, p, z)");
            });
            if (c.v && c.p) config_fail("initial", "give either v or p, not both");
        } else if (key == "outputs") {
            detail::for_each_member(val, key, [&](const std::string& k, const nlohmann::json& x) {
                const std::string field = "outputs." + k;
                if (k == "trajectory") c.outputs.trajectory = detail::string_field(x, field);
                else if (k == "summary") c.outputs.summary = detail::string_field(x, field);
                else if (k == "report") c.outputs.report = detail::string_field(x, field);
                else config_fail(field, "unknown key (expected trajectory, summary, report)");
            });
        } else if (key == "seed") {
            if (!val.is_number_integer() || (!val.is_number_unsigned() && val.get<std::int64_t>() < 0))
                config_fail(key, "expected a non-negative integer");
            c.seed = val.get<std::uint64_t>();
        } else if (key == "record_wall_time") {
            if (!val.is_boolean()) config_fail(key, "expected true or false");
            c.record_wall_time = val.get<bool>();
        } else if (key == "newton") {
            detail::for_each_member(val, key, [&](const std::string& k, const nlohmann::json& x) {
                const std::string field = "newton." + k;
                if (k == "tolerance") c.newton.tolerance = detail::number_field(x, field);
                else if (k == "max_iterations") {
                    if (!x.is_number_integer() || x.get<int>() < 1) config_fail(field, "expected a positive integer");
                    c.newton.max_iterations = x.get<int>();
                } else if (k == "jacobian_step") c.newton.jacobian_step = detail::number_field(x, field);
                else config_fail(field, "unknown key (expected tolerance, max_iterations, jacobian_step)");
            });
            if (!(c.newton.tolerance > 0.0)) config_fail("newton.tolerance", "must be > 0");
            if (!(c.newton.jacobian_step > 0.0)) config_fail("newton.jacobian_step", "must be > 0");
        } else {
            config_fail(key, "unknown key");
        }
    });

    if (!have_scenario) config_fail("scenario", "missing");
    if (!have_h) config_fail("h", "missing");
    if (!(c.h > 0.0)) config_fail("h", "must be > 0");
    if (!have_t_end) config_fail("t_end", "missing");
    if (!(c.t_end > c.t_start)) config_fail("t_end", "must be greater than t_start");
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::ConfigError, path.string() + ": cannot open");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, path.string() + ": invalid JSON (" + e.what() + ")");
    }
    return parse_config(j);
}

/// A config bound to a concrete scenario instance.
struct ResolvedRun {
    ScenarioInstance instance;
    ReducedState initial;
    SimulationOptions options;
};

inline ResolvedRun resolve_run(const ScenarioRegistry& registry, const RunConfig& c) {
    if (!registry.find(c.scenario))
        throw Error(ErrorCode::UnknownScenario, "scenario: '" + c.scenario + "' is not registered");
    ResolvedRun r{registry.build(c.scenario, c.params), {}, {}};
    const GaugeSystem& sys = r.instance.system;
    auto check_dim = [](const Vec& x, int want, const std::string& field) {
        if (x.size() != want)
            detail::config_fail(field, "expected " + std::to_string(want) + " entries, got " + std::to_string(x.size()));
    };
    r.initial = r.instance.initial;
    if (c.q) {
        check_dim(*c.q, sys.n(), "initial.q");
        r.initial.q = *c.q;
    }
    if (c.z) {
        check_dim(*c.z, sys.m(), "initial.z");
        r.initial.z = *c.z;
    }
    if (c.v) {
        check_dim(*c.v, sys.n(), "initial.v");
        r.initial.v = *c.v;
    } else if (c.p) {
        check_dim(*c.p, sys.n(), "initial.p");
        try {
            r.initial.v = velocity_from_momentum(sys, r.initial.q, *c.p, r.initial.z, r.initial.v);
        } catch (const Error& e) {
            detail::config_fail("initial.p", std::string("cannot invert the Legendre map (") + e.what() + ")");
        }
    }
    if (c.integrator == Integrator::Variational && !sys.darboux())
        detail::config_fail("integrator", "variational stepping requires a Darboux fiber form");
    r.options.integrator = c.integrator;
    r.options.h = c.h;
    r.options.t_start = c.t_start;
    r.options.t_end = c.t_end;
    r.options.newton = c.newton;
    return r;
}

inline bool is_config_error(ErrorCode code) {
    return code == ErrorCode::ConfigError || code == ErrorCode::UnknownScenario ||
           code == ErrorCode::DimensionMismatch;
}

inline std::filesystem::path output_path(const std::filesystem::path& out_dir, const std::string& name) {
    const std::filesystem::path p(name);
    return (out_dir.empty() || p.is_absolute()) ? p : out_dir / p;
}

/// Runs one simulation and writes the trajectory CSV and JSON summary. On solver failure the
/// good prefix is still written.
inline int cmd_simulate(const ScenarioRegistry& registry, const std::filesystem::path& config_path,
                        const std::filesystem::path& out_dir, std::ostream& diag) {
    RunConfig cfg;
    std::optional<ResolvedRun> run;
    try {
        cfg = load_config(config_path);
        run.emplace(resolve_run(registry, cfg));
    } catch (const Error& e) {
        diag << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
    const GaugeSystem& sys = run->instance.system;
    log::info("simulate " + cfg.scenario + " with " + std::string(to_string(cfg.integrator)) + ", h = " +
              format_double(cfg.h));

    const auto t0 = std::chrono::steady_clock::now();
    Trajectory traj;
    try {
        traj = simulate(sys, run->initial, run->options);
    } catch (const Error& e) {
        diag << "solver error: " << e.what() << '\n';
        return is_config_error(e.code()) ? kExitConfigError : kExitSolverFailure;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ostringstream csv;
    write_trajectory_csv(csv, sys.n(), sys.m(), traj);
    nlohmann::json summary = trajectory_summary(cfg.raw, traj);
    if (cfg.record_wall_time) summary["wall_time_s"] = wall;
    try {
        write_file(output_path(out_dir, cfg.outputs.trajectory), csv.str());
        write_file(output_path(out_dir, cfg.outputs.summary), summary.dump(2) + "\n");
    } catch (const Error& e) {
        diag << "output error: " << e.what() << '\n';
        return kExitConfigError;
    }

    if (!traj.ok()) {
        diag << "solver failure after " << traj.size() << " stored states: " << traj.failure->what() << '\n';
        return kExitSolverFailure;
    }
    log::info("wrote " + std::to_string(traj.size()) + " states");
    return kExitOk;
}

/// Sample counts and tolerances of the verification battery.
struct VerifySettings {
    std::size_t geometry_points = 100;
    std::size_t map_points = 1000;
    double roundtrip_tol = 1e-12;
    double energy_differential_tol = 1e-6;
    double trajectory_tol = 1e-9;
    double euler_lagrange_tol = 1e-12;
};

namespace detail {

inline std::mt19937_64 check_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

inline Vec uniform_vec(std::mt19937_64& rng, Eigen::Index size, double half) {
    std::uniform_real_distribution<double> u(-half, half);
    Vec x(size);
    for (Eigen::Index i = 0; i < size; ++i) x[i] = u(rng);
    return x;
}

} // namespace detail

/// alpha_F o alpha_F^{-1} and alpha_F^{-1} o alpha_F against the identity at random points.
inline CheckResult tulczyjew_roundtrip_check(const GaugeSystem& sys, const SampleBox& box, std::mt19937_64& rng,
                                             std::size_t count, double tol) {
    double worst = 0.0;
    const int n = sys.n(), m = sys.m();
    for (std::size_t k = 0; k < count; ++k) {
        const SternbergPoint x = box.sample(rng);
        TulczyjewImage img{x.q, x.v, x.z, detail::uniform_vec(rng, n, 1.0), detail::uniform_vec(rng, n, 1.0),
                           detail::uniform_vec(rng, m, 1.0)};
        const TulczyjewImage back = alpha_F(sys, alpha_F_inv(sys, img));
        worst = std::max({worst, max_abs(Vec(back.pi_q - img.pi_q)), max_abs(Vec(back.pi_v - img.pi_v)),
                          max_abs(Vec(back.pi_z - img.pi_z))});
        PhaseTangent t{x.q, x.p, x.z, x.v, detail::uniform_vec(rng, n, 1.0), detail::uniform_vec(rng, m, 1.0)};
        const PhaseTangent t2 = alpha_F_inv(sys, alpha_F(sys, t));
        worst = std::max({worst, max_abs(Vec(t2.p - t.p)), max_abs(Vec(t2.pdot - t.pdot)),
                          max_abs(Vec(t2.zdot - t.zdot))});
    }
    return threshold_check("tulczyjew.roundtrip", worst, tol, count);
}

/// Analytic dE against central differences of E over the full bundle.
inline CheckResult energy_differential_check(const GaugeSystem& sys, const SampleBox& box, std::mt19937_64& rng,
                                             std::size_t count, double tol) {
    const BundleLayout l{sys.n(), sys.m()};
    double worst = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const SternbergPoint x = box.sample(rng);
        const Vec numeric = fd::gradient(
            [&](const Vec& y) { return generalized_energy(sys, SternbergPoint::unpack(l, y)); }, x.pack());
        worst = std::max(worst, max_abs(Vec(numeric - d_generalized_energy(sys, x).pack())));
    }
    return threshold_check("energy.differential", worst, tol, count);
}

/// Gauge-free models: the intrinsic residual blocks must coincide with the Euler-Lagrange
/// residual blocks, and the Dirac inclusion defect with its max-norm.
inline CheckResult euler_lagrange_equivalence_check(const GaugeSystem& sys, const SampleBox& box,
                                                    std::mt19937_64& rng, std::size_t count, double tol) {
    const int n = sys.n(), m = sys.m();
    double worst = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const SternbergPoint x = box.sample(rng);
        const BundleTangent xdot{detail::uniform_vec(rng, n, 1.0), detail::uniform_vec(rng, n, 1.0),
                                 detail::uniform_vec(rng, n, 1.0), detail::uniform_vec(rng, m, 1.0)};
        const CovectorSP r = intrinsic_residual(sys, x, xdot);
        const Vec el = euler_lagrange_residual(sys, x, xdot);
        const Vec dirac_blocks = concat({&r.alpha, &r.beta, &r.u});
        worst = std::max(worst, max_abs(Vec(dirac_blocks - el)));
        worst = std::max(worst, std::abs(dirac_inclusion_residual(sys, x, xdot) - max_abs(el)));
    }
    return threshold_check("euler_lagrange.equivalence", worst, tol, count);
}

/// Full verification battery for one configured scenario.
inline VerificationReport verify_run(const ResolvedRun& run, const std::string& scenario, std::uint64_t seed,
                                     const VerifySettings& vs = {}) {
    const GaugeSystem& sys = run.instance.system;
    const SampleBox& box = run.instance.box;
    VerificationReport report;
    report.scenario = scenario;
    report.seed = seed;

    auto points = [&](std::uint64_t stream, std::size_t count) {
        std::mt19937_64 rng = detail::check_rng(seed, stream);
        std::vector<SternbergPoint> pts;
        for (std::size_t k = 0; k < count; ++k) pts.push_back(box.sample(rng));
        return pts;
    };

    {
        std::vector<ConfigSample> samples;
        for (const auto& x : points(1, vs.geometry_points)) samples.push_back({x.q, x.v, x.z});
        report.append(validate_derivatives(sys, samples));
    }
    {
        std::vector<Vec> zs;
        for (const auto& x : points(2, vs.geometry_points)) zs.push_back(x.z);
        report.append(check_fiber_form(sys, zs));
    }
    {
        std::vector<std::pair<Vec, Vec>> qz;
        for (const auto& x : points(3, vs.geometry_points)) qz.emplace_back(x.q, x.z);
        report.append(exterior_derivative_check(sys, qz));
    }
    if (sys.darboux()) {
        std::vector<Vec> ys;
        const PhaseLayout ph{sys.n(), sys.m()};
        for (const auto& x : points(4, vs.geometry_points)) {
            Vec y(ph.dim());
            y << x.q, x.p, x.z;
            ys.push_back(y);
        }
        report.append(theta_potential_check(sys, ys));
    }
    report.append(dirac_axioms_check(sys, points(5, vs.geometry_points)));
    {
        std::mt19937_64 rng = detail::check_rng(seed, 6);
        report.append(tulczyjew_roundtrip_check(sys, box, rng, vs.map_points, vs.roundtrip_tol));
    }
    {
        std::mt19937_64 rng = detail::check_rng(seed, 7);
        report.append(energy_differential_check(sys, box, rng, vs.map_points, vs.energy_differential_tol));
    }
    if (run.instance.gauge_trivial) {
        std::mt19937_64 rng = detail::check_rng(seed, 8);
        report.append(euler_lagrange_equivalence_check(sys, box, rng, vs.map_points, vs.euler_lagrange_tol));
    }

    const Trajectory traj = simulate(sys, run.initial, run.options);
    const std::size_t n_states = traj.size();
    CheckResult completed = threshold_check("trajectory.completed", traj.ok() ? 0.0 : 1.0, 0.0, n_states);
    if (!traj.ok()) completed.detail = traj.failure->what();
    report.append(completed);
    report.append(threshold_check("trajectory.intrinsic_residual", traj.max_intrinsic(), vs.trajectory_tol, n_states));
    report.append(threshold_check("trajectory.dirac_residual", traj.max_dirac(), vs.trajectory_tol, n_states));
    report.append(threshold_check("trajectory.formulation_gap", traj.max_formulation_gap(), vs.trajectory_tol,
                                  n_states, "max |intrinsic - dirac| per state"));
    report.append(threshold_check("trajectory.tulczyjew_residual", traj.max_tulczyjew(), vs.trajectory_tol, n_states));
    if (run.options.integrator == Integrator::Variational)
        report.append(threshold_check("trajectory.stationarity", traj.max_stationarity(), run.options.newton.tolerance,
                                      n_states, "discrete Hamilton-Pontryagin residual"));

    for (auto& c : report.checks) c.seed = seed;
    return report;
}

/// Runs the verification battery and writes the JSON report. Exit 0 iff every check passes.
inline int cmd_verify(const ScenarioRegistry& registry, const std::filesystem::path& config_path,
                      std::optional<std::uint64_t> seed_override, const std::filesystem::path& out_dir,
                      std::ostream& out, std::ostream& diag) {
    RunConfig cfg;
    std::optional<ResolvedRun> run;
    try {
        cfg = load_config(config_path);
        run.emplace(resolve_run(registry, cfg));
    } catch (const Error& e) {
        diag << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
    const std::uint64_t seed = seed_override.value_or(cfg.seed);

    VerificationReport report;
    try {
        report = verify_run(*run, cfg.scenario, seed);
    } catch (const Error& e) {
        diag << "verification aborted: " << e.what() << '\n';
        return is_config_error(e.code()) ? kExitConfigError : kExitSolverFailure;
    }
    try {
        write_file(output_path(out_dir, cfg.outputs.report), to_json(report).dump(2) + "\n");
    } catch (const Error& e) {
        diag << "output error: " << e.what() << '\n';
        return kExitConfigError;
    }
    for (const auto& c : report.checks)
        out << (c.passed ? "PASS " : "FAIL ") << c.name << "  measured " << format_double(c.measured)
            << "  tolerance " << format_double(c.tolerance) << '\n';
    return report.all_passed() ? kExitOk : kExitCheckFailed;
}

inline int cmd_list(const ScenarioRegistry& registry, std::ostream& out) {
    for (const auto& e : registry.entries()) {
        out << e.name << "  " << e.description << '\n';
        for (const auto& p : e.params)
            out << "    " << p.name << " = " << format_double(p.default_value) << "  " << p.description << '\n';
    }
    return kExitOk;
}

/// Runs several simulate configs on up to `jobs` worker threads. With more than one config,
/// each run writes under out_dir/<config stem>/. Diagnostics are emitted in input order and the
/// exit code is the largest one observed.
inline int cmd_simulate_many(const ScenarioRegistry& registry, const std::vector<std::filesystem::path>& configs,
                             const std::filesystem::path& out_dir, unsigned jobs, std::ostream& diag) {
    if (configs.size() == 1) return cmd_simulate(registry, configs.front(), out_dir, diag);
    std::vector<int> codes(configs.size(), 0);
    std::vector<std::string> messages(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < configs.size();) {
            std::ostringstream os;
            const std::filesystem::path dir = (out_dir.empty() ? std::filesystem::path(".") : out_dir) /
                                              configs[k].stem();
            codes[k] = cmd_simulate(registry, configs[k], dir, os);
            messages[k] = os.str();
        }
    };
    const unsigned count = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    int worst = kExitOk;
    for (std::size_t k = 0; k < configs.size(); ++k) {
        if (!messages[k].empty()) diag << configs[k].string() << ": " << messages[k];
        worst = std::max(worst, codes[k]);
    }
    return worst;
}

} // namespace gaugeflow
