#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gaugeflow/dirac_dynamics.hpp"
#include "gaugeflow/errors.hpp"
#include "gaugeflow/gauge_model.hpp"
#include "gaugeflow/integrators.hpp"
#include "gaugeflow/scenarios.hpp"

namespace gaugeflow {

using ParamMap = std::map<std::string, double>;

struct ParamSpec {
    std::string name;
    double default_value = 0.0;
    std::string description;
};

/// Axis-aligned sampling region for randomized checks. States are center +- halfwidth per block.
struct SampleBox {
    Vec q_center, q_half;
    Vec v_half, p_half;
    Vec z_center, z_half;

    SternbergPoint sample(std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        auto draw = [&](const Vec& c, const Vec& w) {
            Vec x(w.size());
            for (Eigen::Index i = 0; i < w.size(); ++i) x[i] = c[i] + w[i] * u(rng);
            return x;
        };
        SternbergPoint x;
        x.q = draw(q_center, q_half);
        x.v = draw(Vec::Zero(v_half.size()), v_half);
        x.p = draw(Vec::Zero(p_half.size()), p_half);
        x.z = draw(z_center, z_half);
        return x;
    }

    static SampleBox uniform(int n, int m, double half) {
        return {Vec::Zero(n), Vec::Constant(n, half), Vec::Constant(n, half), Vec::Constant(n, half),
                Vec::Zero(m), Vec::Constant(m, half)};
    }
};

struct ScenarioInstance {
    GaugeSystem system;
    SampleBox box;
    ReducedState initial;     // default initial condition (q, v, z)
    bool gauge_trivial = false;  // A = 0 and m = 0: Euler-Lagrange comparison applies
};

struct ScenarioEntry {
    std::string name;
    std::string description;
    std::vector<ParamSpec> params;
    std::function<ScenarioInstance(const ParamMap&)> build;
};

class ScenarioRegistry {
public:
    void add(ScenarioEntry entry) {
        if (find(entry.name)) throw Error(ErrorCode::InvalidArgument, "scenario '" + entry.name + "' already registered");
        entries_.push_back(std::move(entry));
    }

    const ScenarioEntry* find(const std::string& name) const {
        for (const auto& e : entries_)
            if (e.name == name) return &e;
        return nullptr;
    }

    const std::vector<ScenarioEntry>& entries() const { return entries_; }

    /// Fills defaults, rejects unknown parameter names.
    ParamMap resolve(const ScenarioEntry& entry, const ParamMap& given) const {
        ParamMap out;
        for (const auto& p : entry.params) out[p.name] = p.default_value;
        for (const auto& [k, v] : given) {
            if (!out.count(k))
                throw Error(ErrorCode::ConfigError, "params." + k + ": unknown parameter for scenario '" + entry.name + "'");
            out[k] = v;
        }
        return out;
    }

    ScenarioInstance build(const std::string& name, const ParamMap& given) const {
        const ScenarioEntry* e = find(name);
        if (!e) throw Error(ErrorCode::UnknownScenario, "unknown scenario '" + name + "'");
        return e->build(resolve(*e, given));
    }

private:
    std::vector<ScenarioEntry> entries_;
};

namespace detail {

inline std::vector<ParamSpec> em_param_specs() {
    return {
        {"e", 1.0, "charge"},
        {"E_x", 0.0, "uniform electric field"},
        {"E_y", 0.0, "uniform electric field"},
        {"E_z", 0.0, "uniform electric field"},
        {"B_x", 0.0, "uniform magnetic field"},
        {"B_y", 0.0, "uniform magnetic field"},
        {"B_z", 1.0, "uniform magnetic field"},
        {"dipole", 0.0, "magnetic dipole moment along z at the origin"},
        {"gauge", 0.0, "amplitude of a pure-gauge term added to A"},
    };
}

inline EMFieldParams em_params(const ParamMap& p) {
    EMFieldParams f;
    f.e = p.at("e");
    f.E = {p.at("E_x"), p.at("E_y"), p.at("E_z")};
    f.B = {p.at("B_x"), p.at("B_y"), p.at("B_z")};
    f.dipole = p.at("dipole");
    f.gauge = p.at("gauge");
    return f;
}

inline int integer_param(const ParamMap& p, const std::string& key, int lo) {
    const double x = p.at(key);
    if (x != std::floor(x) || x < lo)
        throw Error(ErrorCode::ConfigError, "params." + key + ": expected an integer >= " + std::to_string(lo));
    return static_cast<int>(x);
}

} // namespace detail

inline ScenarioEntry em_nonrelativistic_entry() {
    return {"em_nonrelativistic", "charged particle in static E and B fields (n = 3, U(1))",
            detail::em_param_specs(), [](const ParamMap& p) {
                const EMFieldParams f = detail::em_params(p);
                SampleBox box = SampleBox::uniform(3, 0, 1.0);
                // keep samples away from the dipole singularity
                if (f.dipole != 0.0) box.q_center = Vec::Constant(3, 1.5);
                Vec v0 = Vec::Zero(3);
                v0[0] = 1.0;
                return ScenarioInstance{make_em_nonrelativistic(make_fields(f)), box,
                                        {Vec::Zero(3), v0, Vec(0)}, false};
            }};
}

inline ScenarioEntry em_relativistic_entry() {
    return {"em_relativistic", "relativistic charge on Minkowski space, proper-time parametrized (n = 4)",
            detail::em_param_specs(), [](const ParamMap& p) {
                const EMFieldParams f = detail::em_params(p);
                SampleBox box = SampleBox::uniform(4, 0, 1.0);
                if (f.dipole != 0.0) box.q_center.tail(3) = Vec::Constant(3, 1.5);
                Vec v0 = Vec::Zero(4);
                v0[0] = 1.0;
                v0[1] = 0.1;
                return ScenarioInstance{make_em_relativistic(make_fields(f)), box,
                                        {Vec::Zero(4), v0, Vec(0)}, false};
            }};
}

inline ScenarioEntry trivial_gauge_entry() {
    return {"trivial_gauge", "gauge-free anharmonic oscillator on R^dim, plain Euler-Lagrange",
            {{"dim", 1.0, "configuration dimension"},
             {"omega", 1.0, "harmonic frequency"},
             {"lambda", 0.0, "quartic coefficient"}},
            [](const ParamMap& p) {
                const int n = detail::integer_param(p, "dim", 1);
                Vec q0 = Vec::Zero(n);
                q0[0] = 1.0;
                return ScenarioInstance{make_trivial_gauge(n, oscillator_lagrangian(n, p.at("omega"), p.at("lambda"))),
                                        SampleBox::uniform(n, 0, 1.0), {q0, Vec::Zero(n), Vec(0)}, true};
            }};
}

inline ScenarioEntry nonabelian_demo_entry() {
    return {"nonabelian_demo", "su(2)-like gauge group with a two-dimensional Darboux fiber (n = 2, m = 2)",
            {{"g", 1.0, "connection strength"},
             {"omega", 1.0, "configuration potential frequency"},
             {"kappa", 1.0, "fiber potential stiffness"},
             {"beta", 0.2, "velocity-fiber coupling"}},
            [](const ParamMap& p) {
                NonabelianParams np{p.at("g"), p.at("omega"), p.at("kappa"), p.at("beta")};
                Vec q0(2), v0(2), z0(2);
                q0 << 0.5, -0.3;
                v0 << 0.2, 0.4;
                z0 << 0.6, -0.4;
                return ScenarioInstance{make_nonabelian_demo(np), SampleBox::uniform(2, 2, 1.0), {q0, v0, z0}, false};
            }};
}

inline ScenarioRegistry default_registry() {
    ScenarioRegistry r;
    r.add(em_nonrelativistic_entry());
    r.add(em_relativistic_entry());
    r.add(trivial_gauge_entry());
    r.add(nonabelian_demo_entry());
    return r;
}

} // namespace gaugeflow
