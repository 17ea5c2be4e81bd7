// Charged particle in a uniform magnetic field, integrated with both steppers and compared
// against the closed-form circle.
#include <cmath>
#include <cstdio>
#include <numbers>

#include "gaugeflow/gaugeflow.hpp"

int main() {
    using namespace gaugeflow;

    EMFieldParams field;
    field.B = {0.0, 0.0, 1.0};
    const GaugeSystem sys = make_em_nonrelativistic(make_fields(field));

    Vec q0 = Vec::Zero(3), v0 = Vec::Zero(3);
    v0[0] = 1.0;
    const double period = 2.0 * std::numbers::pi;

    for (Integrator method : {Integrator::RK4, Integrator::Variational}) {
        SimulationOptions opt;
        opt.integrator = method;
        opt.h = method == Integrator::RK4 ? 1e-3 : 1e-2;
        opt.t_end = 5.0 * period;
        const Trajectory traj = simulate(sys, {q0, v0, Vec(0)}, opt);
        if (!traj.ok()) {
            std::fprintf(stderr, "%s\n", traj.failure->what());
            return 1;
        }
        const auto [q_exact, v_exact] = cyclotron_solution(q0, v0, field.e, 1.0, opt.t_end);
        std::printf("%-12s h = %-6g  |q - q_exact| = %.3e  max intrinsic residual = %.3e  energy drift = %.3e\n",
                    std::string(to_string(method)).c_str(), opt.h, (traj.states.back().q - q_exact).norm(),
                    traj.max_intrinsic(), std::abs(traj.diagnostics.back().energy - traj.diagnostics.front().energy));
    }
    return 0;
}
