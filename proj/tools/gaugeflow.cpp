#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gaugeflow/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"gaugeflow: gauge-coupled Lagrangian dynamics on Sternberg phase space"};
    app.require_subcommand(1);

    std::vector<std::string> sim_configs;
    std::string sim_out;
    unsigned jobs = 1;
    auto* sim = app.add_subcommand("simulate", "integrate a configured scenario, write CSV trajectory and JSON summary");
    sim->add_option("config", sim_configs, "run config (JSON)")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", sim_out, "output directory");
    sim->add_option("--jobs", jobs, "worker threads for multiple configs")->check(CLI::PositiveNumber);

    std::string ver_config, ver_out;
    std::optional<std::uint64_t> seed;
    auto* ver = app.add_subcommand("verify", "run the verification battery, write a JSON report");
    ver->add_option("config", ver_config, "run config (JSON)")->required()->check(CLI::ExistingFile);
    ver->add_option("--seed", seed, "override the config seed");
    ver->add_option("--out", ver_out, "output directory");

    auto* list = app.add_subcommand("list", "print registered scenarios and parameter defaults");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : gaugeflow::kExitConfigError;
    }

    const gaugeflow::ScenarioRegistry registry = gaugeflow::default_registry();
    if (*sim) {
        std::vector<std::filesystem::path> paths(sim_configs.begin(), sim_configs.end());
        return gaugeflow::cmd_simulate_many(registry, paths, sim_out, jobs, std::cerr);
    }
    if (*ver) return gaugeflow::cmd_verify(registry, ver_config, seed, ver_out, std::cout, std::cerr);
    if (*list) return gaugeflow::cmd_list(registry, std::cout);
    return gaugeflow::kExitConfigError;
}
