#include "acceptance.hpp"
#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace etcdos::cli;

    CLI::App app{"Event-triggered control under denial-of-service: simulation, certification and attack generation"};
    app.require_subcommand(1);

    SimulateOptions sim;
    std::uint64_t sim_seed = 0;
    auto* simulate = app.add_subcommand("simulate", "Run a scenario; write trace.csv, summary.json, theory.json");
    simulate->add_option("--scenario", sim.scenario, "Scenario file (JSON)")->required();
    simulate->add_option("--out", sim.out, "Output directory")->capture_default_str();
    auto* sim_seed_opt = simulate->add_option("--seed-override", sim_seed, "Replace the scenario seed");
    simulate->add_flag("--dense-oracle", sim.dense_oracle, "Also run the dense fixed-step oracle and compare");

    CertifyOptions cert;
    std::string cert_out;
    auto* certify = app.add_subcommand("certify", "Compute the stability constants without simulating");
    certify->add_option("--scenario", cert.scenario, "Scenario file (JSON)")->required();
    certify->add_option("--out", cert_out, "Write the theory report as JSON");

    AttackGenOptions gen;
    double kappa = 0.0;
    double tau = 0.0;
    auto* attack = app.add_subcommand("attack-gen", "Generate a budget-checked DoS schedule");
    attack->add_option("--policy", gen.policy, "periodic | random | greedy")->capture_default_str();
    attack->add_option("--horizon", gen.horizon, "Seconds")->capture_default_str();
    auto* kappa_opt = attack->add_option("--kappa", kappa, "Budget offset (seconds)");
    auto* tau_opt = attack->add_option("--tau", tau, "Budget rate parameter (> 0)");
    attack->add_option("--period", gen.period, "periodic: period")->capture_default_str();
    attack->add_option("--duty", gen.duty, "periodic: duty cycle in (0, 1)")->capture_default_str();
    attack->add_option("--phase", gen.phase, "periodic: first start")->capture_default_str();
    attack->add_option("--mean-gap", gen.mean_gap, "random: mean gap")->capture_default_str();
    attack->add_option("--mean-duration", gen.mean_duration, "random: mean burst")->capture_default_str();
    attack->add_option("--min-gap", gen.min_gap, "random: minimum gap")->capture_default_str();
    attack->add_option("--seed", gen.seed, "random: seed")->capture_default_str();
    attack->add_option("--pulse", gen.pulse, "greedy: pulse length")->capture_default_str();
    attack->add_option("--gap", gen.gap, "greedy: minimum gap")->capture_default_str();
    attack->add_option("--out", gen.out, "Output file")->capture_default_str();

    SweepOptions sweep;
    std::string range;
    std::uint64_t sweep_seed = 0;
    auto* sweep_cmd = app.add_subcommand("sweep", "Simulate and analyze over a parameter grid");
    sweep_cmd->add_option("--scenario", sweep.scenario, "Scenario file (JSON)")->required();
    sweep_cmd->add_option("--param", sweep.parameter, "tau | duty | c | mu")->required();
    sweep_cmd->add_option("--range", range, "start:stop:step or v1,v2,...")->required();
    sweep_cmd->add_option("--out", sweep.out, "Output CSV")->capture_default_str();
    sweep_cmd->add_option("--jobs", sweep.jobs, "Concurrent points (0: all cores)")->capture_default_str();
    auto* sweep_seed_opt = sweep_cmd->add_option("--seed-override", sweep_seed, "Base seed for the points");

    std::vector<int> only;
    auto* selftest = app.add_subcommand("selftest", "Run the acceptance suite");
    selftest->add_option("criteria", only, "Criterion ids (default: all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    if (simulate->parsed()) {
        if (*sim_seed_opt) sim.seed_override = sim_seed;
        return cmd_simulate(sim, std::cout, std::cerr);
    }
    if (certify->parsed()) {
        if (!cert_out.empty()) cert.out = cert_out;
        return cmd_certify(cert, std::cout, std::cerr);
    }
    if (attack->parsed()) {
        if (*kappa_opt) gen.kappa = kappa;
        if (*tau_opt) gen.tau = tau;
        return cmd_attack_gen(gen, std::cout, std::cerr);
    }
    if (sweep_cmd->parsed()) {
        if (*sweep_seed_opt) sweep.seed_override = sweep_seed;
        try {
            sweep.values = parse_range(range);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kInputError;
        }
        return cmd_sweep(sweep, std::cout, std::cerr);
    }
    if (selftest->parsed()) {
        return etcdos::acceptance::run_suite(std::cout, only);
    }
    return kInputError;
}
