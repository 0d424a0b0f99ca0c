#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "jrc/config.hpp"
#include "jrc/errors.hpp"
#include "jrc/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitContract = 4;

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    bool timing = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Scenario config file (JSON)")
        ->required();
    cmd->add_option("--seed", args.seed, "RNG seed");
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_flag("--timing", args.timing,
                  "Record wall-clock times in CSV (breaks byte-reproducibility)");
}

jrc::Scenario make_scenario(const CommonArgs& args) {
    jrc::Scenario scenario = jrc::load_scenario(args.config_path);
    scenario.seed = args.seed;
    scenario.record_timing = args.timing;
    return scenario;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"JRC mode-scheduling simulator and RL training harness"};
    app.require_subcommand(1);

    CommonArgs train_source_args;
    std::string train_source_agent = "ddqn";
    auto* train_source = app.add_subcommand(
        "train-source", "Train an agent in the source environment");
    add_common(train_source, train_source_args);
    train_source->add_option("--agent", train_source_agent, "qlearning|ddqn")
        ->check(CLI::IsMember({"qlearning", "ddqn"}));

    CommonArgs demos_args;
    std::string demos_weights;
    int demos_count = 20000;
    auto* collect = app.add_subcommand(
        "collect-demos", "Record demonstrations with a trained source policy");
    add_common(collect, demos_args);
    collect->add_option("--weights", demos_weights, "Source weight file")->required();
    collect->add_option("--count", demos_count, "Number of transitions");

    CommonArgs target_args;
    std::string target_agent;
    std::string target_source_weights;
    std::string target_demos;
    auto* train_target = app.add_subcommand(
        "train-target", "Train an agent in the target environment");
    add_common(train_target, target_args);
    train_target->add_option("--agent", target_agent, "qlearning|ddqn|dpr|tlwd")
        ->required()
        ->check(CLI::IsMember({"qlearning", "ddqn", "dpr", "tlwd"}));
    train_target->add_option("--source-weights", target_source_weights,
                             "Source weight file (dpr)");
    train_target->add_option("--demos", target_demos, "Demonstration file (tlwd)");

    CommonArgs sweep_args;
    std::string sweep_param;
    std::vector<double> sweep_values;
    std::vector<std::string> sweep_agents{"ddqn", "dpr", "tlwd"};
    int sweep_seeds = 3;
    int sweep_episodes = 1000;
    std::string sweep_source_weights;
    std::string sweep_demos;
    auto* sweep = app.add_subcommand("sweep", "Parameter sweep across agents and seeds");
    add_common(sweep, sweep_args);
    sweep->add_option("--param", sweep_param, "p1v|tau0|omega")
        ->required()
        ->check(CLI::IsMember({"p1v", "tau0", "omega"}));
    sweep->add_option("--values", sweep_values, "Sweep values")->required();
    sweep->add_option("--agents", sweep_agents, "Agents to compare");
    sweep->add_option("--seeds", sweep_seeds, "Seeds per point");
    sweep->add_option("--episodes", sweep_episodes, "Episodes per point");
    sweep->add_option("--source-weights", sweep_source_weights,
                      "Source weight file (dpr)");
    sweep->add_option("--demos", sweep_demos, "Demonstration file (tlwd)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_source) {
            jrc::Scenario scenario = make_scenario(train_source_args);
            scenario.agent = jrc::agent_kind_from_string(train_source_agent);
            jrc::train(scenario, train_source_args.out_dir);
        } else if (*collect) {
            jrc::Scenario scenario = make_scenario(demos_args);
            jrc::NetworkParams weights = jrc::load_network(demos_weights);
            jrc::Rng rng(scenario.seed);
            auto demos = jrc::collect_demonstrations(
                weights, scenario.env, demos_count, scenario.tlwd.n_step,
                scenario.train.gamma, scenario.train.exploration.epsilon_min, rng);
            std::error_code ec;
            std::filesystem::create_directories(demos_args.out_dir, ec);
            if (ec) throw jrc::IoError("cannot create output directory");
            jrc::save_demos(demos, scenario.tlwd.n_step, scenario.train.gamma,
                            demos_args.out_dir + "/demos.json");
        } else if (*train_target) {
            jrc::Scenario scenario = make_scenario(target_args);
            scenario.agent = jrc::agent_kind_from_string(target_agent);
            scenario.source_weights_path = target_source_weights;
            scenario.demo_path = target_demos;
            jrc::train(scenario, target_args.out_dir);
        } else if (*sweep) {
            jrc::Scenario base = make_scenario(sweep_args);
            base.source_weights_path = sweep_source_weights;
            base.demo_path = sweep_demos;
            jrc::SweepSpec spec;
            spec.parameter = sweep_param;
            spec.values = sweep_values;
            spec.seeds_per_point = sweep_seeds;
            spec.episodes_per_point = sweep_episodes;
            for (const auto& name : sweep_agents)
                spec.agents.push_back(jrc::agent_kind_from_string(name));
            auto rows = jrc::run_sweep(spec, base);
            std::error_code ec;
            std::filesystem::create_directories(sweep_args.out_dir, ec);
            if (ec) throw jrc::IoError("cannot create output directory");
            jrc::write_sweep_csv(rows, sweep_args.out_dir + "/sweep.csv");
        }
    } catch (const jrc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const jrc::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const jrc::ContractViolation& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return kExitContract;
    }
    return 0;
}
