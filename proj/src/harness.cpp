#include "jrc/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>

#include "jrc/errors.hpp"
#include "jrc/nn.hpp"

namespace jrc {

void Scenario::validate() const {
    env.validate();
    train.validate();
    tlwd.validate();
    if (agent == AgentKind::Dpr && source_weights_path.empty())
        throw ConfigError("dpr requires source weights");
    if (agent == AgentKind::Tlwd && demo_path.empty())
        throw ConfigError("tlwd requires demonstration data");
}

void SweepSpec::validate() const {
    if (parameter != "p1v" && parameter != "tau0" && parameter != "omega")
        throw ConfigError("sweep parameter must be one of p1v|tau0|omega");
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    for (double v : values) {
        if (parameter == "omega") {
            if (v <= 0) throw ConfigError("omega values must be > 0");
        } else if (v < 0 || v > 1) {
            throw ConfigError("probability values must be in [0,1]");
        }
    }
    if (episodes_per_point <= 0 || seeds_per_point <= 0)
        throw ConfigError("sweep budgets must be > 0");
    if (agents.empty()) throw ConfigError("sweep needs at least one agent");
}

void apply_sweep_override(EnvConfig& env, const std::string& parameter, double value) {
    if (parameter == "p1v") {
        env.probs.event_p[kEventV][1] = value;
    } else if (parameter == "tau0") {
        env.probs.tau0.fill(value);  // all five factors move together
    } else if (parameter == "omega") {
        env.traffic_density = value;
    } else {
        throw ConfigError("unknown sweep parameter: " + parameter);
    }
}

Trainer::Trainer(const Scenario& scenario)
    : scenario_(scenario),
      env_(scenario.env),
      env_rng_(scenario.seed),
      agent_rng_(scenario.seed ^ 0x9E3779B97F4A7C15ULL) {
    scenario_.validate();
    setup_agent();
    state_ = sample_state(scenario_.env.probs, env_rng_);
}

void Trainer::setup_agent() {
    const TrainConfig& train = scenario_.train;
    const TlwdConfig& tlwd = scenario_.tlwd;

    if (scenario_.agent == AgentKind::QLearning) {
        q_agent_.emplace(train.gamma);
        return;
    }

    const bool prioritized = scenario_.agent == AgentKind::Tlwd;
    const std::int64_t anneal_steps =
        static_cast<std::int64_t>(train.episodes) * train.steps_per_episode;
    buffer_.emplace(train.buffer_capacity, prioritized ? tlwd.alpha : 0.0,
                    prioritized ? tlwd.beta0 : 0.0, prioritized ? 1.0 : 0.0,
                    anneal_steps, tlwd.priority_floor, tlwd.demo_bonus);
    accumulator_.emplace(prioritized ? tlwd.n_step : 1, train.gamma);

    switch (scenario_.agent) {
        case AgentKind::Ddqn:
            deep_agent_.emplace(AgentKind::Ddqn, train, tlwd, agent_rng_);
            break;
        case AgentKind::Dpr:
            deep_agent_.emplace(dpr_initialize(scenario_.source_weights_path, train, tlwd));
            break;
        case AgentKind::Tlwd: {
            deep_agent_.emplace(AgentKind::Tlwd, train, tlwd, agent_rng_);
            auto demos = load_demos_file(scenario_.demo_path);
            buffer_->load_demos(demos);
            deep_agent_->pretrain(*buffer_, agent_rng_);
            break;
        }
        default:
            throw ConfigError("unsupported agent kind");
    }
}

EpisodeRecord Trainer::run_episode(int episode_index, bool learn) {
    const auto start = std::chrono::steady_clock::now();
    const double eps = scenario_.train.exploration.at_episode(episode_index);
    const int steps = scenario_.train.steps_per_episode;

    double reward_sum = 0.0;
    long throughput = 0;
    double miss_sum = 0.0;
    int miss_count = 0;

    state_ = sample_state(scenario_.env.probs, env_rng_);
    for (int t = 0; t < steps; ++t) {
        int action_index;
        if (q_agent_) {
            action_index = q_agent_->act(state_, eps, agent_rng_);
        } else {
            action_index = deep_agent_->act(state_, eps, agent_rng_);
        }
        const Action action{action_index};
        const StepResult result = env_.step(state_, action, env_rng_);
        ++env_steps_;

        reward_sum += result.reward;
        throughput += result.packets_sent;
        if (scenario_.miss_rule == MissMetricRule::EventSteps) {
            // Event steps only: radar contributes its miss ratio, a comm
            // choice during an event counts as a full miss.
            if (result.event_occurred) {
                miss_sum += action.is_radar() ? *result.miss_ratio : 1.0;
                ++miss_count;
            }
        } else {
            if (action.is_radar()) {
                miss_sum += *result.miss_ratio;
                ++miss_count;
            }
        }

        const bool terminal = t + 1 == steps;
        if (learn) {
            if (q_agent_) {
                q_agent_->observe(state_, action_index, result.reward, result.next_state);
            } else {
                Transition one_step;
                one_step.state = state_;
                one_step.action = action_index;
                one_step.reward = result.reward;
                one_step.next_state = result.next_state;
                one_step.terminal = terminal;
                for (const auto& ready : accumulator_->push(one_step))
                    buffer_->push(ready);
                deep_agent_->train_step(*buffer_, agent_rng_);
            }
        }
        state_ = result.next_state;
    }

    EpisodeRecord record;
    record.episode = episode_index;
    record.avg_reward = reward_sum / steps;
    record.throughput = throughput;
    if (miss_count > 0) record.miss_prob = miss_sum / miss_count;
    record.epsilon = eps;
    record.steps = steps;
    if (scenario_.record_timing) {
        record.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    }
    return record;
}

RunHistory Trainer::train() {
    RunHistory history;
    history.episodes.reserve(static_cast<std::size_t>(scenario_.train.episodes));
    for (int episode = 0; episode < scenario_.train.episodes; ++episode)
        history.episodes.push_back(run_episode(episode, true));
    if (deep_agent_) history.final_weights = deep_agent_->online();
    if (q_agent_) history.final_table = q_agent_->table();
    return history;
}

RunHistory train(const Scenario& scenario, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir);

    Trainer trainer(scenario);
    RunHistory history = trainer.train();

    write_episode_csv(history.episodes, scenario.name, scenario.agent, scenario.seed,
                      out_dir + "/episodes.csv");
    if (scenario.agent != AgentKind::QLearning)
        save_network(history.final_weights, out_dir + "/weights.json");
    return history;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const Scenario& base) {
    spec.validate();
    std::vector<SweepRow> rows;
    for (double value : spec.values) {
        for (AgentKind agent : spec.agents) {
            double reward_acc = 0.0, throughput_acc = 0.0, miss_acc = 0.0;
            int miss_rows = 0;
            for (int k = 0; k < spec.seeds_per_point; ++k) {
                Scenario point = base;
                point.agent = agent;
                point.seed = base.seed + static_cast<std::uint64_t>(k);
                point.train.episodes = spec.episodes_per_point;
                apply_sweep_override(point.env, spec.parameter, value);

                Trainer trainer(point);
                RunHistory history = trainer.train();

                double r = 0.0, psi = 0.0, miss = 0.0;
                int miss_n = 0;
                for (const auto& e : history.episodes) {
                    r += e.avg_reward;
                    psi += static_cast<double>(e.throughput);
                    if (e.miss_prob) {
                        miss += *e.miss_prob;
                        ++miss_n;
                    }
                }
                const auto n = static_cast<double>(history.episodes.size());
                reward_acc += r / n;
                throughput_acc += psi / n;
                if (miss_n > 0) {
                    miss_acc += miss / miss_n;
                    ++miss_rows;
                }
            }
            SweepRow row;
            row.param_name = spec.parameter;
            row.param_value = value;
            row.agent = agent;
            row.seed_count = spec.seeds_per_point;
            row.mean_reward = reward_acc / spec.seeds_per_point;
            row.mean_throughput = throughput_acc / spec.seeds_per_point;
            row.mean_miss_prob = miss_rows > 0 ? miss_acc / miss_rows : 0.0;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    require(ec == std::errc(), "double formatting failed");
    return std::string(buf, ptr);
}

void write_episode_csv(const std::vector<EpisodeRecord>& records,
                       const std::string& scenario_name, AgentKind agent,
                       std::uint64_t seed, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write CSV: " + path);
    out << "scenario,agent,seed,episode,avg_reward,throughput,miss_detection_prob,"
           "epsilon,steps,wall_ms\n";
    for (const auto& r : records) {
        out << scenario_name << ',' << to_string(agent) << ',' << seed << ','
            << r.episode << ',' << format_double(r.avg_reward) << ',' << r.throughput
            << ',' << (r.miss_prob ? format_double(*r.miss_prob) : std::string())
            << ',' << format_double(r.epsilon) << ',' << r.steps << ',' << r.wall_ms
            << '\n';
    }
    if (!out) throw IoError("failed writing CSV: " + path);
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write CSV: " + path);
    out << "param_name,param_value,agent,seed_count,mean_reward,mean_throughput,"
           "mean_miss_prob\n";
    for (const auto& r : rows) {
        out << r.param_name << ',' << format_double(r.param_value) << ','
            << to_string(r.agent) << ',' << r.seed_count << ','
            << format_double(r.mean_reward) << ',' << format_double(r.mean_throughput)
            << ',' << format_double(r.mean_miss_prob) << '\n';
    }
    if (!out) throw IoError("failed writing CSV: " + path);
}

}  // namespace jrc
