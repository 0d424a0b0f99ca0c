#ifndef JRC_HARNESS_HPP
#define JRC_HARNESS_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "jrc/agents.hpp"
#include "jrc/env.hpp"

namespace jrc {

// Eq-literal alternative for the miss-detection average: radar steps only.
enum class MissMetricRule { EventSteps, RadarSteps };

struct Scenario {
    std::string name = "scenario";
    EnvConfig env;
    TrainConfig train;
    TlwdConfig tlwd;
    AgentKind agent = AgentKind::Ddqn;
    std::uint64_t seed = 0;
    std::string source_weights_path;  // required for dpr
    std::string demo_path;            // required for tlwd
    MissMetricRule miss_rule = MissMetricRule::EventSteps;
    bool record_timing = false;  // off by default so outputs are byte-reproducible

    void validate() const;
};

struct EpisodeRecord {
    int episode = 0;
    double avg_reward = 0.0;
    long throughput = 0;
    std::optional<double> miss_prob;
    double epsilon = 0.0;
    int steps = 0;
    long wall_ms = 0;
};

struct RunHistory {
    std::vector<EpisodeRecord> episodes;
    NetworkParams final_weights;  // empty dims for qlearning
    QTable final_table;
};

struct SweepSpec {
    std::string parameter;  // p1v | tau0 | omega
    std::vector<double> values;
    int episodes_per_point = 1000;
    int seeds_per_point = 3;
    std::vector<AgentKind> agents;

    void validate() const;
};

struct SweepRow {
    std::string param_name;
    double param_value = 0.0;
    AgentKind agent = AgentKind::Ddqn;
    int seed_count = 0;
    double mean_reward = 0.0;
    double mean_throughput = 0.0;
    double mean_miss_prob = 0.0;
};

// Owns the per-run mutable pieces (env, agent, buffer, rngs) of one training run.
class Trainer {
public:
    explicit Trainer(const Scenario& scenario);

    EpisodeRecord run_episode(int episode_index, bool learn);
    RunHistory train();

    const Environment& env() const { return env_; }

private:
    void setup_agent();

    Scenario scenario_;
    Environment env_;
    Rng env_rng_;
    Rng agent_rng_;
    std::optional<QLearningAgent> q_agent_;
    std::optional<DeepAgent> deep_agent_;
    std::optional<PrioritizedBuffer> buffer_;
    std::optional<NStepAccumulator> accumulator_;
    EnvState state_;
    std::int64_t env_steps_ = 0;
};

RunHistory train(const Scenario& scenario, const std::string& out_dir);

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const Scenario& base);

void write_episode_csv(const std::vector<EpisodeRecord>& records,
                       const std::string& scenario_name, AgentKind agent,
                       std::uint64_t seed, const std::string& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

// Applies a sweep override to a scenario's target-env config.
void apply_sweep_override(EnvConfig& env, const std::string& parameter, double value);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace jrc

#endif
