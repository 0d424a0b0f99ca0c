#ifndef JRC_AGENTS_HPP
#define JRC_AGENTS_HPP

#include <array>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "jrc/env.hpp"
#include "jrc/nn.hpp"
#include "jrc/replay.hpp"

namespace jrc {

enum class AgentKind { QLearning, Ddqn, Dpr, Tlwd };

AgentKind agent_kind_from_string(const std::string& name);
std::string to_string(AgentKind kind);

struct ExplorationSchedule {
    double epsilon_start = 1.0;
    double epsilon_min = 0.01;
    double decay = 0.995;  // multiplicative, per episode

    double at_episode(int episode) const;  // episode counted from 0
};

struct TrainConfig {
    double gamma = 0.99;
    int batch_size = 64;
    int target_sync_period = 300;
    int buffer_capacity = 50000;
    int demo_size = 20000;
    double learning_rate = 1e-4;
    int warmup_steps = 64;  // buffer size required before gradient steps begin
    int episodes = 400;
    int steps_per_episode = 300;
    ExplorationSchedule exploration;

    void validate() const;
};

struct TlwdConfig {
    double lambda_n = 1.0;
    double lambda_margin = 1.0;
    double lambda_l2 = 1e-5;
    int n_step = 10;
    int pretrain_steps = 10000;
    double margin = 1.0;
    double alpha = 0.4;
    double beta0 = 0.6;
    double priority_floor = 0.001;   // epsilon in p_i = |zeta_i| + epsilon
    double demo_bonus = 1.0;         // epsilon_d, added to demo priorities
    bool nstep_double_estimator = true;  // false: literal max over the target net

    void validate() const;
};

// ---- tabular Q-learning ----

struct QTable {
    std::array<std::array<double, kActionCount>, kStateCount> values{};
    std::array<std::array<std::int64_t, kActionCount>, kStateCount> counts{};
};

// Bellman update with the harmonic per-pair rate alpha = 1 / (1 + n(s,a)).
void q_learning_update(QTable& table, const EnvState& s, int action, double reward,
                       const EnvState& next, double gamma);

// Uniform random action with probability eps, else argmax with lowest-index ties.
int epsilon_greedy(const std::vector<double>& q_values, double eps, Rng& rng);
int argmax_action(const std::vector<double>& q_values);

class QLearningAgent {
public:
    explicit QLearningAgent(double gamma) : gamma_(gamma) {}

    int act(const EnvState& s, double eps, Rng& rng) const;
    void observe(const EnvState& s, int action, double reward, const EnvState& next);
    const QTable& table() const { return table_; }

private:
    QTable table_;
    double gamma_ = 0.99;
};

// ---- deep agents ----

Eigen::VectorXd state_features(const EnvState& s);

double ddqn_target(double reward, const EnvState& next, bool terminal,
                   const NetworkParams& online, const NetworkParams& target,
                   double gamma);

struct TlwdLossResult {
    double total = 0.0;
    double j_ddqn = 0.0;
    double j_n = 0.0;
    double j_margin = 0.0;
    double j_l2 = 0.0;
    GradientSet grads;
    std::vector<double> td_errors;  // DDQN TD error per sample, drives priorities
};

// Combined loss J = J_DDQN + l1*J_n + l2*J_E + l3*J_L2. Squared-error terms
// are importance-weighted; the margin term applies to demo samples only.
TlwdLossResult tlwd_loss(const NetworkParams& online, const NetworkParams& target,
                         const std::vector<Transition>& batch,
                         const std::vector<double>& is_weights, const TlwdConfig& cfg,
                         double gamma);

// Discounted sum of up to n leading rewards.
double n_step_return(const std::vector<double>& rewards, double gamma);

// Builds finalized transitions out of a step stream, cutting n-step windows
// at episode boundaries with the reduced horizon.
class NStepAccumulator {
public:
    NStepAccumulator(int n, double gamma);

    // Returns transitions whose n-step window is complete.
    std::vector<Transition> push(const Transition& one_step);
    // Flush at episode end; remaining windows truncate at the boundary.
    std::vector<Transition> flush();

private:
    Transition finalize(std::size_t start) const;

    int n_;
    double gamma_;
    std::deque<Transition> pending_;
};

class DeepAgent {
public:
    DeepAgent(AgentKind kind, const TrainConfig& train, const TlwdConfig& tlwd,
              Rng& init_rng);
    // DPR: both networks start from the source weights.
    DeepAgent(AgentKind kind, const TrainConfig& train, const TlwdConfig& tlwd,
              NetworkParams source_weights);

    int act(const EnvState& s, double eps, Rng& rng) const;

    // One sampled gradient step; returns the batch loss, or nullopt when the
    // buffer is not yet warm. Handles target syncs.
    std::optional<double> train_step(PrioritizedBuffer& buffer, Rng& rng);

    // T_pre prioritized gradient steps on a demo-only buffer.
    void pretrain(PrioritizedBuffer& buffer, Rng& rng);

    const NetworkParams& online() const { return online_; }
    const NetworkParams& target() const { return target_; }
    std::int64_t step_count() const { return step_count_; }
    AgentKind kind() const { return kind_; }
    bool prioritized() const { return kind_ == AgentKind::Tlwd; }

private:
    AgentKind kind_;
    TrainConfig train_;
    TlwdConfig tlwd_;
    NetworkParams online_;
    NetworkParams target_;
    std::int64_t step_count_ = 0;
};

// Greedy rollout (with a small residual epsilon) in the source environment,
// recording demo-flagged transitions with n-step returns.
std::vector<Transition> collect_demonstrations(const NetworkParams& policy,
                                               const EnvConfig& env_config, int count,
                                               int n, double gamma,
                                               double residual_epsilon, Rng& rng);

// DPR initialization from a weight file; validates the action dimension.
DeepAgent dpr_initialize(const std::string& source_weights_path,
                         const TrainConfig& train, const TlwdConfig& tlwd);

}  // namespace jrc

#endif
