#include "jrc/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jrc/errors.hpp"

namespace jrc {

AgentKind agent_kind_from_string(const std::string& name) {
    if (name == "qlearning") return AgentKind::QLearning;
    if (name == "ddqn") return AgentKind::Ddqn;
    if (name == "dpr") return AgentKind::Dpr;
    if (name == "tlwd") return AgentKind::Tlwd;
    throw ConfigError("unknown agent kind: " + name);
}

std::string to_string(AgentKind kind) {
    switch (kind) {
        case AgentKind::QLearning: return "qlearning";
        case AgentKind::Ddqn: return "ddqn";
        case AgentKind::Dpr: return "dpr";
        case AgentKind::Tlwd: return "tlwd";
    }
    return "unknown";
}

double ExplorationSchedule::at_episode(int episode) const {
    double eps = epsilon_start * std::pow(decay, episode);
    return std::max(eps, epsilon_min);
}

void TrainConfig::validate() const {
    if (gamma <= 0 || gamma >= 1) throw ConfigError("gamma must be in (0,1)");
    if (batch_size <= 0) throw ConfigError("batch_size must be > 0");
    if (target_sync_period < 1) throw ConfigError("target_sync_period must be >= 1");
    if (buffer_capacity <= 0) throw ConfigError("buffer_capacity must be > 0");
    if (demo_size < 0) throw ConfigError("demo_size must be >= 0");
    if (learning_rate <= 0) throw ConfigError("learning_rate must be > 0");
    if (warmup_steps < batch_size) throw ConfigError("warmup_steps must be >= batch_size");
    if (episodes <= 0) throw ConfigError("episodes must be > 0");
    if (steps_per_episode <= 0) throw ConfigError("steps_per_episode must be > 0");
    if (exploration.epsilon_start < exploration.epsilon_min ||
        exploration.epsilon_min < 0 || exploration.epsilon_start > 1 ||
        exploration.decay <= 0 || exploration.decay > 1)
        throw ConfigError("invalid exploration schedule");
}

void TlwdConfig::validate() const {
    if (lambda_n < 0 || lambda_margin < 0 || lambda_l2 < 0)
        throw ConfigError("loss weights must be >= 0");
    if (n_step < 1) throw ConfigError("n_step must be >= 1");
    if (pretrain_steps < 0) throw ConfigError("pretrain_steps must be >= 0");
    if (margin < 0) throw ConfigError("margin must be >= 0");
    if (alpha < 0) throw ConfigError("alpha must be >= 0");
    if (beta0 < 0 || beta0 > 1) throw ConfigError("beta0 must be in [0,1]");
    if (priority_floor <= 0) throw ConfigError("priority_floor must be > 0");
    if (demo_bonus < 0) throw ConfigError("demo_bonus must be >= 0");
}

void q_learning_update(QTable& table, const EnvState& s, int action, double reward,
                       const EnvState& next, double gamma) {
    const int si = encode_state(s);
    const int ni = encode_state(next);
    require(action >= 0 && action < kActionCount, "invalid action");

    auto& counts = table.counts[static_cast<std::size_t>(si)];
    auto& row = table.values[static_cast<std::size_t>(si)];
    const double alpha =
        1.0 / (1.0 + static_cast<double>(counts[static_cast<std::size_t>(action)]));
    const auto& next_row = table.values[static_cast<std::size_t>(ni)];
    const double best_next = *std::max_element(next_row.begin(), next_row.end());
    row[static_cast<std::size_t>(action)] +=
        alpha * (reward + gamma * best_next - row[static_cast<std::size_t>(action)]);
    counts[static_cast<std::size_t>(action)] += 1;
}

int argmax_action(const std::vector<double>& q_values) {
    require(!q_values.empty(), "empty q-value vector");
    int best = 0;
    for (int i = 1; i < static_cast<int>(q_values.size()); ++i) {
        if (q_values[static_cast<std::size_t>(i)] > q_values[static_cast<std::size_t>(best)])
            best = i;  // ties keep the lowest index
    }
    return best;
}

int epsilon_greedy(const std::vector<double>& q_values, double eps, Rng& rng) {
    require(eps >= 0.0 && eps <= 1.0, "epsilon must be in [0,1]");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < eps) {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(q_values.size()) - 1);
        return pick(rng);
    }
    return argmax_action(q_values);
}

int QLearningAgent::act(const EnvState& s, double eps, Rng& rng) const {
    const auto& row = table_.values[static_cast<std::size_t>(encode_state(s))];
    return epsilon_greedy(std::vector<double>(row.begin(), row.end()), eps, rng);
}

void QLearningAgent::observe(const EnvState& s, int action, double reward,
                             const EnvState& next) {
    q_learning_update(table_, s, action, reward, next, gamma_);
}

Eigen::VectorXd state_features(const EnvState& s) {
    Eigen::VectorXd f(5);
    f << s.c, s.r, s.w, s.v, s.m;
    return f;
}

namespace {

Eigen::Index col_argmax(const Eigen::MatrixXd& m, Eigen::Index col) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < m.rows(); ++i) {
        if (m(i, col) > m(best, col)) best = i;
    }
    return best;
}

}  // namespace

double ddqn_target(double reward, const EnvState& next, bool terminal,
                   const NetworkParams& online, const NetworkParams& target,
                   double gamma) {
    if (terminal) return reward;
    const Eigen::VectorXd f = state_features(next);
    const Eigen::VectorXd q_online = forward(online, f);
    Eigen::Index best = 0;
    q_online.maxCoeff(&best);
    // Break ties toward the lowest index like argmax_action does.
    for (Eigen::Index i = 0; i < q_online.size(); ++i) {
        if (q_online(i) == q_online(best)) {
            best = i;
            break;
        }
    }
    const Eigen::VectorXd q_target = forward(target, f);
    return reward + gamma * q_target(best);
}

double n_step_return(const std::vector<double>& rewards, double gamma) {
    require(!rewards.empty(), "n-step return needs at least one reward");
    double total = 0.0;
    double discount = 1.0;
    for (double r : rewards) {
        total += discount * r;
        discount *= gamma;
    }
    return total;
}

TlwdLossResult tlwd_loss(const NetworkParams& online, const NetworkParams& target,
                         const std::vector<Transition>& batch,
                         const std::vector<double>& is_weights, const TlwdConfig& cfg,
                         double gamma) {
    const auto n = static_cast<Eigen::Index>(batch.size());
    require(n > 0, "batch must be nonempty");
    require(is_weights.size() == batch.size(), "weights must match batch length");

    const int out_dim = online.output_dim();
    Eigen::MatrixXd s(5, n), s1(5, n), sn(5, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& t = batch[static_cast<std::size_t>(i)];
        require(t.n_step_horizon >= 1, "transition missing n-step fields");
        s.col(i) = state_features(t.state);
        s1.col(i) = state_features(t.next_state);
        sn.col(i) = state_features(t.n_step_state);
    }

    ForwardCache cache = forward_batch(online, s);
    const Eigen::MatrixXd& q = cache.a.back();
    const Eigen::MatrixXd q1_online = forward_batch(online, s1).a.back();
    const Eigen::MatrixXd q1_target = forward_batch(target, s1).a.back();

    const bool use_nstep = cfg.lambda_n > 0.0;
    Eigen::MatrixXd qn_online, qn_target;
    if (use_nstep) {
        qn_online = forward_batch(online, sn).a.back();
        qn_target = forward_batch(target, sn).a.back();
    }

    TlwdLossResult result;
    result.td_errors.resize(batch.size());
    Eigen::MatrixXd output_grad = Eigen::MatrixXd::Zero(out_dim, n);
    const double inv_n = 1.0 / static_cast<double>(n);

    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& t = batch[static_cast<std::size_t>(i)];
        const double w = is_weights[static_cast<std::size_t>(i)];
        require(t.action >= 0 && t.action < out_dim, "action index out of range");

        // One-step double-estimator target.
        double y1 = t.reward;
        if (!t.terminal) {
            const Eigen::Index best = col_argmax(q1_online, i);
            y1 += gamma * q1_target(best, i);
        }
        const double e1 = q(t.action, i) - y1;
        result.j_ddqn += w * e1 * e1 * inv_n;
        result.td_errors[static_cast<std::size_t>(i)] = y1 - q(t.action, i);
        output_grad(t.action, i) += 2.0 * w * e1 * inv_n;

        if (use_nstep) {
            double yn = t.n_step_return;
            if (!t.n_step_terminal) {
                double boot;
                if (cfg.nstep_double_estimator) {
                    boot = qn_target(col_argmax(qn_online, i), i);
                } else {
                    boot = qn_target.col(i).maxCoeff();
                }
                yn += std::pow(gamma, t.n_step_horizon) * boot;
            }
            const double en = q(t.action, i) - yn;
            result.j_n += w * en * en * inv_n;
            output_grad(t.action, i) += 2.0 * cfg.lambda_n * w * en * inv_n;
        }

        if (t.is_demo && cfg.lambda_margin > 0.0) {
            // Expert-action supervision: max_a [Q + margin penalty] - Q(a_E).
            Eigen::Index best = 0;
            double best_val = -std::numeric_limits<double>::infinity();
            for (Eigen::Index a = 0; a < out_dim; ++a) {
                const double val = q(a, i) + (a == t.action ? 0.0 : cfg.margin);
                if (val > best_val) {
                    best_val = val;
                    best = a;
                }
            }
            const double margin_loss = best_val - q(t.action, i);
            result.j_margin += margin_loss * inv_n;
            if (best != t.action) {
                output_grad(best, i) += cfg.lambda_margin * inv_n;
                output_grad(t.action, i) -= cfg.lambda_margin * inv_n;
            }
        }
    }

    result.grads = GradientSet::zeros_like(online);
    backward_batch(online, cache, output_grad, result.grads);

    if (cfg.lambda_l2 > 0.0) {
        for (std::size_t l = 0; l < online.weights.size(); ++l) {
            result.j_l2 += online.weights[l].squaredNorm() + online.biases[l].squaredNorm();
            result.grads.weights[l] += 2.0 * cfg.lambda_l2 * online.weights[l];
            result.grads.biases[l] += 2.0 * cfg.lambda_l2 * online.biases[l];
        }
    }

    result.total = result.j_ddqn + cfg.lambda_n * result.j_n +
                   cfg.lambda_margin * result.j_margin + cfg.lambda_l2 * result.j_l2;
    return result;
}

NStepAccumulator::NStepAccumulator(int n, double gamma) : n_(n), gamma_(gamma) {
    require(n >= 1, "n-step horizon must be >= 1");
}

Transition NStepAccumulator::finalize(std::size_t start) const {
    Transition t = pending_[start];
    double total = 0.0;
    double discount = 1.0;
    std::size_t last = start;
    for (std::size_t k = start; k < pending_.size() && k < start + static_cast<std::size_t>(n_); ++k) {
        total += discount * pending_[k].reward;
        discount *= gamma_;
        last = k;
        if (pending_[k].terminal) break;
    }
    t.n_step_return = total;
    t.n_step_state = pending_[last].next_state;
    t.n_step_horizon = static_cast<int>(last - start + 1);
    t.n_step_terminal = pending_[last].terminal;
    return t;
}

std::vector<Transition> NStepAccumulator::push(const Transition& one_step) {
    pending_.push_back(one_step);
    std::vector<Transition> ready;
    if (one_step.terminal) {
        ready = flush();
    } else if (pending_.size() >= static_cast<std::size_t>(n_)) {
        ready.push_back(finalize(0));
        pending_.pop_front();
    }
    return ready;
}

std::vector<Transition> NStepAccumulator::flush() {
    std::vector<Transition> ready;
    for (std::size_t start = 0; start < pending_.size(); ++start)
        ready.push_back(finalize(start));
    pending_.clear();
    return ready;
}

DeepAgent::DeepAgent(AgentKind kind, const TrainConfig& train, const TlwdConfig& tlwd,
                     Rng& init_rng)
    : kind_(kind), train_(train), tlwd_(tlwd) {
    train_.validate();
    tlwd_.validate();
    online_ = init_network({5, 24, 24, kActionCount}, init_rng);
    target_ = sync_target(online_);
}

DeepAgent::DeepAgent(AgentKind kind, const TrainConfig& train, const TlwdConfig& tlwd,
                     NetworkParams source_weights)
    : kind_(kind), train_(train), tlwd_(tlwd), online_(std::move(source_weights)) {
    train_.validate();
    tlwd_.validate();
    if (online_.output_dim() != kActionCount)
        throw IoError("source weights have wrong action dimension");
    if (online_.input_dim() != 5) throw IoError("source weights have wrong input dimension");
    target_ = sync_target(online_);
}

int DeepAgent::act(const EnvState& s, double eps, Rng& rng) const {
    const Eigen::VectorXd q = forward(online_, state_features(s));
    return epsilon_greedy(std::vector<double>(q.data(), q.data() + q.size()), eps, rng);
}

std::optional<double> DeepAgent::train_step(PrioritizedBuffer& buffer, Rng& rng) {
    if (buffer.size() < static_cast<std::size_t>(std::max(train_.warmup_steps, train_.batch_size)))
        return std::nullopt;

    SampleBatch batch = buffer.sample(train_.batch_size, rng);

    std::vector<double> weights;
    TlwdConfig loss_cfg = tlwd_;
    if (kind_ == AgentKind::Tlwd) {
        weights = buffer.importance_weights(batch.probabilities, buffer.beta_at(step_count_));
    } else {
        weights.assign(batch.transitions.size(), 1.0);  // uniform, Eq-17 loss
        loss_cfg.lambda_n = 0.0;
        loss_cfg.lambda_margin = 0.0;
        loss_cfg.lambda_l2 = 0.0;
    }

    TlwdLossResult loss =
        tlwd_loss(online_, target_, batch.transitions, weights, loss_cfg, train_.gamma);
    sgd_step(online_, loss.grads, train_.learning_rate);

    if (kind_ == AgentKind::Tlwd)
        buffer.update_priorities(batch.slots, batch.versions, loss.td_errors);

    ++step_count_;
    if (step_count_ % train_.target_sync_period == 0) target_ = sync_target(online_);
    return loss.total;
}

void DeepAgent::pretrain(PrioritizedBuffer& buffer, Rng& rng) {
    if (buffer.demo_count() == 0)
        throw ConfigError("pretraining requires a demo-initialized buffer");
    for (int t = 0; t < tlwd_.pretrain_steps; ++t) {
        auto loss = train_step(buffer, rng);
        require(loss.has_value(), "pretrain buffer must cover a batch");
    }
}

std::vector<Transition> collect_demonstrations(const NetworkParams& policy,
                                               const EnvConfig& env_config, int count,
                                               int n, double gamma,
                                               double residual_epsilon, Rng& rng) {
    require(count > 0, "demonstration count must be > 0");
    Environment env(env_config);
    NStepAccumulator accumulator(n, gamma);
    std::vector<Transition> demos;
    demos.reserve(static_cast<std::size_t>(count));

    EnvState state = sample_state(env_config.probs, rng);
    int step_in_episode = 0;
    while (static_cast<int>(demos.size()) < count) {
        const Eigen::VectorXd q = forward(policy, state_features(state));
        const int action = epsilon_greedy(
            std::vector<double>(q.data(), q.data() + q.size()), residual_epsilon, rng);
        StepResult result = env.step(state, Action{action}, rng);
        ++step_in_episode;

        Transition t;
        t.state = state;
        t.action = action;
        t.reward = result.reward;
        t.next_state = result.next_state;
        t.terminal = step_in_episode >= env_config.episode_length;
        t.is_demo = true;
        for (auto& done : accumulator.push(t)) {
            if (static_cast<int>(demos.size()) < count) demos.push_back(done);
        }
        if (t.terminal) {
            state = sample_state(env_config.probs, rng);
            step_in_episode = 0;
        } else {
            state = result.next_state;
        }
    }
    return demos;
}

DeepAgent dpr_initialize(const std::string& source_weights_path,
                         const TrainConfig& train, const TlwdConfig& tlwd) {
    NetworkParams weights = load_network(source_weights_path);
    return DeepAgent(AgentKind::Dpr, train, tlwd, std::move(weights));
}

}  // namespace jrc
