// Acceptance suite: end-to-end checks of the simulator, learners, and
// harness. Each criterion prints one [PASS]/[FAIL] line; the process exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "jrc/agents.hpp"
#include "jrc/config.hpp"
#include "jrc/env.hpp"
#include "jrc/harness.hpp"
#include "jrc/nn.hpp"
#include "jrc/radar.hpp"
#include "jrc/replay.hpp"

using namespace jrc;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << id << " " << name << ": " << detail
              << std::endl;
    if (!pass) ++g_failures;
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(4);
    out << v;
    return out.str();
}

// ---- criterion 1: radar geometry ----

void criterion_radar_geometry() {
    ChirpConfig long_chirp{3e8, 1e13, 225.0, std::nullopt};
    ChirpConfig short_chirp{7.5e8, 1.5e13, 45.0, std::nullopt};
    RadarMode lr = derive_ranges(long_chirp);
    RadarMode sr = derive_ranges(short_chirp);
    bool pass = lr.r_re == 0.5 && lr.r_max == 225.0 && sr.r_re == 0.2 && sr.r_max == 45.0;
    report(1, "radar geometry", pass,
           "long (" + fmt(lr.r_re) + " m, " + fmt(lr.r_max) + " m), short (" +
               fmt(sr.r_re) + " m, " + fmt(sr.r_max) + " m)");
}

// ---- criterion 2: gradient oracle ----

void criterion_gradient_oracle() {
    Rng rng(1001);
    const double h = 1e-5;
    double worst = 0.0;
    bool pass = true;

    for (int pair = 0; pair < 100 && pass; ++pair) {
        NetworkParams p = init_network({5, 24, 24, 4}, rng);
        WeightedBatch batch;
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::uniform_int_distribution<int> act(0, 3);
        std::uniform_real_distribution<double> wdist(0.1, 1.0);
        for (int i = 0; i < 16; ++i) {
            Eigen::VectorXd x(5);
            for (int d = 0; d < 5; ++d) x(d) = u(rng);
            batch.inputs.push_back(x);
            batch.actions.push_back(act(rng));
            batch.targets.push_back(5.0 * u(rng));
            batch.weights.push_back(wdist(rng));
        }
        auto eval = [&](const NetworkParams& net) {
            double loss = 0.0;
            for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
                double err = batch.targets[i] - forward(net, batch.inputs[i])(batch.actions[i]);
                loss += batch.weights[i] * err * err;
            }
            return loss / static_cast<double>(batch.inputs.size());
        };
        auto [loss, grads] = loss_and_gradients(p, batch);
        (void)loss;

        // Probes whose half-step and full-step estimates disagree straddle a
        // rectifier kink; the loss is not differentiable there, so skip them.
        auto check = [&](double analytic, auto bump) {
            NetworkParams plus = p, minus = p;
            bump(plus, h);
            bump(minus, -h);
            const double numeric = (eval(plus) - eval(minus)) / (2 * h);
            bump(plus, -h / 2);
            bump(minus, h / 2);
            const double half = (eval(plus) - eval(minus)) / h;
            const double scale = std::max(1.0, std::abs(numeric));
            if (std::abs(numeric - half) / scale > 5e-5) return;
            const double err = std::abs(analytic - numeric) / scale;
            worst = std::max(worst, err);
            if (err >= 1e-4) pass = false;
        };

        for (std::size_t l = 0; l < p.weights.size() && pass; ++l) {
            for (Eigen::Index r = 0; r < p.weights[l].rows() && pass; ++r) {
                for (Eigen::Index c = 0; c < p.weights[l].cols() && pass; ++c) {
                    check(grads.weights[l](r, c), [l, r, c](NetworkParams& net, double d) {
                        net.weights[l](r, c) += d;
                    });
                }
            }
            for (Eigen::Index r = 0; r < p.biases[l].size() && pass; ++r) {
                check(grads.biases[l](r), [l, r](NetworkParams& net, double d) {
                    net.biases[l](r) += d;
                });
            }
        }
    }
    report(2, "gradient oracle", pass, "100 nets, worst relative error " + fmt(worst));
}

// ---- criterion 3: sampling law ----

void criterion_sampling_law() {
    const int items = 10'000;
    const long draws = 1'000'000;
    bool pass = true;
    std::string detail;

    for (double alpha : {0.0, 0.4, 1.0}) {
        PrioritizedBuffer buf(items, alpha, 1.0, 1.0, 0, 0.001, 0.0);
        Rng rng(2024);
        std::uniform_real_distribution<double> td(0.5, 1.5);
        std::vector<int> slots(items);
        std::vector<std::uint64_t> versions(items, 1);
        std::vector<double> tds(items);
        Transition t;
        for (int i = 0; i < items; ++i) {
            buf.push(t);
            slots[static_cast<std::size_t>(i)] = i;
            tds[static_cast<std::size_t>(i)] = td(rng);
        }
        buf.update_priorities(slots, versions, tds);

        std::vector<long> hits(items, 0);
        const int batch = 1000;
        for (long r = 0; r < draws / batch; ++r) {
            auto sample = buf.sample(batch, rng);
            for (int slot : sample.slots) ++hits[static_cast<std::size_t>(slot)];
        }

        const double total = buf.total_priority_mass();
        double stat = 0.0;
        for (int i = 0; i < items; ++i) {
            const double expected = draws * buf.priority_mass_of(i) / total;
            const double diff = hits[static_cast<std::size_t>(i)] - expected;
            stat += diff * diff / expected;
        }
        boost::math::chi_squared_distribution<double> dist(items - 1);
        const double p_value = boost::math::cdf(boost::math::complement(dist, stat));
        if (p_value <= 0.01) pass = false;
        detail += "alpha " + fmt(alpha) + " p " + fmt(p_value) + "; ";
    }
    report(3, "sampling law", pass, detail);
}

// ---- criterion 4: event-probability oracle ----

void criterion_event_probability(const Scenario& source, const Scenario& target) {
    bool pass = true;
    std::string detail;
    const std::array<std::pair<const Scenario*, double>, 2> cases = {
        std::pair<const Scenario*, double>{&source, 0.2209},
        std::pair<const Scenario*, double>{&target, 0.1119}};
    for (const auto& [scenario, published] : cases) {
        const auto& probs = scenario->env.probs;
        const double closed = mean_event_probability(probs);
        Rng rng(3003);
        const long n = 1'000'000;
        double sum = 0.0, sum_sq = 0.0;
        for (long i = 0; i < n; ++i) {
            double p = event_probability(sample_state(probs, rng), probs);
            sum += p;
            sum_sq += p * p;
        }
        const double mc = sum / n;
        const double var = (sum_sq / n - mc * mc) / n;
        const double sigma = std::sqrt(var);
        if (std::abs(closed - published) > 5e-5) pass = false;
        if (std::abs(mc - closed) > 3 * sigma) pass = false;
        detail += scenario->name + " closed " + fmt(closed) + " mc " + fmt(mc) + "; ";
    }
    report(4, "event-probability oracle", pass, detail);
}

// ---- criterion 5: clustering oracle ----

int brute_force_components(const std::vector<SceneObject>& objects, double r_re) {
    const int n = static_cast<int>(objects.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double ri = std::hypot(objects[i].x, objects[i].y);
            double rj = std::hypot(objects[j].x, objects[j].y);
            if (std::abs(ri - rj) - range_depth(objects[i]) - range_depth(objects[j]) <
                r_re) {
                int a = find(i), b = find(j);
                if (a != b) parent[b] = a;
            }
        }
    }
    int components = 0;
    for (int i = 0; i < n; ++i)
        if (find(i) == i) ++components;
    return components;
}

void criterion_clustering_oracle() {
    Rng rng(4004);
    SizeDistributions sizes;
    int mismatches = 0;
    for (int scene_idx = 0; scene_idx < 1000; ++scene_idx) {
        const bool short_mode = scene_idx % 2 == 0;
        RadarMode mode = short_mode ? RadarMode{0.2, 45.0} : RadarMode{0.5, 225.0};
        std::uniform_int_distribution<int> count_dist(0, 100);
        auto scene = generate_scene(count_dist(rng), mode, sizes, rng);
        if (count_detected(scene, mode.r_re) != brute_force_components(scene, mode.r_re))
            ++mismatches;
    }
    report(5, "clustering oracle", mismatches == 0,
           "1000 scenes, " + std::to_string(mismatches) + " mismatches");
}

// ---- criterion 6: tabular learning vs dynamic programming ----

// Frozen variant: the event indicator, packet yield, miss ratios, and the
// (action-independent, cyclic) state transition are all deterministic, so
// exact optimal values come from value iteration.
struct FrozenModel {
    double gamma = 0.5;
    EnvConfig env;

    bool event(const EnvState& s) const { return s.r == 1 && s.m == 1; }

    double reward(int state_index, int action_index) const {
        EnvState s = decode_state(state_index);
        Action a{action_index};
        const bool ev = event(s);
        std::optional<int> packets;
        std::optional<double> miss;
        if (a.is_comm()) {
            packets = s.c == 0 ? env.comm.packets_good[a.comm_rate()]
                               : env.comm.packets_bad[a.comm_rate()];
        } else {
            miss = a.index == Action::kRadarLong ? 0.6 : 0.1;
        }
        return immediate_reward(a, ev, packets, miss, env.rewards);
    }

    int next(int state_index) const { return (state_index + 1) % kStateCount; }
};

void criterion_q_learning_vs_value_iteration(const Scenario& source) {
    FrozenModel model;
    model.env = source.env;

    // Value iteration to fixpoint.
    std::array<std::array<double, kActionCount>, kStateCount> q_star{};
    for (int sweep = 0; sweep < 10'000; ++sweep) {
        double delta = 0.0;
        for (int s = 0; s < kStateCount; ++s) {
            const int ns = model.next(s);
            double best_next = q_star[static_cast<std::size_t>(ns)][0];
            for (int a = 1; a < kActionCount; ++a)
                best_next = std::max(best_next, q_star[static_cast<std::size_t>(ns)][static_cast<std::size_t>(a)]);
            for (int a = 0; a < kActionCount; ++a) {
                const double updated = model.reward(s, a) + model.gamma * best_next;
                delta = std::max(delta,
                                 std::abs(updated - q_star[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]));
                q_star[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = updated;
            }
        }
        if (delta < 1e-12) break;
    }

    // Tabular learning: 1e5 updates sweeping state-action pairs round-robin.
    QTable table;
    for (int update = 0; update < 100'000; ++update) {
        const int pair = update % (kStateCount * kActionCount);
        const int s = pair / kActionCount;
        const int a = pair % kActionCount;
        q_learning_update(table, decode_state(s), a, model.reward(s, a),
                          decode_state(model.next(s)), model.gamma);
    }

    int agree = 0;
    for (int s = 0; s < kStateCount; ++s) {
        std::vector<double> vi(q_star[static_cast<std::size_t>(s)].begin(),
                               q_star[static_cast<std::size_t>(s)].end());
        std::vector<double> ql(table.values[static_cast<std::size_t>(s)].begin(),
                               table.values[static_cast<std::size_t>(s)].end());
        if (argmax_action(vi) == argmax_action(ql)) ++agree;
    }
    report(6, "tabular learning vs value iteration", agree == kStateCount,
           std::to_string(agree) + "/32 greedy actions agree");
}

// ---- training helpers for criteria 7-10 ----

RunHistory run_scenario(Scenario s, AgentKind agent, std::uint64_t seed, int episodes) {
    s.agent = agent;
    s.seed = seed;
    s.train.episodes = episodes;
    Trainer trainer(s);
    return trainer.train();
}

std::vector<double> reward_curve(const RunHistory& h) {
    std::vector<double> curve;
    curve.reserve(h.episodes.size());
    for (const auto& e : h.episodes) curve.push_back(e.avg_reward);
    return curve;
}

std::vector<double> median_curve(const std::vector<std::vector<double>>& runs) {
    std::vector<double> out(runs.front().size());
    for (std::size_t e = 0; e < out.size(); ++e) {
        std::vector<double> column;
        for (const auto& run : runs) column.push_back(run[e]);
        std::sort(column.begin(), column.end());
        out[e] = column[column.size() / 2];
    }
    return out;
}

std::vector<double> smooth(const std::vector<double>& curve, int window) {
    std::vector<double> out(curve.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        acc += curve[i];
        if (i >= static_cast<std::size_t>(window)) acc -= curve[i - window];
        out[i] = acc / std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    }
    return out;
}

double plateau_level(const std::vector<double>& smoothed, int tail = 50) {
    const auto n = static_cast<int>(smoothed.size());
    std::vector<double> last(smoothed.end() - std::min(tail, n), smoothed.end());
    return mean(last);
}

// First episode whose smoothed reward reaches 90% of the run's plateau.
int episodes_to_90(const std::vector<double>& curve) {
    auto smoothed = smooth(curve, 25);
    const double plateau = plateau_level(smoothed);
    const double threshold = 0.9 * plateau;
    for (std::size_t e = 0; e < smoothed.size(); ++e)
        if (smoothed[e] >= threshold) return static_cast<int>(e);
    return static_cast<int>(smoothed.size());
}

// First episode from which the smoothed reward stays at or above 90% of the
// plateau. Transfer fine-tuning curves dip and recover, so the entry into the
// plateau band -- not the first crossing -- marks convergence.
int episodes_to_sustained_90(const std::vector<double>& curve) {
    auto smoothed = smooth(curve, 25);
    const double threshold = 0.9 * plateau_level(smoothed);
    int entry = 0;
    for (std::size_t e = 0; e < smoothed.size(); ++e)
        if (smoothed[e] < threshold) entry = static_cast<int>(e) + 1;
    return entry;
}

double final_window_mean(const std::vector<double>& curve, int window = 50) {
    std::vector<double> tail(curve.end() - std::min<std::size_t>(window, curve.size()),
                             curve.end());
    return mean(tail);
}

// ---- criterion 7 + source artifacts ----

struct SourceArtifacts {
    std::string weights_path;
    std::string demo_path;
};

SourceArtifacts criterion_source_learning(const Scenario& source,
                                          const std::string& out_dir) {
    const int episodes = 400;
    const int seeds = 5;
    std::vector<double> ql_final, ddqn_final;
    NetworkParams best_weights;
    double best_score = -std::numeric_limits<double>::infinity();

    for (int k = 0; k < seeds; ++k) {
        auto ql = run_scenario(source, AgentKind::QLearning, 100 + k, episodes);
        ql_final.push_back(final_window_mean(reward_curve(ql)));
        auto dq = run_scenario(source, AgentKind::Ddqn, 100 + k, episodes);
        const double score = final_window_mean(reward_curve(dq));
        ddqn_final.push_back(score);
        if (score > best_score) {
            best_score = score;
            best_weights = dq.final_weights;
        }
    }

    const double ql_mean = mean(ql_final);
    const double ddqn_mean = mean(ddqn_final);
    const bool pass = ddqn_mean >= ql_mean + 0.2 * std::max(std::abs(ql_mean), 0.1);
    report(7, "source learning comparison", pass,
           "final-50 mean reward ddqn " + fmt(ddqn_mean) + " vs tabular " + fmt(ql_mean));

    SourceArtifacts artifacts;
    artifacts.weights_path = out_dir + "/source_weights.json";
    artifacts.demo_path = out_dir + "/demos.json";
    save_network(best_weights, artifacts.weights_path);

    Rng demo_rng(5005);
    auto demos = collect_demonstrations(best_weights, source.env, source.train.demo_size,
                                        source.tlwd.n_step, source.train.gamma, 0.01,
                                        demo_rng);
    save_demos(demos, source.tlwd.n_step, source.train.gamma, artifacts.demo_path);
    return artifacts;
}

// ---- criterion 8: transfer convergence speed ----

void criterion_transfer_convergence(Scenario target, const SourceArtifacts& art) {
    target.source_weights_path = art.weights_path;
    target.demo_path = art.demo_path;
    const int episodes = 250;
    const int seeds = 5;

    auto median_for = [&](AgentKind agent) {
        std::vector<std::vector<double>> runs;
        for (int k = 0; k < seeds; ++k)
            runs.push_back(reward_curve(run_scenario(target, agent, 200 + k, episodes)));
        return median_curve(runs);
    };

    const int ddqn = episodes_to_90(median_for(AgentKind::Ddqn));
    const int dpr = episodes_to_90(median_for(AgentKind::Dpr));
    const int tlwd = episodes_to_90(median_for(AgentKind::Tlwd));
    const bool pass = 2 * dpr <= ddqn && 2 * tlwd <= ddqn;
    report(8, "transfer convergence speed", pass,
           "episodes to 90% plateau: ddqn " + std::to_string(ddqn) + ", dpr " +
               std::to_string(dpr) + ", tlwd " + std::to_string(tlwd));
}

// ---- criterion 9: miss-detection reduction across the hazard sweep ----

void criterion_miss_reduction(Scenario target, const SourceArtifacts& art) {
    target.source_weights_path = art.weights_path;
    target.demo_path = art.demo_path;
    const std::vector<double> values = {0.2, 0.4, 0.6, 0.8};
    const int episodes = 40;
    const int seeds = 3;

    auto mean_miss = [&](AgentKind agent, double p1v, int seed) {
        Scenario point = target;
        apply_sweep_override(point.env, "p1v", p1v);
        auto history = run_scenario(point, agent, 300 + seed, episodes);
        double acc = 0.0;
        int n = 0;
        for (const auto& e : history.episodes) {
            if (e.miss_prob) {
                acc += *e.miss_prob;
                ++n;
            }
        }
        return n > 0 ? acc / n : 0.0;
    };

    bool dominated = true;
    double ddqn_at_08 = 0.0, tlwd_at_08 = 0.0;
    std::string detail;
    for (double v : values) {
        double ddqn = 0.0, tlwd = 0.0;
        for (int k = 0; k < seeds; ++k) {
            ddqn += mean_miss(AgentKind::Ddqn, v, k);
            tlwd += mean_miss(AgentKind::Tlwd, v, k);
        }
        ddqn /= seeds;
        tlwd /= seeds;
        if (tlwd > ddqn) dominated = false;
        if (v == 0.8) {
            ddqn_at_08 = ddqn;
            tlwd_at_08 = tlwd;
        }
        detail += fmt(v) + ": " + fmt(tlwd) + "/" + fmt(ddqn) + "; ";
    }
    const bool pass = dominated && tlwd_at_08 <= 0.7 * ddqn_at_08;
    report(9, "miss-detection reduction", pass, "P_k tlwd/ddqn at p1v " + detail);
}

// ---- criterion 10: prioritized vs uniform sampling ----

void criterion_prioritized_speedup(Scenario target, const SourceArtifacts& art) {
    target.source_weights_path = art.weights_path;
    target.demo_path = art.demo_path;
    const int episodes = 150;
    const int seeds = 5;

    // The transfer configs run at a deliberately small step size so the
    // scratch baseline's climb is visible; the sampling-strategy comparison
    // instead needs the fine-tuning dynamics themselves to play out within
    // the budget, so it runs with a larger step size and exploration burst.
    // Both variants share the settings; only the sampling exponents differ.
    target.train.learning_rate = 1e-3;
    target.train.exploration.epsilon_start = 0.1;
    target.train.exploration.decay = 0.8;

    auto ep90_for = [&](double alpha, double beta0) {
        Scenario variant = target;
        variant.tlwd.alpha = alpha;
        variant.tlwd.beta0 = beta0;
        std::vector<std::vector<double>> runs;
        for (int k = 0; k < seeds; ++k)
            runs.push_back(reward_curve(run_scenario(variant, AgentKind::Tlwd, 400 + k, episodes)));
        return episodes_to_sustained_90(median_curve(runs));
    };

    const int prioritized = ep90_for(0.4, 0.6);
    const int uniform = ep90_for(0.0, 0.0);
    report(10, "prioritized sampling speedup", prioritized < uniform,
           "episodes to plateau: prioritized " + std::to_string(prioritized) +
               ", uniform " + std::to_string(uniform));
}

// ---- criterion 11: determinism ----

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void criterion_determinism(Scenario target, const SourceArtifacts& art,
                          const std::string& out_dir) {
    target.source_weights_path = art.weights_path;
    target.demo_path = art.demo_path;
    bool pass = true;
    std::string detail;

    for (AgentKind agent : {AgentKind::QLearning, AgentKind::Ddqn, AgentKind::Tlwd}) {
        Scenario s = target;
        s.agent = agent;
        s.seed = 99;
        s.train.episodes = agent == AgentKind::Tlwd ? 2 : 5;
        if (agent == AgentKind::Tlwd) s.tlwd.pretrain_steps = 200;
        const std::string dir_a = out_dir + "/det_a_" + to_string(agent);
        const std::string dir_b = out_dir + "/det_b_" + to_string(agent);
        train(s, dir_a);
        train(s, dir_b);
        bool same = slurp(dir_a + "/episodes.csv") == slurp(dir_b + "/episodes.csv");
        if (agent != AgentKind::QLearning)
            same = same && slurp(dir_a + "/weights.json") == slurp(dir_b + "/weights.json");
        if (!same) {
            pass = false;
            detail += to_string(agent) + " differs; ";
        }
    }

    SweepSpec spec;
    spec.parameter = "p1v";
    spec.values = {0.3};
    spec.episodes_per_point = 2;
    spec.seeds_per_point = 1;
    spec.agents = {AgentKind::QLearning};
    write_sweep_csv(run_sweep(spec, target), out_dir + "/sweep_a.csv");
    write_sweep_csv(run_sweep(spec, target), out_dir + "/sweep_b.csv");
    if (slurp(out_dir + "/sweep_a.csv") != slurp(out_dir + "/sweep_b.csv")) {
        pass = false;
        detail += "sweep differs; ";
    }

    report(11, "determinism", pass, pass ? "train and sweep outputs byte-identical" : detail);
}

}  // namespace

int main(int argc, char** argv) {
    std::string configs_dir = "configs";
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--configs") configs_dir = argv[i + 1];
    }

    const std::string out_dir = "acceptance_out";
    std::filesystem::create_directories(out_dir);

    Scenario source = load_scenario(configs_dir + "/source.json");
    Scenario target = load_scenario(configs_dir + "/target.json");

    const auto started = std::chrono::steady_clock::now();
    criterion_radar_geometry();
    criterion_gradient_oracle();
    criterion_sampling_law();
    criterion_event_probability(source, target);
    criterion_clustering_oracle();
    criterion_q_learning_vs_value_iteration(source);
    SourceArtifacts artifacts = criterion_source_learning(source, out_dir);
    criterion_transfer_convergence(target, artifacts);
    criterion_miss_reduction(target, artifacts);
    criterion_prioritized_speedup(target, artifacts);
    criterion_determinism(target, artifacts, out_dir);

    const auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " +
                  std::to_string(g_failures))
              << " (" << elapsed << " s)" << std::endl;
    return g_failures == 0 ? 0 : 1;
}
