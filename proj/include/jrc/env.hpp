#ifndef JRC_ENV_HPP
#define JRC_ENV_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "jrc/radar.hpp"

namespace jrc {

using Rng = std::mt19937_64;

// Five binary environment factors; 1 is the unfavorable value.
// c: channel, r: road, w: weather, v: speed, m: nearby vehicles.
struct EnvState {
    std::uint8_t c = 0;
    std::uint8_t r = 0;
    std::uint8_t w = 0;
    std::uint8_t v = 0;
    std::uint8_t m = 0;

    bool operator==(const EnvState&) const = default;
};

constexpr int kStateCount = 32;

// Index layout: c + 2r + 4w + 8v + 16m.
int encode_state(const EnvState& s);
EnvState decode_state(int index);

// Per-factor priors and event probabilities. tau0[f] is the probability
// the factor takes its favorable value 0; event_p[f] = {p0, p1} is the
// per-step event probability contribution at factor value 0/1. The
// channel has no event contribution.
struct FactorProbabilities {
    // Factor order: c, r, w, v, m for tau0; r, w, v, m for event_p.
    std::array<double, 5> tau0{};
    std::array<std::array<double, 2>, 4> event_p{};

    void validate() const;
};

constexpr int kFactorC = 0, kFactorR = 1, kFactorW = 2, kFactorV = 3, kFactorM = 4;
// event_p indices
constexpr int kEventR = 0, kEventW = 1, kEventV = 2, kEventM = 3;

// Fixed action index mapping: 0 radar long, 1 radar short, 2 comm low, 3 comm high.
struct Action {
    int index = 0;

    static constexpr int kRadarLong = 0;
    static constexpr int kRadarShort = 1;
    static constexpr int kCommLow = 2;
    static constexpr int kCommHigh = 3;

    bool is_radar() const { return index < 2; }
    bool is_comm() const { return index >= 2; }
    int radar_mode() const { return index; }      // into EnvConfig::radar_modes
    int comm_rate() const { return index - 2; }   // 0 low, 1 high
};

constexpr int kActionCount = 4;

struct CommConfig {
    std::array<int, 2> packets_good{2, 4};  // per rate (low, high), channel c = 0
    std::array<int, 2> packets_bad{2, 0};   // channel c = 1
    int max_packets = 4;

    void validate() const;
};

struct RewardWeights {
    double rho1 = 1.0;    // packets delivered, comm without event
    double rho2 = 100.0;  // penalty, comm during event
    double rho3 = 1.0;    // penalty, radar without event
    double rho4 = 50.0;   // detection payoff scale, radar during event

    void validate() const;
};

struct EnvConfig {
    FactorProbabilities probs;
    CommConfig comm;
    RewardWeights rewards;
    double traffic_density = 27.0;  // mean objects per 45 m x 45 m
    std::vector<ChirpConfig> radar_chirps;
    SizeDistributions sizes;
    int episode_length = 300;

    void validate() const;
    std::vector<RadarMode> derive_modes() const;
};

struct StepResult {
    double reward = 0.0;
    EnvState next_state;
    bool event_occurred = false;
    int packets_sent = 0;
    std::optional<double> miss_ratio;  // radar actions only
};

// Each factor takes value 0 independently with probability tau0[f].
EnvState sample_state(const FactorProbabilities& probs, Rng& rng);

// p_u(s): sum of the four realized per-factor event probabilities, clamped to [0,1].
double event_probability(const EnvState& state, const FactorProbabilities& probs);

// Mean of event_probability under the sample_state distribution (closed form).
double mean_event_probability(const FactorProbabilities& probs);

double immediate_reward(const Action& action, bool event, std::optional<int> packets,
                        std::optional<double> miss_ratio, const RewardWeights& weights);

// One MDP step. Owns no state; sampling order is fixed for determinism:
// event, scene (radar only), next state.
class Environment {
public:
    explicit Environment(EnvConfig config);

    StepResult step(const EnvState& state, const Action& action, Rng& rng) const;

    const EnvConfig& config() const { return config_; }
    const std::vector<RadarMode>& modes() const { return modes_; }

private:
    EnvConfig config_;
    std::vector<RadarMode> modes_;
};

}  // namespace jrc

#endif
