#include "jrc/env.hpp"

#include <algorithm>
#include <cmath>

#include "jrc/errors.hpp"

namespace jrc {

int encode_state(const EnvState& s) {
    return s.c | (s.r << 1) | (s.w << 2) | (s.v << 3) | (s.m << 4);
}

EnvState decode_state(int index) {
    require(index >= 0 && index < kStateCount, "state index out of range");
    EnvState s;
    s.c = static_cast<std::uint8_t>(index & 1);
    s.r = static_cast<std::uint8_t>((index >> 1) & 1);
    s.w = static_cast<std::uint8_t>((index >> 2) & 1);
    s.v = static_cast<std::uint8_t>((index >> 3) & 1);
    s.m = static_cast<std::uint8_t>((index >> 4) & 1);
    return s;
}

namespace {
bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }
}  // namespace

void FactorProbabilities::validate() const {
    for (double t : tau0) {
        if (!in_unit(t)) throw ConfigError("tau0 must be in [0,1]");
    }
    for (const auto& pair : event_p) {
        if (!in_unit(pair[0]) || !in_unit(pair[1]))
            throw ConfigError("event probabilities must be in [0,1]");
    }
}

void CommConfig::validate() const {
    for (int rate = 0; rate < 2; ++rate) {
        if (packets_bad[rate] > packets_good[rate] || packets_good[rate] > max_packets)
            throw ConfigError("comm packet yields must satisfy bad <= good <= max");
        if (packets_bad[rate] < 0) throw ConfigError("packet yields must be >= 0");
    }
}

void RewardWeights::validate() const {
    if (rho1 < 0 || rho2 < 0 || rho3 < 0 || rho4 < 0)
        throw ConfigError("reward weights must be nonnegative");
}

void EnvConfig::validate() const {
    probs.validate();
    comm.validate();
    rewards.validate();
    sizes.validate();
    if (traffic_density <= 0) throw ConfigError("traffic_density must be > 0");
    if (episode_length <= 0) throw ConfigError("episode_length must be > 0");
    if (radar_chirps.empty()) throw ConfigError("at least one radar mode is required");
    for (const auto& c : radar_chirps) c.validate();
}

std::vector<RadarMode> EnvConfig::derive_modes() const {
    std::vector<RadarMode> modes;
    modes.reserve(radar_chirps.size());
    for (const auto& c : radar_chirps) modes.push_back(derive_ranges(c));
    return modes;
}

EnvState sample_state(const FactorProbabilities& probs, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    EnvState s;
    s.c = u(rng) < probs.tau0[kFactorC] ? 0 : 1;
    s.r = u(rng) < probs.tau0[kFactorR] ? 0 : 1;
    s.w = u(rng) < probs.tau0[kFactorW] ? 0 : 1;
    s.v = u(rng) < probs.tau0[kFactorV] ? 0 : 1;
    s.m = u(rng) < probs.tau0[kFactorM] ? 0 : 1;
    return s;
}

double event_probability(const EnvState& state, const FactorProbabilities& probs) {
    double p = probs.event_p[kEventR][state.r] + probs.event_p[kEventW][state.w] +
               probs.event_p[kEventV][state.v] + probs.event_p[kEventM][state.m];
    return std::min(p, 1.0);
}

double mean_event_probability(const FactorProbabilities& probs) {
    const std::array<int, 4> tau_index{kFactorR, kFactorW, kFactorV, kFactorM};
    double total = 0.0;
    for (int f = 0; f < 4; ++f) {
        double tau0 = probs.tau0[tau_index[f]];
        total += tau0 * probs.event_p[f][0] + (1.0 - tau0) * probs.event_p[f][1];
    }
    return std::min(total, 1.0);
}

double immediate_reward(const Action& action, bool event, std::optional<int> packets,
                        std::optional<double> miss, const RewardWeights& weights) {
    if (action.is_comm()) {
        if (event) return -weights.rho2;
        require(packets.has_value(), "comm reward requires a packet count");
        return weights.rho1 * static_cast<double>(*packets);
    }
    if (!event) return -weights.rho3;
    require(miss.has_value() && *miss >= 0.0 && *miss <= 1.0,
            "radar reward requires a miss ratio in [0,1]");
    return weights.rho4 * (1.0 - *miss);
}

Environment::Environment(EnvConfig config) : config_(std::move(config)) {
    config_.validate();
    modes_ = config_.derive_modes();
}

StepResult Environment::step(const EnvState& state, const Action& action,
                             Rng& rng) const {
    require(action.index >= 0 && action.index < kActionCount, "invalid action index");

    StepResult result;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    result.event_occurred = u(rng) < event_probability(state, config_.probs);

    if (action.is_comm()) {
        int rate = action.comm_rate();
        int packets = state.c == 0 ? config_.comm.packets_good[rate]
                                   : config_.comm.packets_bad[rate];
        result.reward = immediate_reward(action, result.event_occurred, packets,
                                         std::nullopt, config_.rewards);
        result.packets_sent = packets;  // delivery is channel-determined
    } else {
        const RadarMode& mode = modes_[action.radar_mode()];
        int count = scaled_object_count(config_.traffic_density, mode.r_max, rng);
        auto scene = generate_scene(count, mode, config_.sizes, rng);
        int detected = count_detected(scene, mode.r_re);
        result.miss_ratio = miss_ratio(count, detected);
        result.reward = immediate_reward(action, result.event_occurred, std::nullopt,
                                         result.miss_ratio, config_.rewards);
    }

    result.next_state = sample_state(config_.probs, rng);
    return result;
}

}  // namespace jrc
