#include "jrc/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "jrc/errors.hpp"

namespace jrc {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in " + context);
    }
}

double get_number(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError("'" + key + "' must be a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
    return obj[key].get<int>();
}

bool get_bool(const json& obj, const std::string& key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) throw ConfigError("'" + key + "' must be a boolean");
    return obj[key].get<bool>();
}

std::array<double, 2> get_pair(const json& arr, const std::string& context) {
    if (!arr.is_array() || arr.size() != 2)
        throw ConfigError(context + " must be a [a, b] pair");
    return {arr[0].get<double>(), arr[1].get<double>()};
}

void parse_env(const json& obj, EnvConfig& env) {
    check_keys(obj,
               {"tau0", "event_prob", "comm", "reward_weights", "traffic_density",
                "episode_length", "radar_modes", "sizes"},
               "env");

    if (obj.contains("tau0")) {
        const auto& t = obj["tau0"];
        check_keys(t, {"c", "r", "w", "v", "m"}, "env.tau0");
        env.probs.tau0[kFactorC] = get_number(t, "c", env.probs.tau0[kFactorC]);
        env.probs.tau0[kFactorR] = get_number(t, "r", env.probs.tau0[kFactorR]);
        env.probs.tau0[kFactorW] = get_number(t, "w", env.probs.tau0[kFactorW]);
        env.probs.tau0[kFactorV] = get_number(t, "v", env.probs.tau0[kFactorV]);
        env.probs.tau0[kFactorM] = get_number(t, "m", env.probs.tau0[kFactorM]);
    }
    if (obj.contains("event_prob")) {
        const auto& p = obj["event_prob"];
        check_keys(p, {"r", "w", "v", "m"}, "env.event_prob");
        if (p.contains("r")) env.probs.event_p[kEventR] = get_pair(p["r"], "event_prob.r");
        if (p.contains("w")) env.probs.event_p[kEventW] = get_pair(p["w"], "event_prob.w");
        if (p.contains("v")) env.probs.event_p[kEventV] = get_pair(p["v"], "event_prob.v");
        if (p.contains("m")) env.probs.event_p[kEventM] = get_pair(p["m"], "event_prob.m");
    }
    if (obj.contains("comm")) {
        const auto& c = obj["comm"];
        check_keys(c, {"packets_good", "packets_bad", "max_packets"}, "env.comm");
        if (c.contains("packets_good")) {
            auto pair = get_pair(c["packets_good"], "comm.packets_good");
            env.comm.packets_good = {static_cast<int>(pair[0]), static_cast<int>(pair[1])};
        }
        if (c.contains("packets_bad")) {
            auto pair = get_pair(c["packets_bad"], "comm.packets_bad");
            env.comm.packets_bad = {static_cast<int>(pair[0]), static_cast<int>(pair[1])};
        }
        env.comm.max_packets = get_int(c, "max_packets", env.comm.max_packets);
    }
    if (obj.contains("reward_weights")) {
        const auto& w = obj["reward_weights"];
        if (!w.is_array() || w.size() != 4)
            throw ConfigError("reward_weights must be [rho1, rho2, rho3, rho4]");
        env.rewards = {w[0].get<double>(), w[1].get<double>(), w[2].get<double>(),
                       w[3].get<double>()};
    }
    env.traffic_density = get_number(obj, "traffic_density", env.traffic_density);
    env.episode_length = get_int(obj, "episode_length", env.episode_length);
    if (obj.contains("radar_modes")) {
        if (!obj["radar_modes"].is_array())
            throw ConfigError("radar_modes must be an array");
        env.radar_chirps.clear();
        for (const auto& m : obj["radar_modes"]) {
            check_keys(m,
                       {"sweep_bandwidth_hz", "frequency_slope_hz_per_s",
                        "r_max_override_m", "f_max_hz"},
                       "env.radar_modes[]");
            ChirpConfig chirp;
            chirp.sweep_bandwidth_hz = get_number(m, "sweep_bandwidth_hz", 0.0);
            chirp.frequency_slope_hz_per_s = get_number(m, "frequency_slope_hz_per_s", 0.0);
            if (m.contains("r_max_override_m"))
                chirp.r_max_override_m = m["r_max_override_m"].get<double>();
            if (m.contains("f_max_hz")) chirp.f_max_hz = m["f_max_hz"].get<double>();
            env.radar_chirps.push_back(chirp);
        }
    }
    if (obj.contains("sizes")) {
        const auto& s = obj["sizes"];
        check_keys(s, {"car_length", "car_width", "ped_length", "ped_width", "car_fraction"},
                   "env.sizes");
        if (s.contains("car_length")) env.sizes.car_length = get_pair(s["car_length"], "sizes.car_length");
        if (s.contains("car_width")) env.sizes.car_width = get_pair(s["car_width"], "sizes.car_width");
        if (s.contains("ped_length")) env.sizes.ped_length = get_pair(s["ped_length"], "sizes.ped_length");
        if (s.contains("ped_width")) env.sizes.ped_width = get_pair(s["ped_width"], "sizes.ped_width");
        env.sizes.car_fraction = get_number(s, "car_fraction", env.sizes.car_fraction);
    }
}

void parse_train(const json& obj, TrainConfig& train) {
    check_keys(obj,
               {"gamma", "batch_size", "target_sync", "buffer_capacity", "demo_size",
                "learning_rate", "warmup_steps", "episodes", "steps_per_episode", "epsilon_start",
                "epsilon_min", "epsilon_decay"},
               "train");
    train.gamma = get_number(obj, "gamma", train.gamma);
    train.batch_size = get_int(obj, "batch_size", train.batch_size);
    train.target_sync_period = get_int(obj, "target_sync", train.target_sync_period);
    train.buffer_capacity = get_int(obj, "buffer_capacity", train.buffer_capacity);
    train.demo_size = get_int(obj, "demo_size", train.demo_size);
    train.learning_rate = get_number(obj, "learning_rate", train.learning_rate);
    train.episodes = get_int(obj, "episodes", train.episodes);
    train.steps_per_episode = get_int(obj, "steps_per_episode", train.steps_per_episode);
    train.warmup_steps = get_int(obj, "warmup_steps", train.warmup_steps);
    train.exploration.epsilon_start =
        get_number(obj, "epsilon_start", train.exploration.epsilon_start);
    train.exploration.epsilon_min =
        get_number(obj, "epsilon_min", train.exploration.epsilon_min);
    train.exploration.decay = get_number(obj, "epsilon_decay", train.exploration.decay);
}

void parse_tlwd(const json& obj, TlwdConfig& tlwd) {
    check_keys(obj,
               {"lambda_n", "lambda_margin", "lambda_l2", "n_step", "pretrain_steps",
                "margin", "alpha", "beta0", "priority_floor", "demo_bonus",
                "nstep_double_estimator"},
               "tlwd");
    tlwd.lambda_n = get_number(obj, "lambda_n", tlwd.lambda_n);
    tlwd.lambda_margin = get_number(obj, "lambda_margin", tlwd.lambda_margin);
    tlwd.lambda_l2 = get_number(obj, "lambda_l2", tlwd.lambda_l2);
    tlwd.n_step = get_int(obj, "n_step", tlwd.n_step);
    tlwd.pretrain_steps = get_int(obj, "pretrain_steps", tlwd.pretrain_steps);
    tlwd.margin = get_number(obj, "margin", tlwd.margin);
    tlwd.alpha = get_number(obj, "alpha", tlwd.alpha);
    tlwd.beta0 = get_number(obj, "beta0", tlwd.beta0);
    tlwd.priority_floor = get_number(obj, "priority_floor", tlwd.priority_floor);
    tlwd.demo_bonus = get_number(obj, "demo_bonus", tlwd.demo_bonus);
    tlwd.nstep_double_estimator =
        get_bool(obj, "nstep_double_estimator", tlwd.nstep_double_estimator);
}

}  // namespace

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("malformed config " + path + ": " + e.what());
    }

    check_keys(doc, {"name", "env", "train", "tlwd", "miss_metric"}, "config root");

    Scenario scenario;
    if (doc.contains("name")) scenario.name = doc["name"].get<std::string>();
    if (doc.contains("env")) parse_env(doc["env"], scenario.env);
    if (doc.contains("train")) parse_train(doc["train"], scenario.train);
    if (doc.contains("tlwd")) parse_tlwd(doc["tlwd"], scenario.tlwd);
    if (doc.contains("miss_metric")) {
        const auto rule = doc["miss_metric"].get<std::string>();
        if (rule == "event_steps") {
            scenario.miss_rule = MissMetricRule::EventSteps;
        } else if (rule == "radar_steps") {
            scenario.miss_rule = MissMetricRule::RadarSteps;
        } else {
            throw ConfigError("miss_metric must be event_steps or radar_steps");
        }
    }

    scenario.env.validate();
    scenario.train.validate();
    scenario.tlwd.validate();
    return scenario;
}

}  // namespace jrc
