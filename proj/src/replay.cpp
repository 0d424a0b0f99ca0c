#include "jrc/replay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "jrc/errors.hpp"

namespace jrc {

namespace {
constexpr int kDemoFormatVersion = 1;

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}
}  // namespace

PrioritizedBuffer::PrioritizedBuffer(int capacity, double alpha, double beta0,
                                     double beta_end, std::int64_t beta_anneal_steps,
                                     double priority_floor, double demo_bonus)
    : capacity_(capacity),
      alpha_(alpha),
      beta0_(beta0),
      beta_end_(beta_end),
      beta_anneal_steps_(beta_anneal_steps),
      priority_floor_(priority_floor),
      demo_bonus_(demo_bonus),
      max_raw_priority_(priority_floor) {
    if (capacity <= 0) throw ConfigError("buffer capacity must be > 0");
    if (alpha < 0) throw ConfigError("alpha must be >= 0");
    if (priority_floor <= 0) throw ConfigError("priority floor must be > 0");
    slots_.resize(static_cast<std::size_t>(capacity));
    versions_.assign(static_cast<std::size_t>(capacity), 0);
    leaf_base_ = next_pow2(capacity);
    tree_.assign(static_cast<std::size_t>(2 * leaf_base_), 0.0);
}

double PrioritizedBuffer::raw_priority(const Transition& t, double abs_td) const {
    double p = abs_td + priority_floor_;
    if (t.is_demo) p += demo_bonus_;
    return p;
}

void PrioritizedBuffer::set_mass(int slot, double mass) {
    int node = leaf_base_ + slot;
    tree_[static_cast<std::size_t>(node)] = mass;
    for (node >>= 1; node >= 1; node >>= 1) {
        tree_[static_cast<std::size_t>(node)] =
            tree_[static_cast<std::size_t>(2 * node)] +
            tree_[static_cast<std::size_t>(2 * node + 1)];
    }
}

void PrioritizedBuffer::load_demos(const std::vector<Transition>& demos) {
    require(!sealed_ && filled_ == 0, "demos must be loaded before any push");
    require(static_cast<int>(demos.size()) < capacity_,
            "demo region must leave room for self-generated data");
    demo_count_ = static_cast<int>(demos.size());
    for (int i = 0; i < demo_count_; ++i) {
        require(demos[static_cast<std::size_t>(i)].is_demo,
                "demo region accepts demo-flagged transitions only");
        slots_[static_cast<std::size_t>(i)] = demos[static_cast<std::size_t>(i)];
        versions_[static_cast<std::size_t>(i)] = 1;
        double p = raw_priority(slots_[static_cast<std::size_t>(i)], 0.0);
        max_raw_priority_ = std::max(max_raw_priority_, p);
        set_mass(i, std::pow(p, alpha_));
    }
    filled_ = static_cast<std::size_t>(demo_count_);
    sealed_ = true;
}

void PrioritizedBuffer::push(const Transition& t) {
    require(!t.is_demo || !sealed_, "demo transitions cannot be pushed after init");
    require(!t.is_demo, "self-generated pushes must not carry the demo flag");
    sealed_ = true;

    const int self_region = capacity_ - demo_count_;
    require(self_region > 0, "no self-generated region available");
    const int slot = demo_count_ + write_cursor_;
    write_cursor_ = (write_cursor_ + 1) % self_region;

    slots_[static_cast<std::size_t>(slot)] = t;
    versions_[static_cast<std::size_t>(slot)] += 1;
    if (filled_ < static_cast<std::size_t>(capacity_)) ++filled_;
    set_mass(slot, std::pow(max_raw_priority_, alpha_));
}

SampleBatch PrioritizedBuffer::sample(int batch_size, Rng& rng) const {
    require(batch_size > 0, "batch size must be > 0");
    if (size() < batch_size)
        throw ContractViolation("buffer not warm: size " + std::to_string(size()) +
                                " < batch " + std::to_string(batch_size));

    const double total = tree_[1];
    require(total > 0, "priority mass must be positive");

    SampleBatch batch;
    batch.transitions.reserve(static_cast<std::size_t>(batch_size));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double segment = total / batch_size;
    // Stratified draws over the mass keep per-item marginals at Eq-law values
    // while spreading the batch across the priority range.
    for (int k = 0; k < batch_size; ++k) {
        double target = (k + u(rng)) * segment;
        int node = 1;
        while (node < leaf_base_) {
            const double left = tree_[static_cast<std::size_t>(2 * node)];
            if (target < left) {
                node = 2 * node;
            } else {
                target -= left;
                node = 2 * node + 1;
            }
        }
        int slot = node - leaf_base_;
        slot = std::min(slot, static_cast<int>(filled_) - 1);
        batch.transitions.push_back(slots_[static_cast<std::size_t>(slot)]);
        batch.slots.push_back(slot);
        batch.versions.push_back(versions_[static_cast<std::size_t>(slot)]);
        batch.probabilities.push_back(tree_[static_cast<std::size_t>(leaf_base_ + slot)] /
                                      total);
    }
    return batch;
}

double PrioritizedBuffer::importance_weight(double probability, int buffer_size,
                                            double beta) {
    require(probability > 0 && probability <= 1.0, "P(i) must be in (0,1]");
    require(buffer_size >= 1, "buffer size must be >= 1");
    return std::pow(1.0 / (buffer_size * probability), beta);
}

std::vector<double> PrioritizedBuffer::importance_weights(
    const std::vector<double>& probabilities, double beta) const {
    std::vector<double> weights;
    weights.reserve(probabilities.size());
    double max_w = 0.0;
    for (double p : probabilities) {
        double w = importance_weight(p, size(), beta);
        max_w = std::max(max_w, w);
        weights.push_back(w);
    }
    for (double& w : weights) w /= max_w;
    return weights;
}

void PrioritizedBuffer::update_priorities(const std::vector<int>& slots,
                                          const std::vector<std::uint64_t>& versions,
                                          const std::vector<double>& td_errors) {
    require(slots.size() == versions.size() && slots.size() == td_errors.size(),
            "priority update lengths must match");
    for (std::size_t k = 0; k < slots.size(); ++k) {
        const int slot = slots[k];
        require(slot >= 0 && slot < capacity_, "priority slot out of range");
        if (versions_[static_cast<std::size_t>(slot)] != versions[k]) {
            ++stale_updates_;  // evicted between sample and update
            continue;
        }
        double p = raw_priority(slots_[static_cast<std::size_t>(slot)],
                                std::abs(td_errors[k]));
        max_raw_priority_ = std::max(max_raw_priority_, p);
        set_mass(slot, std::pow(p, alpha_));
    }
}

double PrioritizedBuffer::beta_at(std::int64_t step) const {
    if (beta_anneal_steps_ <= 0) return beta_end_;
    double frac = static_cast<double>(step) / static_cast<double>(beta_anneal_steps_);
    frac = std::clamp(frac, 0.0, 1.0);
    return beta0_ + (beta_end_ - beta0_) * frac;
}

double PrioritizedBuffer::total_priority_mass() const { return tree_[1]; }

double PrioritizedBuffer::priority_mass_of(int slot) const {
    require(slot >= 0 && slot < capacity_, "slot out of range");
    return tree_[static_cast<std::size_t>(leaf_base_ + slot)];
}

namespace {

nlohmann::json state_to_json(const EnvState& s) {
    return nlohmann::json::array({s.c, s.r, s.w, s.v, s.m});
}

EnvState state_from_json(const nlohmann::json& j) {
    EnvState s;
    s.c = j.at(0).get<std::uint8_t>();
    s.r = j.at(1).get<std::uint8_t>();
    s.w = j.at(2).get<std::uint8_t>();
    s.v = j.at(3).get<std::uint8_t>();
    s.m = j.at(4).get<std::uint8_t>();
    return s;
}

}  // namespace

void save_demos(const std::vector<Transition>& demos, int n, double gamma,
                const std::string& path) {
    nlohmann::json doc;
    doc["format_version"] = kDemoFormatVersion;
    doc["count"] = demos.size();
    doc["n"] = n;
    doc["gamma"] = gamma;
    nlohmann::json records = nlohmann::json::array();
    for (const auto& t : demos) {
        records.push_back(nlohmann::json::array(
            {state_to_json(t.state), t.action, t.reward, state_to_json(t.next_state),
             t.terminal, t.is_demo, t.n_step_return, state_to_json(t.n_step_state),
             t.n_step_horizon, t.n_step_terminal}));
    }
    doc["transitions"] = std::move(records);

    std::ofstream out(path);
    if (!out) throw IoError("cannot write demo file: " + path);
    out << doc.dump() << "\n";
    if (!out) throw IoError("failed writing demo file: " + path);
}

std::vector<Transition> load_demos_file(const std::string& path, int* n_out,
                                        double* gamma_out) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open demo file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed demo file " + path + ": " + e.what());
    }
    if (!doc.contains("format_version") ||
        doc["format_version"].get<int>() != kDemoFormatVersion)
        throw IoError("demo file version mismatch: " + path);

    if (n_out) *n_out = doc.at("n").get<int>();
    if (gamma_out) *gamma_out = doc.at("gamma").get<double>();

    std::vector<Transition> demos;
    const auto& records = doc.at("transitions");
    if (records.size() != doc.at("count").get<std::size_t>())
        throw IoError("demo file count mismatch: " + path);
    demos.reserve(records.size());
    for (const auto& r : records) {
        Transition t;
        t.state = state_from_json(r.at(0));
        t.action = r.at(1).get<int>();
        t.reward = r.at(2).get<double>();
        t.next_state = state_from_json(r.at(3));
        t.terminal = r.at(4).get<bool>();
        t.is_demo = r.at(5).get<bool>();
        t.n_step_return = r.at(6).get<double>();
        t.n_step_state = state_from_json(r.at(7));
        t.n_step_horizon = r.at(8).get<int>();
        t.n_step_terminal = r.at(9).get<bool>();
        demos.push_back(t);
    }
    return demos;
}

}  // namespace jrc
