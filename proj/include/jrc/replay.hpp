#ifndef JRC_REPLAY_HPP
#define JRC_REPLAY_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "jrc/env.hpp"

namespace jrc {

struct Transition {
    EnvState state;
    int action = 0;
    double reward = 0.0;
    EnvState next_state;
    bool terminal = false;
    bool is_demo = false;
    // n-step fields: discounted return over the window, the state at the
    // window's end, the realized horizon h <= n, and whether the window hit
    // a terminal state (no bootstrap in that case).
    double n_step_return = 0.0;
    EnvState n_step_state;
    int n_step_horizon = 1;
    bool n_step_terminal = false;
};

struct SampleBatch {
    std::vector<Transition> transitions;
    std::vector<int> slots;
    std::vector<std::uint64_t> versions;
    std::vector<double> probabilities;  // P(i) per Eq-style sampling law
};

// Priority-ordered replay with a permanently retained demonstration region
// occupying slots [0, demo_count) and a circular self-generated region
// behind it. Priorities live in a sum tree over p_i^alpha.
class PrioritizedBuffer {
public:
    PrioritizedBuffer(int capacity, double alpha, double beta0, double beta_end,
                      std::int64_t beta_anneal_steps, double priority_floor,
                      double demo_bonus);

    // Must precede any push; demo transitions keep their slots forever.
    void load_demos(const std::vector<Transition>& demos);

    void push(const Transition& t);

    SampleBatch sample(int batch_size, Rng& rng) const;

    // w_i = (1 / (size * P(i)))^beta, before batch-max normalization.
    static double importance_weight(double probability, int buffer_size, double beta);
    // Batch weights, normalized by the batch maximum.
    std::vector<double> importance_weights(const std::vector<double>& probabilities,
                                           double beta) const;

    void update_priorities(const std::vector<int>& slots,
                           const std::vector<std::uint64_t>& versions,
                           const std::vector<double>& td_errors);

    double beta_at(std::int64_t step) const;

    int size() const { return static_cast<int>(filled_); }
    int capacity() const { return capacity_; }
    int demo_count() const { return demo_count_; }
    double alpha() const { return alpha_; }
    double total_priority_mass() const;
    std::int64_t stale_update_count() const { return stale_updates_; }
    const Transition& at(int slot) const { return slots_[slot]; }
    double priority_mass_of(int slot) const;  // p_i^alpha as stored

private:
    void set_mass(int slot, double mass);
    double raw_priority(const Transition& t, double abs_td) const;

    int capacity_;
    double alpha_;
    double beta0_, beta_end_;
    std::int64_t beta_anneal_steps_;
    double priority_floor_;
    double demo_bonus_;

    std::vector<Transition> slots_;
    std::vector<std::uint64_t> versions_;
    std::vector<double> tree_;  // binary sum tree, leaves at [leaf_base_, ...)
    int leaf_base_ = 0;
    int demo_count_ = 0;
    std::size_t filled_ = 0;
    int write_cursor_ = 0;  // next self-generated slot, relative to demo_count_
    double max_raw_priority_;
    std::int64_t stale_updates_ = 0;
    bool sealed_ = false;  // demo region locked
};

// Demonstration dataset file: versioned JSON with header {format_version,
// count, n, gamma}; bit-exact round-trip.
void save_demos(const std::vector<Transition>& demos, int n, double gamma,
                const std::string& path);
std::vector<Transition> load_demos_file(const std::string& path, int* n_out = nullptr,
                                        double* gamma_out = nullptr);

}  // namespace jrc

#endif
