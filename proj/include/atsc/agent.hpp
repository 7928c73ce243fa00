#pragma once

#include "atsc/qnetwork.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace atsc {

struct Transition {
    std::vector<double> state;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
    int steps = 1; // seconds spanned; the bootstrap is discounted by gamma^steps
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t); // overwrites the oldest entry when full
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition &operator[](std::size_t i) const { return items_[i]; }
    void clear();

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Transition> items_;
};

struct Hyperparams {
    double gamma = 0.99;
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    std::int64_t epsilon_decay_steps = 50000;
    std::int64_t target_sync = 500;
    std::size_t capacity = 50000;
    std::vector<int> hidden{128, 128};
    int train_every = 1;       // decision steps between gradient updates
    double grad_clip = 0.0;    // global-norm clip; 0 disables
    std::uint64_t seed = 7;

    void validate() const; // throws ConfigError
    double epsilon(std::int64_t step) const; // linear decay
};

// Epsilon-greedy; ties in argmax go to the lowest index.
int greedy_action(const Eigen::VectorXd &q);
int act(const QNetwork &net, const std::vector<double> &state, double epsilon, std::mt19937_64 &rng);

// y = r + gamma^steps * Q_target(s', argmax_a Q_online(s', a)), or y = r when done.
std::vector<double> double_q_targets(const std::vector<const Transition *> &batch, const QNetwork &online,
                                     const QNetwork &target, double gamma);

// Uniform minibatch SGD step on the squared TD error. Returns nullopt (and changes nothing)
// when the buffer holds fewer than batch_size transitions.
std::optional<double> train_step(QNetwork &net, const QNetwork &target, const ReplayBuffer &buffer,
                                 const Hyperparams &hp, std::mt19937_64 &rng);

// Hard copy every `period` train steps.
void sync_target(const QNetwork &online, QNetwork &target, std::int64_t step, std::int64_t period);

// Online/target networks, replay memory and the counters that drive exploration and syncing.
class D3qnAgent {
public:
    D3qnAgent(int input_size, int actions, Hyperparams hp);

    const Hyperparams &hyperparams() const { return hp_; }
    const QNetwork &online() const { return online_; }
    const QNetwork &target() const { return target_; }
    const ReplayBuffer &buffer() const { return buffer_; }
    std::int64_t decisions() const { return decisions_; }
    std::int64_t train_steps() const { return train_steps_; }

    double current_epsilon() const { return hp_.epsilon(decisions_); }

    // Exploring action for training; advances the decision counter.
    int explore(const std::vector<double> &state);
    int greedy(const std::vector<double> &state) const;

    // Stores a transition and runs the scheduled update; returns the loss if one ran.
    std::optional<double> observe(Transition t);

    void save(const std::string &path) const;
    static D3qnAgent load(const std::string &path);

private:
    Hyperparams hp_;
    std::mt19937_64 rng_;
    QNetwork online_;
    QNetwork target_;
    ReplayBuffer buffer_;
    std::int64_t decisions_ = 0;
    std::int64_t observed_ = 0;
    std::int64_t train_steps_ = 0;
};

} // namespace atsc
