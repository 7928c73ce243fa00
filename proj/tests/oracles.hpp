#pragma once

#include "atsc/agent.hpp"
#include "atsc/qnetwork.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

namespace atsc::testing {

// Central differences over every parameter of the loss.
inline std::vector<double> numeric_gradient(const QNetwork &net, const Eigen::MatrixXd &states,
                                            const std::vector<int> &actions, const Eigen::VectorXd &targets,
                                            double h = 1e-6) {
    QNetwork probe = net;
    std::vector<double> theta = net.parameters().flatten();
    std::vector<double> grad(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        double saved = theta[i];
        theta[i] = saved + h;
        probe.parameters().assign(theta);
        double up = probe.loss(states, actions, targets);
        theta[i] = saved - h;
        probe.parameters().assign(theta);
        double down = probe.loss(states, actions, targets);
        theta[i] = saved;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

// |a - n| / max(|a|, |n|), with tiny pairs (both under `floor`) counted as agreeing.
inline double max_relative_error(const std::vector<double> &analytic, const std::vector<double> &numeric,
                                 double floor = 1e-7) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        double scale = std::max(std::abs(analytic[i]), std::abs(numeric[i]));
        if (scale < floor)
            continue;
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
    return worst;
}

struct GradientCase {
    QNetwork net;
    Eigen::MatrixXd states;
    std::vector<int> actions;
    Eigen::VectorXd targets;
};

inline GradientCase random_gradient_case(std::mt19937_64 &rng) {
    std::uniform_int_distribution<int> input(1, 9), depth(0, 2), width(1, 9), actions(2, 5), batch(1, 8);
    std::normal_distribution<double> normal(0.0, 1.0);
    NetworkShape shape;
    shape.input = input(rng);
    shape.hidden.assign(static_cast<std::size_t>(depth(rng)), 0);
    for (auto &w : shape.hidden)
        w = width(rng);
    shape.actions = actions(rng);
    GradientCase c{QNetwork(shape, rng), {}, {}, {}};
    // Non-zero biases so the check also covers them.
    std::vector<double> theta = c.net.parameters().flatten();
    for (auto &x : theta)
        x += 0.1 * normal(rng);
    c.net.parameters().assign(theta);
    int b = batch(rng);
    c.states = Eigen::MatrixXd::NullaryExpr(shape.input, b, [&] { return normal(rng); });
    std::uniform_int_distribution<int> pick(0, shape.actions - 1);
    for (int i = 0; i < b; ++i)
        c.actions.push_back(pick(rng));
    c.targets = Eigen::VectorXd::NullaryExpr(b, [&] { return 3.0 * normal(rng); });
    return c;
}

// Deterministic 2-state, 2-action MDP. reward[s][a], next[s][a].
struct TwoStateMdp {
    std::array<std::array<double, 2>, 2> reward{{{0.0, 1.0}, {2.0, 0.0}}};
    std::array<std::array<int, 2>, 2> next{{{0, 1}, {0, 1}}};
    double gamma = 0.9;

    std::array<std::array<double, 2>, 2> q_star() const {
        std::array<std::array<double, 2>, 2> q{};
        for (int it = 0; it < 2000; ++it) {
            auto prev = q;
            for (int s = 0; s < 2; ++s) {
                for (int a = 0; a < 2; ++a) {
                    int n = next[s][a];
                    q[s][a] = reward[s][a] + gamma * std::max(prev[n][0], prev[n][1]);
                }
            }
        }
        return q;
    }

    static std::vector<double> one_hot(int s) { return s == 0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0}; }
};

struct TabularOutcome {
    double max_error = 0.0;
    std::int64_t updates = 0;
};

// Linear dueling network trained by the D3QN update on replayed MDP transitions.
inline TabularOutcome train_tabular(const TwoStateMdp &mdp, std::int64_t max_updates, double tolerance) {
    Hyperparams hp;
    hp.gamma = mdp.gamma;
    hp.learning_rate = 0.05;
    hp.batch_size = 16;
    hp.target_sync = 20;
    hp.hidden = {};
    hp.capacity = 64;
    std::mt19937_64 rng(2718);
    QNetwork online(NetworkShape{2, {}, 2}, rng);
    QNetwork target = online;
    ReplayBuffer buffer(hp.capacity);
    // Four copies of each transition so a full batch can be drawn.
    for (int copy = 0; copy < 4; ++copy) {
        for (int s = 0; s < 2; ++s) {
            for (int a = 0; a < 2; ++a)
                buffer.push(
                    {TwoStateMdp::one_hot(s), a, mdp.reward[s][a], TwoStateMdp::one_hot(mdp.next[s][a]), false, 1});
        }
    }
    auto q_star = mdp.q_star();
    auto error = [&] {
        double worst = 0.0;
        for (int s = 0; s < 2; ++s) {
            Eigen::VectorXd q = online.forward(TwoStateMdp::one_hot(s));
            for (int a = 0; a < 2; ++a)
                worst = std::max(worst, std::abs(q(a) - q_star[s][a]));
        }
        return worst;
    };
    TabularOutcome out;
    for (out.updates = 1; out.updates <= max_updates; ++out.updates) {
        train_step(online, target, buffer, hp, rng);
        sync_target(online, target, out.updates, hp.target_sync);
        if (out.updates % 100 == 0 && error() < tolerance)
            break;
    }
    out.updates = std::min(out.updates, max_updates);
    out.max_error = error();
    return out;
}

} // namespace atsc::testing
