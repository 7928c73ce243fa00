#include "atsc/agent.hpp"

#include "atsc/errors.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace atsc {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0)
        throw ConfigError("agent.capacity: must be >= 1");
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
        return;
    }
    items_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
}

void ReplayBuffer::clear() {
    items_.clear();
    head_ = 0;
}

void Hyperparams::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw ConfigError("agent.gamma: must lie in [0,1)");
    if (!(learning_rate > 0.0))
        throw ConfigError("agent.learning_rate: must be > 0");
    if (batch_size < 1)
        throw ConfigError("agent.batch_size: must be >= 1");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0))
        throw ConfigError("agent.epsilon_start: must lie in [0,1]");
    if (!(epsilon_end >= 0.0 && epsilon_end <= 1.0))
        throw ConfigError("agent.epsilon_end: must lie in [0,1]");
    if (epsilon_decay_steps < 0)
        throw ConfigError("agent.epsilon_decay_steps: must be >= 0");
    if (target_sync < 1)
        throw ConfigError("agent.target_sync: must be >= 1");
    if (capacity < 1)
        throw ConfigError("agent.capacity: must be >= 1");
    if (train_every < 1)
        throw ConfigError("agent.train_every: must be >= 1");
    if (!(grad_clip >= 0.0))
        throw ConfigError("agent.grad_clip: must be >= 0");
    for (int h : hidden) {
        if (h < 1)
            throw ConfigError("agent.hidden: layer widths must be >= 1");
    }
}

double Hyperparams::epsilon(std::int64_t step) const {
    if (epsilon_decay_steps <= 0 || step >= epsilon_decay_steps)
        return epsilon_end;
    double frac = static_cast<double>(step) / static_cast<double>(epsilon_decay_steps);
    return epsilon_start + frac * (epsilon_end - epsilon_start);
}

int greedy_action(const Eigen::VectorXd &q) {
    int best = 0;
    for (Eigen::Index a = 1; a < q.size(); ++a) {
        if (q(a) > q(best))
            best = static_cast<int>(a);
    }
    return best;
}

int act(const QNetwork &net, const std::vector<double> &state, double epsilon, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (epsilon > 0.0 && unit(rng) < epsilon) {
        std::uniform_int_distribution<int> pick(0, net.shape().actions - 1);
        return pick(rng);
    }
    return greedy_action(net.forward(state));
}

namespace {

Eigen::MatrixXd stack_states(const std::vector<const Transition *> &batch, bool next, int rows) {
    Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto &s = next ? batch[i]->next_state : batch[i]->state;
        if (static_cast<int>(s.size()) != rows)
            throw ConfigError("transition state length " + std::to_string(s.size()) + " != network input " +
                              std::to_string(rows));
        m.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(s.data(), rows);
    }
    return m;
}

} // namespace

std::vector<double> double_q_targets(const std::vector<const Transition *> &batch, const QNetwork &online,
                                     const QNetwork &target, double gamma) {
    std::vector<double> y(batch.size());
    if (batch.empty())
        return y;
    Eigen::MatrixXd next = stack_states(batch, true, online.shape().input);
    Eigen::MatrixXd q_online = online.forward_batch(next).q;
    Eigen::MatrixXd q_target = target.forward_batch(next).q;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Transition &t = *batch[i];
        if (t.done) {
            y[i] = t.reward;
            continue;
        }
        auto col = static_cast<Eigen::Index>(i);
        int a = greedy_action(q_online.col(col));
        y[i] = t.reward + std::pow(gamma, t.steps) * q_target(a, col);
    }
    return y;
}

std::optional<double> train_step(QNetwork &net, const QNetwork &target, const ReplayBuffer &buffer,
                                 const Hyperparams &hp, std::mt19937_64 &rng) {
    if (buffer.size() < hp.batch_size || buffer.size() == 0)
        return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, buffer.size() - 1);
    std::vector<const Transition *> batch(hp.batch_size);
    for (auto &t : batch)
        t = &buffer[pick(rng)];

    std::vector<double> y = double_q_targets(batch, net, target, hp.gamma);
    Eigen::MatrixXd states = stack_states(batch, false, net.shape().input);
    std::vector<int> actions(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i)
        actions[i] = batch[i]->action;
    Eigen::Map<const Eigen::VectorXd> targets(y.data(), static_cast<Eigen::Index>(y.size()));

    NetworkParameters grad;
    double loss = net.loss_and_gradient(states, actions, targets, grad);
    if (hp.grad_clip > 0.0) {
        double norm = std::sqrt(grad.squared_norm());
        if (norm > hp.grad_clip)
            grad *= hp.grad_clip / norm;
    }
    net.sgd_update(grad, hp.learning_rate);
    return loss;
}

void sync_target(const QNetwork &online, QNetwork &target, std::int64_t step, std::int64_t period) {
    if (period < 1)
        throw ConfigError("agent.target_sync: must be >= 1");
    if (step % period == 0)
        target = online;
}

D3qnAgent::D3qnAgent(int input_size, int actions, Hyperparams hp)
    : hp_(std::move(hp)), rng_(hp_.seed), buffer_(hp_.capacity) {
    hp_.validate();
    online_ = QNetwork(NetworkShape{input_size, hp_.hidden, actions}, rng_);
    target_ = online_;
}

int D3qnAgent::explore(const std::vector<double> &state) {
    double eps = hp_.epsilon(decisions_);
    ++decisions_;
    return act(online_, state, eps, rng_);
}

int D3qnAgent::greedy(const std::vector<double> &state) const { return greedy_action(online_.forward(state)); }

std::optional<double> D3qnAgent::observe(Transition t) {
    buffer_.push(std::move(t));
    ++observed_;
    if (observed_ % hp_.train_every != 0)
        return std::nullopt;
    auto loss = train_step(online_, target_, buffer_, hp_, rng_);
    if (loss) {
        ++train_steps_;
        sync_target(online_, target_, train_steps_, hp_.target_sync);
    }
    return loss;
}

namespace {

constexpr const char *kCheckpointFormat = "atsc-d3qn-checkpoint";
constexpr int kCheckpointVersion = 1;

nlohmann::json hyperparams_json(const Hyperparams &hp) {
    return {{"gamma", hp.gamma},
            {"learning_rate", hp.learning_rate},
            {"batch_size", hp.batch_size},
            {"epsilon_start", hp.epsilon_start},
            {"epsilon_end", hp.epsilon_end},
            {"epsilon_decay_steps", hp.epsilon_decay_steps},
            {"target_sync", hp.target_sync},
            {"capacity", hp.capacity},
            {"hidden", hp.hidden},
            {"train_every", hp.train_every},
            {"grad_clip", hp.grad_clip},
            {"seed", hp.seed}};
}

Hyperparams hyperparams_from_json(const nlohmann::json &j) {
    Hyperparams hp;
    hp.gamma = j.at("gamma").get<double>();
    hp.learning_rate = j.at("learning_rate").get<double>();
    hp.batch_size = j.at("batch_size").get<std::size_t>();
    hp.epsilon_start = j.at("epsilon_start").get<double>();
    hp.epsilon_end = j.at("epsilon_end").get<double>();
    hp.epsilon_decay_steps = j.at("epsilon_decay_steps").get<std::int64_t>();
    hp.target_sync = j.at("target_sync").get<std::int64_t>();
    hp.capacity = j.at("capacity").get<std::size_t>();
    hp.hidden = j.at("hidden").get<std::vector<int>>();
    hp.train_every = j.at("train_every").get<int>();
    hp.grad_clip = j.at("grad_clip").get<double>();
    hp.seed = j.at("seed").get<std::uint64_t>();
    return hp;
}

} // namespace

void D3qnAgent::save(const std::string &path) const {
    std::ostringstream rng_state;
    rng_state << rng_;
    nlohmann::json j;
    j["format"] = kCheckpointFormat;
    j["version"] = kCheckpointVersion;
    j["shape"] = {{"input", online_.shape().input},
                  {"hidden", online_.shape().hidden},
                  {"actions", online_.shape().actions}};
    j["hyperparams"] = hyperparams_json(hp_);
    j["counters"] = {{"decisions", decisions_}, {"observed", observed_}, {"train_steps", train_steps_}};
    j["rng"] = rng_state.str();
    j["online"] = online_.parameters().flatten();
    j["target"] = target_.parameters().flatten();

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("checkpoint: cannot write " + path);
    out << j.dump() << '\n';
}

D3qnAgent D3qnAgent::load(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("checkpoint: cannot read " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError("checkpoint: " + path + " is not valid JSON: " + e.what());
    }
    if (j.value("format", std::string{}) != kCheckpointFormat)
        throw ConfigError("checkpoint: " + path + " has an unknown format");
    if (j.value("version", 0) != kCheckpointVersion)
        throw ConfigError("checkpoint: unsupported version in " + path);
    try {
        Hyperparams hp = hyperparams_from_json(j.at("hyperparams"));
        const auto &shape = j.at("shape");
        hp.hidden = shape.at("hidden").get<std::vector<int>>();
        D3qnAgent agent(shape.at("input").get<int>(), shape.at("actions").get<int>(), hp);
        auto online = j.at("online").get<std::vector<double>>();
        auto target = j.at("target").get<std::vector<double>>();
        agent.online_.parameters().assign(online);
        agent.target_.parameters().assign(target);
        agent.decisions_ = j.at("counters").at("decisions").get<std::int64_t>();
        agent.observed_ = j.at("counters").at("observed").get<std::int64_t>();
        agent.train_steps_ = j.at("counters").at("train_steps").get<std::int64_t>();
        std::istringstream rng_state(j.at("rng").get<std::string>());
        rng_state >> agent.rng_;
        return agent;
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError("checkpoint: " + path + ": " + e.what());
    }
}

} // namespace atsc
