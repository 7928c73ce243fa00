#include "atsc/qnetwork.hpp"

#include "atsc/errors.hpp"

#include <cmath>
#include <string>

namespace atsc {

namespace {

template <typename Fn>
void for_each_layer(NetworkParameters &p, Fn &&fn) {
    for (auto &l : p.trunk)
        fn(l);
    fn(p.value);
    fn(p.advantage);
}

template <typename Fn>
void for_each_layer(const NetworkParameters &p, Fn &&fn) {
    for (const auto &l : p.trunk)
        fn(l);
    fn(p.value);
    fn(p.advantage);
}

template <typename Fn>
void for_each_layer_pair(NetworkParameters &a, const NetworkParameters &b, Fn &&fn) {
    for (std::size_t i = 0; i < a.trunk.size(); ++i)
        fn(a.trunk[i], b.trunk[i]);
    fn(a.value, b.value);
    fn(a.advantage, b.advantage);
}

NetworkParameters zero_parameters(const NetworkShape &shape) {
    if (shape.input < 1 || shape.actions < 1)
        throw ConfigError("agent.network: input and action counts must be >= 1");
    NetworkParameters p;
    int fan_in = shape.input;
    for (int width : shape.hidden) {
        if (width < 1)
            throw ConfigError("agent.hidden: layer widths must be >= 1");
        p.trunk.push_back({Eigen::MatrixXd::Zero(width, fan_in), Eigen::VectorXd::Zero(width)});
        fan_in = width;
    }
    p.value = {Eigen::MatrixXd::Zero(1, fan_in), Eigen::VectorXd::Zero(1)};
    p.advantage = {Eigen::MatrixXd::Zero(shape.actions, fan_in), Eigen::VectorXd::Zero(shape.actions)};
    return p;
}

} // namespace

std::size_t NetworkParameters::count() const {
    std::size_t n = 0;
    for_each_layer(*this, [&](const DenseLayer &l) { n += static_cast<std::size_t>(l.weight.size() + l.bias.size()); });
    return n;
}

std::vector<double> NetworkParameters::flatten() const {
    std::vector<double> out;
    out.reserve(count());
    for_each_layer(*this, [&](const DenseLayer &l) {
        out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
        out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
    });
    return out;
}

void NetworkParameters::assign(std::span<const double> flat) {
    if (flat.size() != count())
        throw ConfigError("network parameters: expected " + std::to_string(count()) + " values, got " +
                          std::to_string(flat.size()));
    std::size_t at = 0;
    for_each_layer(*this, [&](DenseLayer &l) {
        std::copy_n(flat.data() + at, l.weight.size(), l.weight.data());
        at += static_cast<std::size_t>(l.weight.size());
        std::copy_n(flat.data() + at, l.bias.size(), l.bias.data());
        at += static_cast<std::size_t>(l.bias.size());
    });
}

void NetworkParameters::set_zero() {
    for_each_layer(*this, [](DenseLayer &l) {
        l.weight.setZero();
        l.bias.setZero();
    });
}

NetworkParameters &NetworkParameters::operator+=(const NetworkParameters &other) {
    for_each_layer_pair(*this, other, [](DenseLayer &a, const DenseLayer &b) {
        a.weight += b.weight;
        a.bias += b.bias;
    });
    return *this;
}

NetworkParameters &NetworkParameters::operator*=(double factor) {
    for_each_layer(*this, [&](DenseLayer &l) {
        l.weight *= factor;
        l.bias *= factor;
    });
    return *this;
}

double NetworkParameters::squared_norm() const {
    double s = 0.0;
    for_each_layer(*this, [&](const DenseLayer &l) { s += l.weight.squaredNorm() + l.bias.squaredNorm(); });
    return s;
}

bool NetworkParameters::all_finite() const {
    bool ok = true;
    for_each_layer(*this, [&](const DenseLayer &l) { ok = ok && l.weight.allFinite() && l.bias.allFinite(); });
    return ok;
}

QNetwork::QNetwork(NetworkShape shape, std::mt19937_64 &rng) : shape_(std::move(shape)) {
    params_ = zero_parameters(shape_);
    for_each_layer(params_, [&](DenseLayer &l) {
        double limit = std::sqrt(6.0 / static_cast<double>(l.weight.rows() + l.weight.cols()));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Eigen::Index i = 0; i < l.weight.size(); ++i)
            l.weight.data()[i] = dist(rng);
    });
}

QNetwork QNetwork::zeros(NetworkShape shape) {
    QNetwork net;
    net.shape_ = std::move(shape);
    net.params_ = zero_parameters(net.shape_);
    return net;
}

Eigen::VectorXd dueling_aggregate(double value, const Eigen::VectorXd &advantage) {
    return (advantage.array() - advantage.mean() + value).matrix();
}

QOutput QNetwork::forward_batch(const Eigen::MatrixXd &states) const {
    if (states.rows() != shape_.input)
        throw ConfigError("network input: expected " + std::to_string(shape_.input) + " features, got " +
                          std::to_string(states.rows()));
    Eigen::MatrixXd h = states;
    for (const auto &layer : params_.trunk) {
        Eigen::MatrixXd z = layer.weight * h;
        z.colwise() += layer.bias;
        h = z.cwiseMax(0.0);
    }
    QOutput out;
    out.value = (params_.value.weight * h).row(0).array() + params_.value.bias(0);
    out.advantage = params_.advantage.weight * h;
    out.advantage.colwise() += params_.advantage.bias;
    Eigen::RowVectorXd mean = out.advantage.colwise().mean();
    out.q = out.advantage;
    out.q.rowwise() += out.value - mean;
    return out;
}

Eigen::VectorXd QNetwork::forward(std::span<const double> state) const {
    Eigen::Map<const Eigen::MatrixXd> x(state.data(), static_cast<Eigen::Index>(state.size()), 1);
    return forward_batch(x).q.col(0);
}

double QNetwork::loss(const Eigen::MatrixXd &states, const std::vector<int> &actions,
                      const Eigen::VectorXd &targets) const {
    QOutput out = forward_batch(states);
    double total = 0.0;
    for (Eigen::Index i = 0; i < states.cols(); ++i) {
        double e = out.q(actions[static_cast<std::size_t>(i)], i) - targets(i);
        total += e * e;
    }
    return total / static_cast<double>(states.cols());
}

double QNetwork::loss_and_gradient(const Eigen::MatrixXd &states, const std::vector<int> &actions,
                                   const Eigen::VectorXd &targets, NetworkParameters &grad) const {
    const Eigen::Index batch = states.cols();
    if (static_cast<Eigen::Index>(actions.size()) != batch || targets.size() != batch)
        throw ConfigError("training batch: states, actions and targets disagree in size");
    if (states.rows() != shape_.input)
        throw ConfigError("network input: expected " + std::to_string(shape_.input) + " features, got " +
                          std::to_string(states.rows()));
    if (grad.count() != params_.count())
        grad = zero_parameters(shape_);

    // Forward, keeping every layer's input and pre-activation.
    std::vector<Eigen::MatrixXd> inputs;
    std::vector<Eigen::MatrixXd> pre;
    inputs.reserve(params_.trunk.size() + 1);
    pre.reserve(params_.trunk.size());
    inputs.push_back(states);
    for (const auto &layer : params_.trunk) {
        Eigen::MatrixXd z = layer.weight * inputs.back();
        z.colwise() += layer.bias;
        inputs.push_back(z.cwiseMax(0.0));
        pre.push_back(std::move(z));
    }
    const Eigen::MatrixXd &h = inputs.back();
    Eigen::RowVectorXd value = (params_.value.weight * h).row(0).array() + params_.value.bias(0);
    Eigen::MatrixXd adv = params_.advantage.weight * h;
    adv.colwise() += params_.advantage.bias;
    Eigen::RowVectorXd mean = adv.colwise().mean();

    // dLoss/dQ is non-zero only at the taken action.
    Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(shape_.actions, batch);
    double total = 0.0;
    for (Eigen::Index i = 0; i < batch; ++i) {
        int a = actions[static_cast<std::size_t>(i)];
        if (a < 0 || a >= shape_.actions)
            throw ConfigError("training batch: action index out of range");
        double e = value(i) + adv(a, i) - mean(i) - targets(i);
        total += e * e;
        dq(a, i) = 2.0 * e / static_cast<double>(batch);
    }

    Eigen::RowVectorXd dvalue = dq.colwise().sum();
    Eigen::MatrixXd dadv = dq;
    dadv.rowwise() -= dq.colwise().mean();

    grad.value.weight.noalias() = dvalue * h.transpose();
    grad.value.bias(0) = dvalue.sum();
    grad.advantage.weight.noalias() = dadv * h.transpose();
    grad.advantage.bias = dadv.rowwise().sum();

    Eigen::MatrixXd dh = params_.value.weight.transpose() * dvalue;
    dh.noalias() += params_.advantage.weight.transpose() * dadv;
    for (std::size_t k = params_.trunk.size(); k-- > 0;) {
        Eigen::MatrixXd dz = ((pre[k].array() > 0.0).cast<double>() * dh.array()).matrix();
        grad.trunk[k].weight.noalias() = dz * inputs[k].transpose();
        grad.trunk[k].bias = dz.rowwise().sum();
        if (k > 0)
            dh.noalias() = params_.trunk[k].weight.transpose() * dz;
    }
    return total / static_cast<double>(batch);
}

void QNetwork::sgd_update(const NetworkParameters &grad, double learning_rate) {
    for_each_layer_pair(params_, grad, [&](DenseLayer &p, const DenseLayer &g) {
        p.weight.noalias() -= learning_rate * g.weight;
        p.bias.noalias() -= learning_rate * g.bias;
    });
}

bool QNetwork::operator==(const QNetwork &other) const {
    return shape_ == other.shape_ && params_.flatten() == other.params_.flatten();
}

} // namespace atsc
