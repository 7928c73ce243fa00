#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace atsc {

struct NetworkShape {
    int input = 0;
    std::vector<int> hidden{128, 128}; // empty = linear heads on the input
    int actions = 4;

    bool operator==(const NetworkShape &) const = default;
};

struct DenseLayer {
    Eigen::MatrixXd weight; // out x in
    Eigen::VectorXd bias;
};

// Trunk layers followed by the value (1 output) and advantage (`actions` outputs) heads.
struct NetworkParameters {
    std::vector<DenseLayer> trunk;
    DenseLayer value;
    DenseLayer advantage;

    std::size_t count() const;
    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);
    void set_zero();
    NetworkParameters &operator+=(const NetworkParameters &other);
    NetworkParameters &operator*=(double factor);
    double squared_norm() const;
    bool all_finite() const;
};

struct QOutput {
    Eigen::RowVectorXd value;   // 1 x B
    Eigen::MatrixXd advantage;  // actions x B
    Eigen::MatrixXd q;          // actions x B
};

// Dueling Q-network: rectified-linear trunk, Q = V + A - mean(A).
class QNetwork {
public:
    QNetwork() = default;
    // Uniform(+-sqrt(6/(fan_in+fan_out))) weights, zero biases.
    QNetwork(NetworkShape shape, std::mt19937_64 &rng);
    static QNetwork zeros(NetworkShape shape);

    const NetworkShape &shape() const { return shape_; }
    const NetworkParameters &parameters() const { return params_; }
    NetworkParameters &parameters() { return params_; }

    // Columns of `states` are inputs. Throws ConfigError on dimension mismatch.
    QOutput forward_batch(const Eigen::MatrixXd &states) const;
    Eigen::VectorXd forward(std::span<const double> state) const;

    // Loss = mean over the batch of (Q(s_i, a_i) - y_i)^2. Fills `grad` with dLoss/dparams.
    double loss_and_gradient(const Eigen::MatrixXd &states, const std::vector<int> &actions,
                             const Eigen::VectorXd &targets, NetworkParameters &grad) const;
    double loss(const Eigen::MatrixXd &states, const std::vector<int> &actions,
                const Eigen::VectorXd &targets) const;

    void sgd_update(const NetworkParameters &grad, double learning_rate);

    bool operator==(const QNetwork &other) const;

private:
    NetworkShape shape_;
    NetworkParameters params_;
};

// Mean-centred dueling aggregation of one value and an advantage vector.
Eigen::VectorXd dueling_aggregate(double value, const Eigen::VectorXd &advantage);

} // namespace atsc
