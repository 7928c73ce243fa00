#include "atsc/rewards.hpp"

#include "atsc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace atsc {

void RewardWeights::validate() const {
    for (double w : as_array()) {
        if (!(w >= 0.0 && w <= 1.0))
            throw ConfigError("reward.weights: each weight must lie in [0,1]");
    }
    if (std::abs(safety + efficiency + carbon - 1.0) > 1e-9)
        throw ConfigError("reward.weights: weights must sum to 1");
}

Channels raw_rewards(const MetricsRecord &prev, const MetricsRecord &cur) {
    return {-(cur.ctc - prev.ctc), -(cur.cwt - prev.cwt), -(cur.cde - prev.cde)};
}

NormalizationWindow::NormalizationWindow(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0)
        throw ConfigError("reward.window: must be >= 1");
}

void NormalizationWindow::absorb(double value) {
    values_.push_back(value);
    while (values_.size() > capacity_)
        values_.pop_front();
}

double NormalizationWindow::min() const { return *std::min_element(values_.begin(), values_.end()); }
double NormalizationWindow::max() const { return *std::max_element(values_.begin(), values_.end()); }

double normalize(double value, NormalizationWindow &window) {
    double out = 0.5;
    if (!window.empty()) {
        double lo = window.min();
        double hi = window.max();
        if (hi > lo)
            out = std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
    }
    window.absorb(value);
    return out;
}

RewardWeights entropy_weights(const std::vector<Channels> &samples, const RewardWeights &fallback) {
    constexpr double eps = 1e-12;
    const std::size_t n = samples.size();
    if (n < 2)
        throw InsufficientSamples("entropy weights need at least 2 samples, got " + std::to_string(n));

    Channels divergence{};
    double total = 0.0;
    const double k = 1.0 / std::log(static_cast<double>(n));
    for (int j = 0; j < kChannels; ++j) {
        double column = 0.0;
        for (const auto &row : samples)
            column += row[j] + eps;
        double entropy = 0.0;
        for (const auto &row : samples) {
            double p = (row[j] + eps) / column;
            entropy -= p * std::log(p);
        }
        entropy *= k;
        divergence[j] = std::max(0.0, 1.0 - entropy);
        total += divergence[j];
    }
    if (!(total > 1e-15))
        return fallback;
    return {divergence[0] / total, divergence[1] / total, divergence[2] / total};
}

double combine(const Channels &normalized, const RewardWeights &weights) {
    return weights.safety * normalized[0] + weights.efficiency * normalized[1] + weights.carbon * normalized[2];
}

RewardModel::RewardModel(RewardWeights weights, NormalizationParams params)
    : weights_(weights), params_(params),
      windows_{NormalizationWindow(params.window), NormalizationWindow(params.window),
               NormalizationWindow(params.window)} {
    weights_.validate();
    for (double s : params_.scales) {
        if (!(s > 0.0))
            throw ConfigError("reward.scales: must be > 0");
    }
}

void RewardModel::set_weights(const RewardWeights &w) {
    w.validate();
    weights_ = w;
}

double RewardModel::scalar(const Channels &raw) {
    bool warming = seen_ < params_.warmup;
    for (int j = 0; j < kChannels; ++j) {
        if (warming) {
            last_[j] = std::clamp(1.0 + raw[j] / params_.scales[j], 0.0, 1.0);
            windows_[j].absorb(raw[j]);
        } else {
            last_[j] = normalize(raw[j], windows_[j]);
        }
    }
    ++seen_;
    samples_.push_back(last_);
    return combine(last_, weights_);
}

} // namespace atsc
