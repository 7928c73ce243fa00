#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <vector>

namespace atsc {

inline constexpr int kChannels = 3; // safety (conflicts), efficiency (waiting), carbon (CO2)
using Channels = std::array<double, kChannels>;

// Episode-cumulative indicators at one decision instant.
struct MetricsRecord {
    double ctc = 0.0; // conflicts
    double cwt = 0.0; // seconds
    double cde = 0.0; // grams
};

struct RewardWeights {
    double safety = 0.5;
    double efficiency = 0.25;
    double carbon = 0.25;

    Channels as_array() const { return {safety, efficiency, carbon}; }
    static RewardWeights from_array(const Channels &w) { return {w[0], w[1], w[2]}; }
    void validate() const; // throws ConfigError
};

// -(X(t+1) - X(t)) per channel; always <= 0 for non-decreasing cumulatives.
Channels raw_rewards(const MetricsRecord &prev, const MetricsRecord &cur);

class NormalizationWindow {
public:
    explicit NormalizationWindow(std::size_t capacity = 500);

    void absorb(double value);
    std::size_t size() const { return values_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return values_.empty(); }
    double min() const;
    double max() const;

private:
    std::size_t capacity_;
    std::deque<double> values_;
};

// Min-max against the window's current contents (0.5 when degenerate), clamped to [0,1];
// the window then absorbs the value.
double normalize(double value, NormalizationWindow &window);

// Entropy weight method over an n x 3 matrix of normalized samples. Falls back to
// `fallback` when every column is constant. Throws InsufficientSamples when n < 2.
RewardWeights entropy_weights(const std::vector<Channels> &samples, const RewardWeights &fallback = {});

double combine(const Channels &normalized, const RewardWeights &weights);

struct NormalizationParams {
    std::size_t window = 500;
    std::size_t warmup = 50;
    Channels scales{10.0, 100.0, 1000.0}; // fixed scales during warm-up
};

// Stateful raw -> normalized -> scalar pipeline owned by a training loop.
class RewardModel {
public:
    RewardModel(RewardWeights weights = {}, NormalizationParams params = {});

    double scalar(const Channels &raw);
    const Channels &last_normalized() const { return last_; }

    const RewardWeights &weights() const { return weights_; }
    void set_weights(const RewardWeights &w);

    // Normalized samples since the last clear, for entropy reweighting.
    const std::vector<Channels> &samples() const { return samples_; }
    void clear_samples() { samples_.clear(); }

private:
    RewardWeights weights_;
    NormalizationParams params_;
    std::array<NormalizationWindow, kChannels> windows_;
    std::size_t seen_ = 0;
    Channels last_{};
    std::vector<Channels> samples_;
};

} // namespace atsc
