#include "atsc/safety.hpp"

#include <algorithm>
#include <stdexcept>

namespace atsc {

std::optional<double> ttc(double gap, double follower_speed, double leader_speed) {
    if (follower_speed <= leader_speed)
        return std::nullopt;
    return gap / (follower_speed - leader_speed);
}

std::optional<double> ttc(const Vehicle &follower, const Vehicle &leader) {
    double gap = leader.pos - leader.length - follower.pos;
    return ttc(gap, follower.speed, leader.speed);
}

namespace {

template <typename Fn>
void for_each_adjacent_pair(const TrafficSnapshot &snapshot, Fn &&fn) {
    const auto &vs = snapshot.vehicles;
    for (std::size_t i = 1; i < vs.size(); ++i) {
        const Vehicle &leader = vs[i - 1];
        const Vehicle &follower = vs[i];
        if (leader.in_zone() || follower.in_zone() || !(leader.lane == follower.lane))
            continue;
        fn(follower, leader);
    }
}

} // namespace

int step_conflicts(const TrafficSnapshot &snapshot, double threshold) {
    int count = 0;
    for_each_adjacent_pair(snapshot, [&](const Vehicle &follower, const Vehicle &leader) {
        auto t = ttc(follower, leader);
        if (t && *t < threshold)
            ++count;
    });
    return count;
}

ConflictLedger accumulate(ConflictLedger ledger, int step_count) {
    if (step_count < 0)
        throw std::invalid_argument("conflict count must be non-negative");
    ledger.ctc += step_count;
    ledger.history.push_back(step_count);
    return ledger;
}

int ConflictEventCounter::update(const TrafficSnapshot &snapshot, double threshold) {
    std::vector<std::pair<std::int64_t, std::int64_t>> now;
    for_each_adjacent_pair(snapshot, [&](const Vehicle &follower, const Vehicle &leader) {
        auto t = ttc(follower, leader);
        if (t && *t < threshold)
            now.emplace_back(follower.id, leader.id);
    });
    std::sort(now.begin(), now.end());
    int onsets = 0;
    for (const auto &pair : now) {
        if (!std::binary_search(active_.begin(), active_.end(), pair))
            ++onsets;
    }
    active_ = std::move(now);
    total_ += onsets;
    return onsets;
}

void ConflictEventCounter::reset() {
    active_.clear();
    total_ = 0;
}

} // namespace atsc
