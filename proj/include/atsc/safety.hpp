#pragma once

#include "atsc/sim.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace atsc {

inline constexpr double kConflictThreshold = 3.0;

// Time-to-collision d / (v_F - v_L) with d the bumper-to-bumper gap.
// Non-closing pairs (v_F <= v_L) have no TTC.
std::optional<double> ttc(double gap, double follower_speed, double leader_speed);
std::optional<double> ttc(const Vehicle &follower, const Vehicle &leader);

// Adjacent same-lane rear-end pairs with TTC strictly below the threshold.
int step_conflicts(const TrafficSnapshot &snapshot, double threshold = kConflictThreshold);

struct ConflictLedger {
    std::int64_t ctc = 0;
    std::vector<int> history;
};

ConflictLedger accumulate(ConflictLedger ledger, int step_count);

// Counts conflict onsets only: a pair already in conflict at the previous step adds nothing.
// Reporting aid; rewards use the per-step count.
class ConflictEventCounter {
public:
    int update(const TrafficSnapshot &snapshot, double threshold = kConflictThreshold);
    std::int64_t total() const { return total_; }
    void reset();

private:
    std::vector<std::pair<std::int64_t, std::int64_t>> active_;
    std::int64_t total_ = 0;
};

} // namespace atsc
