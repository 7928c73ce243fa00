#pragma once

#include "atsc/sim.hpp"

#include <array>
#include <optional>
#include <string_view>

namespace atsc {

// WEG: W/E through+right (lanes 1-2); WELG: W/E left (lane 0); NSG / NSLG likewise for N/S.
enum class Phase { WEG = 0, WELG = 1, NSG = 2, NSLG = 3 };
inline constexpr int kPhases = 4;

std::string_view to_string(Phase p);
Phase phase_from_index(int index);
Phase next_phase(Phase p); // WEG -> WELG -> NSG -> NSLG -> WEG
bool phase_serves(Phase p, LaneId lane);

struct SignalTiming {
    int min_green = 10;
    int yellow = 4;
};

struct PhaseMachine {
    Phase active = Phase::WEG;
    int elapsed_green = 0; // green seconds shown so far in the active phase
    bool in_yellow = false;
    int yellow_remaining = 0;
    // Latched request while min-green is unmet; during yellow, the committed incoming phase.
    std::optional<Phase> pending;
    SignalTiming timing;

    // True when a request for another phase would start its yellow immediately.
    bool can_switch() const { return !in_yellow && !pending && elapsed_green >= timing.min_green; }
};

// Hold (target == active), latch (min-green unmet) or begin the yellow transition.
// Requests arriving during yellow are ignored; the committed target stands.
PhaseMachine request_phase(PhaseMachine machine, Phase target);

// Emits this second's per-lane colors and advances the timers by one second.
SignalOutput tick(PhaseMachine &machine);

enum class ControllerKind { FixedTime, Actuated, AgentTE, AgentSED };
std::string_view to_string(ControllerKind k);
ControllerKind parse_controller(std::string_view name); // fixed|actuated|te|sed; throws ConfigError
bool is_agent(ControllerKind k);

struct WebsterPlan {
    std::array<double, kPhases> flow_ratio{}; // critical lane flow / saturation flow
    double critical_sum = 0.0;
    double lost_time = 0.0;
    double cycle = 0.0;                       // optimal cycle C0
    std::array<double, kPhases> green{};      // green splits, floored at min-green
    double schedule_cycle = 0.0;              // sum of greens + lost time
};

double webster_cycle(double critical_sum, double lost_time);

// Throws InfeasibleDemand when the critical flow ratios sum to 1 or more.
WebsterPlan webster_fixed_time(const DemandProfile &demand, double saturation_flow,
                               const SignalTiming &timing = {});

struct DetectorState {
    std::array<double, kLanes> since_detection{}; // seconds; +inf when never detected
};

// Point detectors `distance` meters upstream of each stop line.
class DetectorBank {
public:
    explicit DetectorBank(double distance = 50.0);

    void reset();
    void update(const TrafficSnapshot &snapshot, double lane_length, double dt = 1.0);
    DetectorState state(double now) const;

private:
    double distance_;
    std::array<double, kLanes> last_seen_;
};

struct ActuatedParams {
    double gap_time = 3.0;
    int max_green = 60;
    double detector_distance = 50.0;
};

std::optional<Phase> actuated_controller(const DetectorState &detectors, const PhaseMachine &machine,
                                         const ActuatedParams &params = {});

struct ControlContext {
    const TrafficSnapshot &snapshot;
    const PhaseMachine &machine;
    const DetectorState &detectors;
};

class Controller {
public:
    virtual ~Controller() = default;
    virtual ControllerKind kind() const = 0;
    virtual std::optional<Phase> decide(const ControlContext &ctx) = 0;
};

class FixedTimeController : public Controller {
public:
    explicit FixedTimeController(const WebsterPlan &plan, const SignalTiming &timing = {});

    ControllerKind kind() const override { return ControllerKind::FixedTime; }
    std::optional<Phase> decide(const ControlContext &ctx) override;

    const std::array<int, kPhases> &greens() const { return greens_; }

private:
    std::array<int, kPhases> greens_{};
};

class ActuatedController : public Controller {
public:
    explicit ActuatedController(ActuatedParams params = {}) : params_(params) {}

    ControllerKind kind() const override { return ControllerKind::Actuated; }
    std::optional<Phase> decide(const ControlContext &ctx) override {
        return actuated_controller(ctx.detectors, ctx.machine, params_);
    }

private:
    ActuatedParams params_;
};

} // namespace atsc
