#include "atsc/signal.hpp"

#include "atsc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace atsc {

std::string_view to_string(Phase p) {
    switch (p) {
    case Phase::WEG: return "WEG";
    case Phase::WELG: return "WELG";
    case Phase::NSG: return "NSG";
    case Phase::NSLG: return "NSLG";
    }
    return "?";
}

Phase phase_from_index(int index) {
    if (index < 0 || index >= kPhases)
        throw ConfigError("phase index out of range: " + std::to_string(index));
    return static_cast<Phase>(index);
}

Phase next_phase(Phase p) { return static_cast<Phase>((static_cast<int>(p) + 1) % kPhases); }

bool phase_serves(Phase p, LaneId lane) {
    bool west_east = lane.approach == Approach::W || lane.approach == Approach::E;
    bool left_lane = lane.index == 0;
    switch (p) {
    case Phase::WEG: return west_east && !left_lane;
    case Phase::WELG: return west_east && left_lane;
    case Phase::NSG: return !west_east && !left_lane;
    case Phase::NSLG: return !west_east && left_lane;
    }
    return false;
}

PhaseMachine request_phase(PhaseMachine machine, Phase target) {
    if (machine.in_yellow)
        return machine;
    if (target == machine.active) {
        machine.pending.reset();
        return machine;
    }
    if (machine.elapsed_green < machine.timing.min_green) {
        machine.pending = target;
        return machine;
    }
    machine.in_yellow = true;
    machine.yellow_remaining = machine.timing.yellow;
    machine.pending = target;
    return machine;
}

SignalOutput tick(PhaseMachine &machine) {
    if (!machine.in_yellow && machine.pending && machine.elapsed_green >= machine.timing.min_green) {
        machine.in_yellow = true;
        machine.yellow_remaining = machine.timing.yellow;
    }

    SignalOutput out;
    LightColor served = machine.in_yellow ? LightColor::Yellow : LightColor::Green;
    for (int lane = 0; lane < kLanes; ++lane)
        out[lane] = phase_serves(machine.active, LaneId::from_flat(lane)) ? served : LightColor::Red;

    if (machine.in_yellow) {
        if (--machine.yellow_remaining <= 0) {
            machine.active = *machine.pending;
            machine.pending.reset();
            machine.in_yellow = false;
            machine.yellow_remaining = 0;
            machine.elapsed_green = 0;
        }
    } else {
        ++machine.elapsed_green;
    }
    return out;
}

std::string_view to_string(ControllerKind k) {
    switch (k) {
    case ControllerKind::FixedTime: return "fixed";
    case ControllerKind::Actuated: return "actuated";
    case ControllerKind::AgentTE: return "te";
    case ControllerKind::AgentSED: return "sed";
    }
    return "?";
}

ControllerKind parse_controller(std::string_view name) {
    if (name == "fixed")
        return ControllerKind::FixedTime;
    if (name == "actuated")
        return ControllerKind::Actuated;
    if (name == "te")
        return ControllerKind::AgentTE;
    if (name == "sed")
        return ControllerKind::AgentSED;
    throw ConfigError("controller: unknown kind '" + std::string(name) + "' (fixed|actuated|te|sed)");
}

bool is_agent(ControllerKind k) { return k == ControllerKind::AgentTE || k == ControllerKind::AgentSED; }

double webster_cycle(double critical_sum, double lost_time) {
    if (critical_sum >= 1.0)
        throw InfeasibleDemand("critical flow ratio sum " + std::to_string(critical_sum) + " >= 1");
    return (1.5 * lost_time + 5.0) / (1.0 - critical_sum);
}

WebsterPlan webster_fixed_time(const DemandProfile &demand, double saturation_flow, const SignalTiming &timing) {
    if (!(saturation_flow > 0.0))
        throw ConfigError("signal.saturation_flow: must be > 0");
    auto flows = lane_flows(demand);

    WebsterPlan plan;
    for (int p = 0; p < kPhases; ++p) {
        double critical = 0.0;
        for (int lane = 0; lane < kLanes; ++lane) {
            if (phase_serves(static_cast<Phase>(p), LaneId::from_flat(lane)))
                critical = std::max(critical, flows[lane]);
        }
        plan.flow_ratio[p] = critical / saturation_flow;
        plan.critical_sum += plan.flow_ratio[p];
    }
    plan.lost_time = static_cast<double>(kPhases * timing.yellow);
    plan.cycle = webster_cycle(plan.critical_sum, plan.lost_time);

    double effective = plan.cycle - plan.lost_time;
    plan.schedule_cycle = plan.lost_time;
    for (int p = 0; p < kPhases; ++p) {
        double share = plan.critical_sum > 0.0 ? plan.flow_ratio[p] / plan.critical_sum : 1.0 / kPhases;
        plan.green[p] = std::max(effective * share, static_cast<double>(timing.min_green));
        plan.schedule_cycle += plan.green[p];
    }
    return plan;
}

DetectorBank::DetectorBank(double distance) : distance_(distance) { reset(); }

void DetectorBank::reset() { last_seen_.fill(-std::numeric_limits<double>::infinity()); }

void DetectorBank::update(const TrafficSnapshot &snapshot, double lane_length, double dt) {
    double point = lane_length - distance_;
    for (const auto &v : snapshot.vehicles) {
        if (v.in_zone())
            continue;
        double rear_before = v.pos - v.speed * dt - v.length;
        if (rear_before <= point && point <= v.pos)
            last_seen_[v.lane.flat()] = snapshot.time;
    }
}

DetectorState DetectorBank::state(double now) const {
    DetectorState s;
    for (int lane = 0; lane < kLanes; ++lane)
        s.since_detection[lane] = now - last_seen_[lane];
    return s;
}

std::optional<Phase> actuated_controller(const DetectorState &detectors, const PhaseMachine &machine,
                                         const ActuatedParams &params) {
    if (machine.in_yellow || machine.pending || machine.elapsed_green < machine.timing.min_green)
        return std::nullopt;
    Phase next = next_phase(machine.active);
    if (machine.elapsed_green >= params.max_green)
        return next;
    double freshest = std::numeric_limits<double>::infinity();
    for (int lane = 0; lane < kLanes; ++lane) {
        if (phase_serves(machine.active, LaneId::from_flat(lane)))
            freshest = std::min(freshest, detectors.since_detection[lane]);
    }
    if (freshest >= params.gap_time)
        return next;
    return std::nullopt;
}

FixedTimeController::FixedTimeController(const WebsterPlan &plan, const SignalTiming &timing) {
    for (int p = 0; p < kPhases; ++p)
        greens_[p] = std::max(timing.min_green, static_cast<int>(std::lround(plan.green[p])));
}

std::optional<Phase> FixedTimeController::decide(const ControlContext &ctx) {
    const auto &m = ctx.machine;
    if (m.in_yellow || m.pending)
        return std::nullopt;
    if (m.elapsed_green >= greens_[static_cast<int>(m.active)])
        return next_phase(m.active);
    return std::nullopt;
}

} // namespace atsc
