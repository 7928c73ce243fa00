#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace atsc {

enum class Movement { Left, Through, Right };

// Clockwise order; a vehicle "from N" enters on the north leg heading south.
enum class Approach { N = 0, E = 1, S = 2, W = 3 };

inline constexpr int kApproaches = 4;
inline constexpr int kLanesPerApproach = 3;
inline constexpr int kLanes = kApproaches * kLanesPerApproach;

// Waiting-time stop threshold, m/s.
inline constexpr double kStopSpeed = 0.1;

std::string_view to_string(Movement m);
std::string_view to_string(Approach a);

// Leg through which a vehicle leaves the intersection (right-hand traffic).
Approach destination(Approach from, Movement movement);

struct LaneId {
    Approach approach = Approach::N;
    int index = 0; // 0 = leftmost

    int flat() const { return static_cast<int>(approach) * kLanesPerApproach + index; }
    static LaneId from_flat(int flat) {
        return {static_cast<Approach>(flat / kLanesPerApproach), flat % kLanesPerApproach};
    }
    bool operator==(const LaneId &) const = default;
};

enum class LightColor { Green, Yellow, Red };
using SignalOutput = std::array<LightColor, kLanes>;

struct Vehicle {
    std::int64_t id = -1;
    LaneId lane;
    Movement movement = Movement::Through;
    double pos = 0.0; // front bumper, meters from lane entry; > lane_length only inside the conflict zone
    double speed = 0.0;
    double accel = 0.0;
    double length = 5.0;
    double waiting_time = 0.0;
    double spawn_time = 0.0;
    int zone_remaining = 0; // seconds left in the conflict zone after crossing the stop line

    bool in_zone() const { return zone_remaining > 0; }
};

struct MovementSplit {
    double left = 0.2;
    double through = 0.6;
    double right = 0.2;
};

struct ApproachDemand {
    double rate_vph = 0.0;
    MovementSplit split;
};

struct DemandProfile {
    std::array<ApproachDemand, kApproaches> approaches;

    const ApproachDemand &operator[](Approach a) const { return approaches[static_cast<int>(a)]; }
    ApproachDemand &operator[](Approach a) { return approaches[static_cast<int>(a)]; }

    // Asymmetric morning-peak default: W/E 700 veh/h, N/S 400 veh/h.
    static DemandProfile asymmetric_default();
    DemandProfile scaled(double factor) const;
    void validate() const; // throws ConfigError
};

struct IdmParams {
    double v0 = 13.9;    // desired speed, m/s
    double a_max = 2.0;  // m/s^2
    double b = 3.0;      // comfortable deceleration, m/s^2
    double s0 = 2.0;     // jam distance, m
    double T = 1.2;      // time headway, s
    double length = 5.0; // vehicle length, m
};

struct SimParams {
    IdmParams idm;
    double lane_length = 500.0;
    int zone_clearance = 3;         // seconds spent in the conflict zone before exit
    double rtor_horizon = 4.0;      // right-on-red yields to conflicting traffic this close (s)
    double safety_clamp_gap = 0.5;  // kinematic guard on bumper gaps, m
    bool strict = true;             // collision faults abort the run
};

struct TrafficSnapshot {
    double time = 0.0;
    // Approach vehicles grouped by lane (flat index ascending), front-most first; then
    // conflict-zone vehicles in crossing order.
    std::vector<Vehicle> vehicles;
    SignalOutput signal{};
    std::int64_t entered = 0;
    std::int64_t exited = 0;
    double banked_waiting = 0.0; // waiting time carried out by exited vehicles
};

// Intelligent Driver Model. leader_gap is bumper-to-bumper; leader_speed for the closing term.
struct LeaderView {
    double gap;
    double speed;
};
double idm_acceleration(double speed, std::optional<LeaderView> leader, const IdmParams &p,
                        bool strict = true);
double idm_acceleration(const Vehicle &follower, const Vehicle *leader, const IdmParams &p,
                        bool strict = true);

// Draws this second's arrivals for one approach: Poisson(rate/3600), movement by split,
// through vehicles spread over lanes 1 and 2 so both carry equal expected flow.
std::vector<Vehicle> spawn_arrivals(std::mt19937_64 &rng, const ApproachDemand &demand,
                                    Approach approach, double t, const IdmParams &idm);

// Expected per-lane flow (veh/h) implied by a demand profile and the lane routing above.
std::array<double, kLanes> lane_flows(const DemandProfile &demand);

bool right_turn_permitted(const TrafficSnapshot &snapshot, const SignalOutput &signal, const Vehicle &vehicle,
                          const SimParams &params);

// Moves every vehicle one step under the given per-lane lights. No arrivals.
TrafficSnapshot advance_vehicles(const TrafficSnapshot &snapshot, const SignalOutput &signal,
                                 const SimParams &params, double dt = 1.0);

// Episode waiting total: present vehicles plus banked waiting of exited ones.
double cumulative_waiting(const TrafficSnapshot &snapshot);

// Approach-lane vehicles only, front-most first.
std::vector<const Vehicle *> lane_vehicles(const TrafficSnapshot &snapshot, int lane_flat);

class Simulation {
public:
    Simulation(SimParams params, DemandProfile demand, std::uint64_t seed);

    const TrafficSnapshot &snapshot() const { return snapshot_; }
    const SimParams &params() const { return params_; }

    // One 1 s step: motion under `signal`, then this second's arrivals are queued and inserted.
    const TrafficSnapshot &step(const SignalOutput &signal);

    std::size_t pending_insertions() const;

private:
    SimParams params_;
    DemandProfile demand_;
    std::array<std::mt19937_64, kApproaches> streams_;
    std::array<std::deque<Vehicle>, kLanes> pending_;
    TrafficSnapshot snapshot_;
    std::int64_t next_id_ = 0;
};

} // namespace atsc
