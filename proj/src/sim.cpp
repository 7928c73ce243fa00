#include "atsc/sim.hpp"

#include "atsc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace atsc {

std::string_view to_string(Movement m) {
    switch (m) {
    case Movement::Left: return "L";
    case Movement::Through: return "T";
    case Movement::Right: return "R";
    }
    return "?";
}

std::string_view to_string(Approach a) {
    switch (a) {
    case Approach::N: return "N";
    case Approach::E: return "E";
    case Approach::S: return "S";
    case Approach::W: return "W";
    }
    return "?";
}

Approach destination(Approach from, Movement movement) {
    int a = static_cast<int>(from);
    switch (movement) {
    case Movement::Through: return static_cast<Approach>((a + 2) % kApproaches);
    case Movement::Left: return static_cast<Approach>((a + 1) % kApproaches);
    case Movement::Right: return static_cast<Approach>((a + 3) % kApproaches);
    }
    return from;
}

DemandProfile DemandProfile::asymmetric_default() {
    DemandProfile d;
    d[Approach::W].rate_vph = 700.0;
    d[Approach::E].rate_vph = 700.0;
    d[Approach::N].rate_vph = 400.0;
    d[Approach::S].rate_vph = 400.0;
    return d;
}

DemandProfile DemandProfile::scaled(double factor) const {
    DemandProfile d = *this;
    for (auto &a : d.approaches)
        a.rate_vph *= factor;
    return d;
}

void DemandProfile::validate() const {
    for (int i = 0; i < kApproaches; ++i) {
        const auto &a = approaches[i];
        std::string name = "demand." + std::string(to_string(static_cast<Approach>(i)));
        if (!(a.rate_vph >= 0.0) || !std::isfinite(a.rate_vph))
            throw ConfigError(name + ".rate: must be a finite value >= 0");
        for (double f : {a.split.left, a.split.through, a.split.right}) {
            if (!(f >= 0.0 && f <= 1.0))
                throw ConfigError(name + ".split: fractions must lie in [0,1]");
        }
        if (std::abs(a.split.left + a.split.through + a.split.right - 1.0) > 1e-9)
            throw ConfigError(name + ".split: fractions must sum to 1");
    }
}

namespace {

// Share of through traffic routed to lane 1 so lanes 1 and 2 carry equal expected flow.
double through_lane1_share(const MovementSplit &s) {
    if (s.through <= 0.0)
        return 1.0;
    return std::clamp((s.through + s.right) / (2.0 * s.through), 0.0, 1.0);
}

} // namespace

std::array<double, kLanes> lane_flows(const DemandProfile &demand) {
    std::array<double, kLanes> flows{};
    for (int a = 0; a < kApproaches; ++a) {
        const auto &d = demand.approaches[a];
        double p1 = through_lane1_share(d.split);
        int base = a * kLanesPerApproach;
        flows[base + 0] = d.rate_vph * d.split.left;
        flows[base + 1] = d.rate_vph * d.split.through * p1;
        flows[base + 2] = d.rate_vph * (d.split.through * (1.0 - p1) + d.split.right);
    }
    return flows;
}

double idm_acceleration(double speed, std::optional<LeaderView> leader, const IdmParams &p, bool strict) {
    double free_term = 1.0 - std::pow(speed / p.v0, 4);
    if (!leader)
        return p.a_max * free_term;
    if (leader->gap <= 0.0) {
        if (strict) {
            std::ostringstream os;
            os << "car-following gap collapsed to " << leader->gap << " m";
            throw CollisionFault(os.str());
        }
        return -std::numeric_limits<double>::infinity();
    }
    double dv = speed - leader->speed;
    double dynamic = speed * p.T + speed * dv / (2.0 * std::sqrt(p.a_max * p.b));
    double s_star = p.s0 + std::max(0.0, dynamic);
    double ratio = s_star / leader->gap;
    return p.a_max * (free_term - ratio * ratio);
}

double idm_acceleration(const Vehicle &follower, const Vehicle *leader, const IdmParams &p, bool strict) {
    if (!leader)
        return idm_acceleration(follower.speed, std::nullopt, p, strict);
    LeaderView view{leader->pos - leader->length - follower.pos, leader->speed};
    return idm_acceleration(follower.speed, view, p, strict);
}

std::vector<Vehicle> spawn_arrivals(std::mt19937_64 &rng, const ApproachDemand &demand, Approach approach,
                                    double t, const IdmParams &idm) {
    std::vector<Vehicle> out;
    if (demand.rate_vph <= 0.0)
        return out;
    std::poisson_distribution<int> count_dist(demand.rate_vph / 3600.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int n = count_dist(rng);
    double p1 = through_lane1_share(demand.split);
    for (int i = 0; i < n; ++i) {
        Vehicle v;
        double u = unit(rng);
        double lane_draw = unit(rng);
        if (u < demand.split.left) {
            v.movement = Movement::Left;
            v.lane = {approach, 0};
        } else if (u < demand.split.left + demand.split.through) {
            v.movement = Movement::Through;
            v.lane = {approach, lane_draw < p1 ? 1 : 2};
        } else {
            v.movement = Movement::Right;
            v.lane = {approach, 2};
        }
        v.pos = 0.0;
        v.speed = idm.v0;
        v.length = idm.length;
        v.spawn_time = t;
        out.push_back(v);
    }
    return out;
}

std::vector<const Vehicle *> lane_vehicles(const TrafficSnapshot &snapshot, int lane_flat) {
    std::vector<const Vehicle *> out;
    for (const auto &v : snapshot.vehicles) {
        if (!v.in_zone() && v.lane.flat() == lane_flat)
            out.push_back(&v);
    }
    return out;
}

namespace {

// Time to cover `distance` from `speed` accelerating at a_max.
double reach_time(double distance, double speed, double a_max) {
    if (distance <= 0.0)
        return 0.0;
    return (-speed + std::sqrt(speed * speed + 2.0 * a_max * distance)) / a_max;
}

} // namespace

bool right_turn_permitted(const TrafficSnapshot &snapshot, const SignalOutput &signal, const Vehicle &vehicle,
                          const SimParams &params) {
    if (vehicle.movement != Movement::Right || vehicle.lane.index != 2 || vehicle.in_zone())
        return false;
    if (signal[vehicle.lane.flat()] != LightColor::Red)
        return false;
    Approach dest = destination(vehicle.lane.approach, Movement::Right);
    for (const auto &other : snapshot.vehicles) {
        if (other.id == vehicle.id)
            continue;
        if (destination(other.lane.approach, other.movement) != dest)
            continue;
        if (other.in_zone()) {
            if (other.movement == Movement::Right && other.lane.approach == vehicle.lane.approach)
                continue;
            return false;
        }
        if (other.movement == Movement::Right || signal[other.lane.flat()] != LightColor::Green)
            continue;
        if (reach_time(params.lane_length - other.pos, other.speed, params.idm.a_max) < params.rtor_horizon)
            return false;
    }
    return true;
}

TrafficSnapshot advance_vehicles(const TrafficSnapshot &snapshot, const SignalOutput &signal,
                                 const SimParams &params, double dt) {
    const IdmParams &idm = params.idm;
    const double stop_line = params.lane_length;

    TrafficSnapshot next;
    next.time = snapshot.time + dt;
    next.signal = signal;
    next.entered = snapshot.entered;
    next.exited = snapshot.exited;
    next.banked_waiting = snapshot.banked_waiting;

    std::vector<Vehicle> zone;
    for (const auto &v : snapshot.vehicles) {
        if (!v.in_zone())
            continue;
        Vehicle w = v;
        if (--w.zone_remaining == 0) {
            ++next.exited;
            next.banked_waiting += w.waiting_time;
            continue;
        }
        double a = idm_acceleration(w.speed, std::nullopt, idm, params.strict);
        double speed = std::max(0.0, w.speed + a * dt);
        w.accel = (speed - w.speed) / dt;
        w.speed = speed;
        w.pos += speed * dt;
        if (speed < kStopSpeed)
            w.waiting_time += dt;
        zone.push_back(w);
    }

    next.vehicles.reserve(snapshot.vehicles.size());
    std::vector<Vehicle> crossed;
    for (int lane = 0; lane < kLanes; ++lane) {
        auto current = lane_vehicles(snapshot, lane);
        if (current.empty())
            continue;
        LightColor color = signal[lane];

        std::vector<double> accel(current.size());
        std::vector<bool> stop_bound(current.size());
        for (std::size_t i = 0; i < current.size(); ++i) {
            const Vehicle &v = *current[i];
            const Vehicle *leader = i == 0 ? nullptr : current[i - 1];
            double a = idm_acceleration(v, leader, idm, params.strict);
            bool stops = color != LightColor::Green && !right_turn_permitted(snapshot, signal, v, params);
            if (stops) {
                LeaderView line{stop_line + idm.s0 - v.pos, 0.0};
                a = std::min(a, idm_acceleration(v.speed, line, idm, params.strict));
            }
            accel[i] = a;
            stop_bound[i] = stops;
        }

        std::vector<Vehicle> moved;
        moved.reserve(current.size());
        for (std::size_t i = 0; i < current.size(); ++i) {
            Vehicle w = *current[i];
            double speed = std::max(0.0, w.speed + accel[i] * dt);
            if (stop_bound[i])
                speed = std::min(speed, std::max(0.0, (stop_line - w.pos) / dt));
            if (i > 0) {
                const Vehicle &leader = moved[i - 1];
                double room = leader.pos - leader.length - params.safety_clamp_gap - w.pos;
                speed = std::min(speed, std::max(0.0, room / dt));
            }
            w.accel = (speed - w.speed) / dt;
            w.speed = speed;
            w.pos += speed * dt;
            if (speed < kStopSpeed)
                w.waiting_time += dt;
            if (i > 0 && params.strict) {
                const Vehicle &leader = moved[i - 1];
                if (w.pos >= leader.pos - leader.length) {
                    std::ostringstream os;
                    os << "vehicle " << w.id << " overlaps vehicle " << leader.id << " at t=" << next.time;
                    throw CollisionFault(os.str());
                }
            }
            moved.push_back(w);
        }
        for (auto &w : moved) {
            if (w.pos > stop_line) {
                w.zone_remaining = params.zone_clearance;
                if (w.zone_remaining <= 0) {
                    ++next.exited;
                    next.banked_waiting += w.waiting_time;
                } else {
                    crossed.push_back(w);
                }
            } else {
                next.vehicles.push_back(w);
            }
        }
    }
    next.vehicles.insert(next.vehicles.end(), zone.begin(), zone.end());
    next.vehicles.insert(next.vehicles.end(), crossed.begin(), crossed.end());
    return next;
}

double cumulative_waiting(const TrafficSnapshot &snapshot) {
    double total = snapshot.banked_waiting;
    for (const auto &v : snapshot.vehicles)
        total += v.waiting_time;
    return total;
}

Simulation::Simulation(SimParams params, DemandProfile demand, std::uint64_t seed)
    : params_(params), demand_(demand) {
    demand_.validate();
    for (int a = 0; a < kApproaches; ++a) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(a), 0x5eed0001u};
        streams_[a].seed(seq);
    }
}

std::size_t Simulation::pending_insertions() const {
    std::size_t n = 0;
    for (const auto &q : pending_)
        n += q.size();
    return n;
}

const TrafficSnapshot &Simulation::step(const SignalOutput &signal) {
    double arrival_time = snapshot_.time;
    TrafficSnapshot next = advance_vehicles(snapshot_, signal, params_);

    for (int a = 0; a < kApproaches; ++a) {
        auto arrivals = spawn_arrivals(streams_[a], demand_.approaches[a], static_cast<Approach>(a),
                                       arrival_time, params_.idm);
        for (auto &v : arrivals)
            pending_[v.lane.flat()].push_back(v);
    }

    // Rebuild lane grouping with inserted vehicles appended at the back of their lane.
    std::vector<Vehicle> ordered;
    ordered.reserve(next.vehicles.size() + kLanes);
    std::size_t cursor = 0;
    for (int lane = 0; lane < kLanes; ++lane) {
        std::optional<double> rear_edge;
        while (cursor < next.vehicles.size() && !next.vehicles[cursor].in_zone() &&
               next.vehicles[cursor].lane.flat() == lane) {
            const Vehicle &v = next.vehicles[cursor++];
            rear_edge = v.pos - v.length;
            ordered.push_back(v);
        }
        auto &queue = pending_[lane];
        if (queue.empty())
            continue;
        if (rear_edge && *rear_edge < params_.idm.s0)
            continue;
        Vehicle v = queue.front();
        queue.pop_front();
        v.id = next_id_++;
        v.spawn_time = next.time;
        ordered.push_back(v);
        ++next.entered;
    }
    ordered.insert(ordered.end(), next.vehicles.begin() + static_cast<std::ptrdiff_t>(cursor), next.vehicles.end());
    next.vehicles = std::move(ordered);
    snapshot_ = std::move(next);
    return snapshot_;
}

} // namespace atsc
