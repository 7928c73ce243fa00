#include "doctest.h"

#include "atsc/errors.hpp"
#include "atsc/sim.hpp"

#include <cmath>
#include <map>
#include <random>

using namespace atsc;

namespace {

SignalOutput all(LightColor c) {
    SignalOutput s;
    s.fill(c);
    return s;
}

Vehicle make_vehicle(std::int64_t id, LaneId lane, double pos, double speed, Movement m = Movement::Through) {
    Vehicle v;
    v.id = id;
    v.lane = lane;
    v.movement = m;
    v.pos = pos;
    v.speed = speed;
    return v;
}

// Independent fine-step IDM against a standing obstacle at `wall` (bumper position).
struct FineOracle {
    double pos, speed;
    IdmParams p;

    void advance(double seconds, double wall) {
        const double h = 0.01;
        int n = static_cast<int>(std::lround(seconds / h));
        for (int k = 0; k < n; ++k) {
            double gap = wall - pos;
            double s_star = p.s0 + std::max(0.0, speed * p.T + speed * speed / (2.0 * std::sqrt(p.a_max * p.b)));
            double acc = p.a_max * (1.0 - std::pow(speed / p.v0, 4) - (s_star / gap) * (s_star / gap));
            double v1 = std::max(0.0, speed + acc * h);
            pos += 0.5 * (speed + v1) * h;
            speed = v1;
        }
    }
};

} // namespace

TEST_CASE("destination legs follow right-hand traffic") {
    CHECK(destination(Approach::N, Movement::Through) == Approach::S);
    CHECK(destination(Approach::N, Movement::Left) == Approach::E);
    CHECK(destination(Approach::N, Movement::Right) == Approach::W);
    CHECK(destination(Approach::W, Movement::Right) == Approach::S);
}

TEST_CASE("spawn_arrivals") {
    IdmParams idm;
    SUBCASE("zero rate never spawns") {
        std::mt19937_64 rng(3);
        ApproachDemand d{0.0, {}};
        for (int t = 0; t < 3600; ++t)
            CHECK(spawn_arrivals(rng, d, Approach::N, t, idm).empty());
    }
    SUBCASE("600 veh/h over an hour lands within 3 sigma") {
        std::mt19937_64 rng(2024);
        ApproachDemand d{600.0, {}};
        int total = 0;
        for (int t = 0; t < 3600; ++t)
            total += static_cast<int>(spawn_arrivals(rng, d, Approach::E, t, idm).size());
        CHECK(std::abs(total - 600) <= 3.0 * std::sqrt(600.0));
    }
    SUBCASE("degenerate split sends everything left on lane 0") {
        std::mt19937_64 rng(5);
        ApproachDemand d{1800.0, {1.0, 0.0, 0.0}};
        int seen = 0;
        for (int t = 0; t < 600; ++t) {
            for (const auto &v : spawn_arrivals(rng, d, Approach::S, t, idm)) {
                CHECK(v.movement == Movement::Left);
                CHECK(v.lane.index == 0);
                ++seen;
            }
        }
        CHECK(seen > 0);
    }
    SUBCASE("lane routing matches movement") {
        std::mt19937_64 rng(9);
        ApproachDemand d{3000.0, {}};
        for (int t = 0; t < 600; ++t) {
            for (const auto &v : spawn_arrivals(rng, d, Approach::W, t, idm)) {
                if (v.lane.index == 0)
                    CHECK(v.movement == Movement::Left);
                else if (v.lane.index == 1)
                    CHECK(v.movement == Movement::Through);
                else
                    CHECK(v.movement != Movement::Left);
            }
        }
    }
}

TEST_CASE("lane_flows balances the two through lanes") {
    auto flows = lane_flows(DemandProfile::asymmetric_default());
    int w = static_cast<int>(Approach::W) * kLanesPerApproach;
    CHECK(flows[w + 0] == doctest::Approx(140.0));
    CHECK(flows[w + 1] == doctest::Approx(280.0));
    CHECK(flows[w + 2] == doctest::Approx(280.0));
}

TEST_CASE("idm_acceleration") {
    IdmParams p;
    CHECK(idm_acceleration(p.v0, std::nullopt, p) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(idm_acceleration(0.0, std::nullopt, p) == p.a_max);
    CHECK(idm_acceleration(0.0, LeaderView{p.s0, 0.0}, p) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(idm_acceleration(5.0, LeaderView{0.0, 0.0}, p), CollisionFault);
    CHECK(std::isinf(idm_acceleration(5.0, LeaderView{-1.0, 0.0}, p, false)));
}

TEST_CASE("advance_vehicles") {
    SimParams sp;
    SUBCASE("empty snapshot only advances time") {
        TrafficSnapshot s;
        auto n = advance_vehicles(s, all(LightColor::Green), sp);
        CHECK(n.vehicles.empty());
        CHECK(n.time == 1.0);
    }
    SUBCASE("free-flow equilibrium on green") {
        TrafficSnapshot s;
        s.vehicles.push_back(make_vehicle(0, {Approach::N, 1}, 100.0, sp.idm.v0));
        auto n = advance_vehicles(s, all(LightColor::Green), sp);
        REQUIRE(n.vehicles.size() == 1);
        CHECK(n.vehicles[0].pos == doctest::Approx(100.0 + sp.idm.v0).epsilon(1e-12));
    }
    SUBCASE("approach to red stops at the line and tracks a fine-step oracle") {
        TrafficSnapshot s;
        s.vehicles.push_back(make_vehicle(0, {Approach::W, 1}, sp.lane_length - 100.0, 14.0));
        s.entered = 1;
        FineOracle oracle{sp.lane_length - 100.0, 14.0, sp.idm};
        bool rested = false;
        for (int k = 1; k <= 30; ++k) {
            s = advance_vehicles(s, all(LightColor::Red), sp);
            REQUIRE(s.vehicles.size() == 1);
            oracle.advance(1.0, sp.lane_length + sp.idm.s0);
            const Vehicle &v = s.vehicles[0];
            CHECK(v.pos <= sp.lane_length);
            // 1 s explicit steps lag the continuous trajectory by up to about a*dt^2/2 while braking.
            CHECK(std::abs(v.pos - oracle.pos) < 3.0);
            if (v.speed < kStopSpeed)
                rested = true;
        }
        CHECK(rested);
        CHECK(s.vehicles[0].pos >= sp.lane_length - 0.5);
        CHECK(std::abs(s.vehicles[0].pos - oracle.pos) < 0.5);
    }
    SUBCASE("waiting accrues while stopped") {
        TrafficSnapshot s;
        s.vehicles.push_back(make_vehicle(0, {Approach::N, 1}, sp.lane_length, 0.0));
        for (int k = 0; k < 5; ++k)
            s = advance_vehicles(s, all(LightColor::Red), sp);
        CHECK(cumulative_waiting(s) == 5.0);
    }
    SUBCASE("crossing vehicles clear the zone and bank their waiting") {
        TrafficSnapshot s;
        Vehicle v = make_vehicle(0, {Approach::E, 1}, sp.lane_length - 1.0, 5.0);
        v.waiting_time = 7.0;
        s.vehicles.push_back(v);
        s.entered = 1;
        s = advance_vehicles(s, all(LightColor::Green), sp);
        REQUIRE(s.vehicles.size() == 1);
        CHECK(s.vehicles[0].in_zone());
        for (int k = 0; k < sp.zone_clearance; ++k)
            s = advance_vehicles(s, all(LightColor::Green), sp);
        CHECK(s.vehicles.empty());
        CHECK(s.exited == 1);
        CHECK(s.banked_waiting == 7.0);
    }
}

TEST_CASE("cumulative_waiting sums banked and present") {
    TrafficSnapshot s;
    s.banked_waiting = 2.0 + 3.0 + 4.0;
    CHECK(cumulative_waiting(s) == 9.0);
    CHECK(cumulative_waiting(TrafficSnapshot{}) == 0.0);
}

TEST_CASE("right turn on red yields to green traffic bound for the same leg") {
    SimParams sp;
    SignalOutput sig = all(LightColor::Red);
    // E right and S through both leave by the N leg.
    TrafficSnapshot s;
    Vehicle turner = make_vehicle(1, {Approach::E, 2}, sp.lane_length - 1.0, 0.0, Movement::Right);
    s.vehicles.push_back(turner);
    CHECK(right_turn_permitted(s, sig, turner, sp));

    sig[LaneId{Approach::S, 1}.flat()] = LightColor::Green;
    Vehicle near = make_vehicle(2, {Approach::S, 1}, sp.lane_length - 20.0, 13.9);
    s.vehicles.push_back(near);
    CHECK_FALSE(right_turn_permitted(s, sig, turner, sp));

    s.vehicles.back().pos = 100.0;
    CHECK(right_turn_permitted(s, sig, turner, sp));

    Vehicle through = make_vehicle(3, {Approach::E, 2}, sp.lane_length - 1.0, 0.0, Movement::Through);
    CHECK_FALSE(right_turn_permitted(s, sig, through, sp));
}

TEST_CASE("Simulation invariants over a long seeded run") {
    SimParams sp;
    Simulation sim(sp, DemandProfile::asymmetric_default().scaled(1.3), 77);
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> pick(0, 3);
    SignalOutput sig = all(LightColor::Red);
    std::map<std::int64_t, double> last_wait;
    for (int t = 0; t < 4000; ++t) {
        if (t % 20 == 0) {
            sig = all(LightColor::Red);
            int a = pick(rng);
            for (int i = 0; i < kLanesPerApproach; ++i)
                sig[a * kLanesPerApproach + i] = LightColor::Green;
        }
        const auto &s = sim.step(sig);
        REQUIRE(s.entered == s.exited + static_cast<std::int64_t>(s.vehicles.size()));
        for (int lane = 0; lane < kLanes; ++lane) {
            auto vs = lane_vehicles(s, lane);
            for (std::size_t i = 0; i < vs.size(); ++i) {
                REQUIRE(vs[i]->pos <= sp.lane_length);
                REQUIRE(vs[i]->speed >= 0.0);
                if (i > 0)
                    REQUIRE(vs[i]->pos < vs[i - 1]->pos - vs[i - 1]->length);
            }
        }
        for (const auto &v : s.vehicles) {
            auto it = last_wait.find(v.id);
            if (it != last_wait.end())
                REQUIRE(v.waiting_time >= it->second);
            last_wait[v.id] = v.waiting_time;
        }
    }
}

TEST_CASE("Simulation is deterministic per seed") {
    auto run = [](std::uint64_t seed) {
        Simulation sim(SimParams{}, DemandProfile::asymmetric_default(), seed);
        SignalOutput sig = all(LightColor::Green);
        std::vector<double> trace;
        for (int t = 0; t < 600; ++t) {
            for (const auto &v : sim.step(sig).vehicles) {
                trace.push_back(v.pos);
                trace.push_back(v.speed);
            }
        }
        return trace;
    };
    CHECK(run(11) == run(11));
    CHECK(run(11) != run(12));
}

TEST_CASE("demand validation") {
    DemandProfile d = DemandProfile::asymmetric_default();
    d[Approach::N].rate_vph = -1.0;
    CHECK_THROWS_AS(d.validate(), ConfigError);
    d = DemandProfile::asymmetric_default();
    d[Approach::E].split = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(d.validate(), ConfigError);
}
