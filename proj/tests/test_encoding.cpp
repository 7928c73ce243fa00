#include "doctest.h"

#include "atsc/encoding.hpp"
#include "atsc/errors.hpp"

#include <cmath>
#include <random>

using namespace atsc;

namespace {

Vehicle at(LaneId lane, double pos) {
    Vehicle v;
    v.lane = lane;
    v.pos = pos;
    return v;
}

constexpr double kLane = 500.0;

} // namespace

TEST_CASE("build_grid") {
    SUBCASE("single cell spans the coverage") {
        CellGrid g = build_grid(1, 200.0);
        REQUIRE(g.cells() == 1);
        CHECK(g.upper_edges[0] == 200.0);
        CHECK(g.cell_of(0.0) == 0);
        CHECK(g.cell_of(199.9) == 0);
        CHECK(g.cell_of(200.0) == -1);
    }
    SUBCASE("unit growth is uniform") {
        CellGrid g = build_grid(8, 200.0, 1.0, 3.0);
        for (int k = 0; k < 8; ++k)
            CHECK(g.width(k) == doctest::Approx(25.0).epsilon(1e-12));
    }
    SUBCASE("defaults follow the rescaled geometric series") {
        CellGrid g = build_grid();
        REQUIRE(g.cells() == 10);
        double series = 7.0 * (std::pow(1.35, 10) - 1.0) / 0.35;
        double scale = 200.0 / series;
        for (int k = 0; k < 10; ++k) {
            CHECK(g.width(k) == doctest::Approx(7.0 * std::pow(1.35, k) * scale).epsilon(1e-9));
            if (k > 0)
                CHECK(g.width(k) > g.width(k - 1));
        }
        CHECK(g.upper_edges.front() > 0.0);
        CHECK(g.coverage() == 200.0);
    }
    CHECK_THROWS_AS(build_grid(0), ConfigError);
    CHECK_THROWS_AS(build_grid(10, -5.0), ConfigError);
}

TEST_CASE("encode") {
    CellGrid g = build_grid();
    PhaseMachine m;
    const std::size_t base = static_cast<std::size_t>(kLanes * g.cells());

    SUBCASE("empty intersection") {
        auto s = encode(TrafficSnapshot{}, m, g, kLane);
        REQUIRE(s.size() == 12 * 10 + 6);
        for (std::size_t i = 0; i < base; ++i)
            CHECK(s.values[i] == 0.0);
        CHECK(s.values[base + 0] == 1.0);
        CHECK(s.values[base + 1] == 0.0);
        CHECK(s.values[base + 2] == 0.0);
        CHECK(s.values[base + 3] == 0.0);
        CHECK(s.values[base + 4] == 0.0);
        CHECK(s.values[base + 5] == 0.0);
    }
    SUBCASE("vehicle near the line sets only its lane's first cell") {
        TrafficSnapshot snap;
        LaneId lane{Approach::S, 2};
        snap.vehicles.push_back(at(lane, kLane - 3.0));
        auto s = encode(snap, m, g, kLane);
        for (std::size_t i = 0; i < base; ++i)
            CHECK(s.values[i] == (i == static_cast<std::size_t>(lane.flat() * g.cells()) ? 1.0 : 0.0));
    }
    SUBCASE("presence, not count") {
        TrafficSnapshot snap;
        LaneId lane{Approach::W, 1};
        snap.vehicles.push_back(at(lane, kLane - 1.0));
        snap.vehicles.push_back(at(lane, kLane - 2.0));
        auto s = encode(snap, m, g, kLane);
        CHECK(s.values[static_cast<std::size_t>(lane.flat() * g.cells())] == 1.0);
    }
    SUBCASE("phase context and ablation") {
        PhaseMachine n;
        n.active = Phase::NSLG;
        n.elapsed_green = 30;
        auto s = encode(TrafficSnapshot{}, n, g, kLane);
        CHECK(s.values[base + 3] == 1.0);
        CHECK(s.values[base + 4] == 0.5);
        GridParams off;
        off.include_phase = false;
        auto z = encode(TrafficSnapshot{}, n, g, kLane, off);
        CHECK(z.size() == s.size());
        for (double x : z.values)
            CHECK(x == 0.0);
    }
    SUBCASE("vehicles beyond coverage and in the zone are ignored") {
        TrafficSnapshot snap;
        snap.vehicles.push_back(at({Approach::N, 1}, 100.0));
        Vehicle z = at({Approach::N, 1}, kLane + 2.0);
        z.zone_remaining = 1;
        snap.vehicles.push_back(z);
        auto s = encode(snap, m, g, kLane);
        for (std::size_t i = 0; i < base; ++i)
            CHECK(s.values[i] == 0.0);
    }
}

TEST_CASE("encoding properties") {
    CellGrid g = build_grid();
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> lane(0, kLanes - 1), phase(0, kPhases - 1), elapsed(0, 90);
    std::uniform_real_distribution<double> dist(0.0, 250.0), unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        TrafficSnapshot snap;
        for (int i = 0; i < 30; ++i)
            snap.vehicles.push_back(at(LaneId::from_flat(lane(rng)), kLane - dist(rng)));
        PhaseMachine m;
        m.active = static_cast<Phase>(phase(rng));
        m.elapsed_green = elapsed(rng);
        auto a = encode(snap, m, g, kLane);
        CHECK(a.size() == encoding_length(g));
        CHECK(a == encode(snap, m, g, kLane));
        for (double x : a.values)
            CHECK((x >= 0.0 && x <= 1.0));

        // Move one vehicle within its cell.
        auto &v = snap.vehicles[0];
        int cell = g.cell_of(kLane - v.pos);
        if (cell >= 0) {
            double lo = cell == 0 ? 0.0 : g.upper_edges[cell - 1];
            double hi = g.upper_edges[cell];
            v.pos = kLane - (lo + unit(rng) * (hi - lo) * 0.999);
            CHECK(encode(snap, m, g, kLane) == a);
        }
    }
}
