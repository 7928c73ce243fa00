#pragma once

#include "atsc/signal.hpp"
#include "atsc/sim.hpp"

#include <vector>

namespace atsc {

struct GridParams {
    int cells_per_lane = 10;
    double coverage = 200.0;   // meters upstream of the stop line
    double growth = 1.35;      // width ratio between consecutive cells
    double first_cell = 7.0;   // nominal first width before rescaling
    double max_considered_green = 60.0;
    bool include_phase = true; // false zeroes the phase context (ablation)
};

// Non-uniform cells along every lane, measured upstream from the stop line.
struct CellGrid {
    std::vector<double> upper_edges; // b_1 .. b_n; cell k spans [b_k, b_{k+1}) with b_0 = 0

    int cells() const { return static_cast<int>(upper_edges.size()); }
    double coverage() const { return upper_edges.empty() ? 0.0 : upper_edges.back(); }
    double width(int k) const { return upper_edges[k] - (k == 0 ? 0.0 : upper_edges[k - 1]); }
    // Cell containing a distance upstream of the stop line, or -1 beyond coverage.
    int cell_of(double distance) const;
};

CellGrid build_grid(int cells_per_lane = 10, double coverage = 200.0, double growth = 1.35,
                    double first_cell = 7.0);
CellGrid build_grid(const GridParams &p);

struct EncodedState {
    std::vector<double> values; // occupancy bits, phase one-hot, elapsed, in-yellow

    std::size_t size() const { return values.size(); }
    bool operator==(const EncodedState &) const = default;
};

std::size_t encoding_length(const CellGrid &grid);

EncodedState encode(const TrafficSnapshot &snapshot, const PhaseMachine &machine, const CellGrid &grid,
                    double lane_length, const GridParams &params = {});

} // namespace atsc
