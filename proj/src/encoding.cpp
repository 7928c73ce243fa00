#include "atsc/encoding.hpp"

#include "atsc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace atsc {

int CellGrid::cell_of(double distance) const {
    if (distance < 0.0 || upper_edges.empty() || distance >= upper_edges.back())
        return -1;
    auto it = std::upper_bound(upper_edges.begin(), upper_edges.end(), distance);
    return static_cast<int>(it - upper_edges.begin());
}

CellGrid build_grid(int cells_per_lane, double coverage, double growth, double first_cell) {
    if (cells_per_lane < 1)
        throw ConfigError("grid.cells_per_lane: must be >= 1");
    if (!(coverage > 0.0))
        throw ConfigError("grid.coverage: must be > 0");
    if (!(growth > 0.0))
        throw ConfigError("grid.growth: must be > 0");
    if (!(first_cell > 0.0))
        throw ConfigError("grid.first_cell: must be > 0");

    std::vector<double> widths(cells_per_lane);
    double w = first_cell;
    double sum = 0.0;
    for (auto &x : widths) {
        x = w;
        sum += w;
        w *= growth;
    }
    CellGrid grid;
    grid.upper_edges.resize(cells_per_lane);
    double edge = 0.0;
    for (int k = 0; k < cells_per_lane; ++k) {
        edge += widths[k] * coverage / sum;
        grid.upper_edges[k] = edge;
    }
    grid.upper_edges.back() = coverage;
    return grid;
}

CellGrid build_grid(const GridParams &p) { return build_grid(p.cells_per_lane, p.coverage, p.growth, p.first_cell); }

std::size_t encoding_length(const CellGrid &grid) {
    return static_cast<std::size_t>(kLanes * grid.cells()) + kPhases + 2;
}

EncodedState encode(const TrafficSnapshot &snapshot, const PhaseMachine &machine, const CellGrid &grid,
                    double lane_length, const GridParams &params) {
    EncodedState out;
    out.values.assign(encoding_length(grid), 0.0);
    const int cells = grid.cells();
    for (const auto &v : snapshot.vehicles) {
        if (v.in_zone())
            continue;
        int cell = grid.cell_of(lane_length - v.pos);
        if (cell >= 0)
            out.values[static_cast<std::size_t>(v.lane.flat() * cells + cell)] = 1.0;
    }
    if (params.include_phase) {
        std::size_t base = static_cast<std::size_t>(kLanes * cells);
        out.values[base + static_cast<std::size_t>(machine.active)] = 1.0;
        double elapsed = params.max_considered_green > 0.0 ? machine.elapsed_green / params.max_considered_green : 0.0;
        out.values[base + kPhases] = std::clamp(elapsed, 0.0, 1.0);
        out.values[base + kPhases + 1] = machine.in_yellow ? 1.0 : 0.0;
    }
    return out;
}

} // namespace atsc
