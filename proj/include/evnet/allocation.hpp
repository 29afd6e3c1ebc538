#pragma once

#include <Eigen/Dense>
#include <vector>

#include "evnet/station.hpp"

namespace evnet {

struct NetworkTopology {
    std::vector<StationConfig> stations;
    Eigen::MatrixXd distances;  // symmetric, zero diagonal
    int s_max = 0;              // total grid-power budget, in EV slots
    int s_limit = 0;            // per-station draw cap, in EV slots
};

// Throws std::invalid_argument on violated topology invariants.
void validate_topology(const NetworkTopology& topology);

// Euclidean distance matrix from station coordinates.
Eigen::MatrixXd distances_from_locations(const std::vector<StationConfig>& stations);

struct Phase2Grant {
    int donor = 0;
    std::vector<int> grants;  // per station, zero for the donor
};

struct AllocationReport {
    std::vector<int> phase1;          // slots after Phase-I
    int excess = 0;                   // s_max - sum(phase1)
    std::vector<int> donor_excess;    // per-station attribution of the excess
    std::vector<Phase2Grant> grants;  // one entry per donor processed
    int undistributed = 0;
    std::vector<int> final_alloc;
    std::vector<double> blocking_before;  // at phase1 slots
    std::vector<double> blocking_after;   // at final slots
    std::vector<int> qos_unmet;  // stations above qos_max while pinned at s_limit
};

// Greedy marginal allocation: repeatedly grant one slot to the station with
// the largest blocking decrease, skipping stations at s_limit or already
// below qos_min, until the budget is spent or no station qualifies.
std::vector<int> phase1_allocate(const NetworkTopology& topology,
                                 const std::vector<double>& arrival_rates);

int compute_excess(const std::vector<int>& slots, int s_max);

// Redistributes each donor's excess to non-donor stations with inverse-square
// -distance weights and largest-remainder integerization; donors processed in
// descending excess; residual beyond recipient headroom reported undistributed.
void phase2_redistribute(const NetworkTopology& topology, std::vector<int>& slots,
                         const std::vector<int>& donor_excess,
                         AllocationReport& report);

// Full pipeline: Phase-I, excess attribution to cap-pinned donors by greedy
// continuation past the cap, Phase-II, blocking tables.
AllocationReport allocate(const NetworkTopology& topology,
                          const std::vector<double>& arrival_rates);

} // namespace evnet
