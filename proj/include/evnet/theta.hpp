#pragma once

#include <string>
#include <vector>

#include "evnet/scenario.hpp"

namespace evnet {

struct ThetaSweepRow {
    double theta = 0.0;
    std::vector<double> pbt;  // per-station measured weighted blocking
    double payoff = 0.0;      // network revenue over the evaluation span
};

struct ThetaSweepResult {
    std::vector<int> tuned_stations;  // stations whose theta was swept
    std::vector<ThetaSweepRow> rows;  // one per grid point, ascending theta
    std::vector<double> best_theta;   // full per-station assignment
    double comparison_time = 0.0;     // profile time the sweep rate was read at
    double comparison_rate = 0.0;
};

// Sweeps a common theta over the stations whose peak offered rate exceeds
// their admissible threshold, simulating each grid point at a constant rate
// with common random numbers. mode "payoff" keeps the grid point maximizing
// leader payoff; mode "blocking" keeps the lowest total blocking whose payoff
// does not fall below the first grid point's.
ThetaSweepResult tune_theta(const Scenario& scenario, const std::vector<double>& grid,
                            const std::string& mode = "payoff");

} // namespace evnet
