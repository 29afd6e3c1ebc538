#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "evnet/allocation.hpp"
#include "evnet/demand.hpp"
#include "evnet/station.hpp"

namespace evnet {

enum class Tier { baseline, allocation, full };

std::string tier_to_string(Tier tier);
Tier tier_from_string(const std::string& s);

class ScenarioError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct Scenario {
    std::string name;
    std::vector<StationConfig> stations;

    int s_max = 0;
    int s_limit = 0;
    bool has_distances = false;
    Eigen::MatrixXd distances;  // optional override; otherwise derived from coordinates

    SpatialDemand spatial;
    DemandProfile profile;
    std::vector<double> shares;  // empty: shares follow from nearest-station geometry

    double gamma1 = 0.45;
    double gamma2 = 0.55;
    double xi = 0.1;
    double incentive_lo = 0.75;
    double incentive_hi = 1.0;
    double dissatisfaction_lo = 0.02;
    double dissatisfaction_hi = 0.05;
    double drive_cost_rate = 0.03;
    double retry_fraction = 1.0 / 3.0;
    double retry_mean_delay = 0.25;
    std::string blocking_estimator = "analytic";  // or "empirical"

    std::uint64_t seed = 1;
    double horizon = 24.0;
    int replications = 1;
    double window = 0.25;
    int estimator_windows = 4;
    Tier tier = Tier::baseline;

    bool operator==(const Scenario& other) const;
};

void validate_scenario(const Scenario& scenario);

NetworkTopology scenario_topology(const Scenario& scenario);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);

Scenario make_paper_network();
Scenario make_paper_single_sine();
Scenario make_erlang_check();

} // namespace evnet
