#pragma once

#include <string>

#include "evnet/scenario.hpp"
#include "evnet/sim.hpp"

namespace evnet {

// One CSV row per (replication, window, station); leading schema comment line.
std::string windows_csv(const SimMetrics& metrics);

// Run-level aggregates: mean and sample standard deviation across replications.
std::string summary_json(const Scenario& scenario, const SimMetrics& metrics);
std::string summary_csv(const Scenario& scenario, const SimMetrics& metrics);

} // namespace evnet
