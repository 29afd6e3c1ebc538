#pragma once

#include <string>
#include <vector>

namespace evnet {

// One charging station: S grid slots, R storage units, service and recharge
// rates, QoS band, prices, and the pricing tuning parameter theta.
struct StationConfig {
    int grid_slots = 0;                  // S
    int storage_units = 0;               // R
    double charge_rate = 1.0;            // mu, per-EV completion rate
    double storage_recharge_rate = 1.0;  // nu, storage-unit recharge rate
    double qos_max = 0.05;               // delta_max
    double qos_min = 1e-4;               // delta_min
    double price_normal = 4.0;
    double price_block_penalty = 5.0;    // p_B
    double theta = 0.5;
    double x = 0.0;
    double y = 0.0;
};

// Throws std::invalid_argument on hard violations; returns human-readable
// warnings for permitted-but-suspicious configurations.
std::vector<std::string> validate_station(const StationConfig& cfg);

} // namespace evnet
