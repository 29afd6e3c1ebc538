#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evnet/scenario.hpp"

namespace evnet {

enum class EventKind : int {
    departure = 0,
    storage_recharge = 1,
    rate_window_tick = 2,
    arrival = 3,
    retry = 4,
};

// One row per (replication, window, station). Counter semantics:
//   entries_*   presentations at the local pricing block (new, local retries,
//               routed-customer retries)
//   routed_in   first presentation of customers routed here (bypasses pricing)
//   routed_out  new customers whose nearest station is here but who left
//   attempts_*  admission attempts after price acceptance, by customer class
//   balked      price rejections (left the system, no penalty)
// Conservation: entries + routed_in == served + blocked + balked per row.
struct WindowRow {
    int rep = 0;
    int window = 0;
    int station = 0;
    long long entries_new = 0;
    long long entries_retry_local = 0;
    long long entries_retry_routed = 0;
    long long routed_in = 0;
    long long routed_out = 0;
    long long attempts_local = 0;
    long long attempts_routed = 0;
    long long blocked_local = 0;
    long long blocked_routed = 0;
    long long served = 0;
    long long balked = 0;
    double revenue = 0.0;
    double price = 0.0;       // price in effect during the window
    double lambda_est = 0.0;  // pricing-block rate estimate in effect
    bool congested = false;
    int occupancy_end = 0;
    int storage_end = 0;
};

struct RepMetrics {
    int rep = 0;
    std::vector<WindowRow> rows;  // window-major, station-minor
    long long arrivals = 0;       // customers entering the system
    long long served = 0;
    long long blocked = 0;  // blocking events (a retrying customer can block twice)
    long long balked = 0;
    long long routed = 0;
    double revenue = 0.0;
    std::vector<std::vector<long long>> routed_matrix;  // from -> to counts
    // Occupancy diagnostics, filled only when SimOptions::collect_occupancy:
    std::vector<std::vector<double>> time_in_state;    // station -> occupancy -> time
    std::vector<std::vector<long long>> arrival_seen;  // station -> occupancy at attempt
};

struct SimMetrics {
    int n_stations = 0;
    int n_windows = 0;
    double window = 0.0;
    Tier tier = Tier::baseline;
    std::vector<int> grid_slots;      // effective slots after tier allocation
    std::vector<double> lambda_star;  // per-station admissible-rate thresholds
    std::vector<RepMetrics> reps;
};

struct SimOptions {
    bool collect_occupancy = false;
};

// Station configurations after tier-dependent slot allocation: baseline keeps
// the scenario slots; the other tiers re-run the two-phase allocation against
// per-station peak rates.
std::vector<StationConfig> effective_stations(const Scenario& scenario);

SimMetrics run_simulation(const Scenario& scenario, const SimOptions& options = {});

// Pooled (across replications) blocked/attempted fraction in a window; absent
// when the window saw no attempts.
std::optional<double> network_weighted_blocking(const SimMetrics& metrics, int window);
std::optional<double> network_weighted_blocking_range(const SimMetrics& metrics,
                                                      int window_lo, int window_hi);

// Pooled per-station measures over windows [window_lo, window_hi).
double measured_blocking(const SimMetrics& metrics, int station, int window_lo,
                         int window_hi);
double measured_pbt(const SimMetrics& metrics, double gamma1, double gamma2,
                    int station, int window_lo, int window_hi);
long long total_served(const SimMetrics& metrics, int window_lo, int window_hi);
double total_revenue(const SimMetrics& metrics, int window_lo, int window_hi);
// Fraction of replications whose congestion flag was set in a window.
double congested_fraction(const SimMetrics& metrics, int station, int window);

struct TierComparison {
    std::vector<Tier> tiers;
    int n_hours = 0;
    // [tier][hour]
    std::vector<std::vector<long long>> served;
    std::vector<std::vector<double>> revenue;
    std::vector<std::vector<std::optional<double>>> weighted_blocking;
    // full-control vs baseline, per hour; absent when baseline served nothing
    std::vector<std::optional<double>> served_increase_pct;
};

TierComparison compare_tiers(const Scenario& scenario, std::uint64_t seed);

} // namespace evnet
