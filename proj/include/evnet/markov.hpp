#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "evnet/station.hpp"

namespace evnet {

// Two-dimensional station chain over states (n, j): n EVs in service,
// j charged storage units available.
struct MarkovModel {
    int grid_slots = 0;
    int storage_units = 0;
    std::vector<std::pair<int, int>> states;
    Eigen::MatrixXd generator;
    Eigen::VectorXd stationary;
    double blocking_prob = 0.0;
    double residual = 0.0;  // ||pi Q||_inf of the accepted solution
};

// States reachable from (0, R), sorted lexicographically by (n, j).
std::vector<std::pair<int, int>> reachable_states(const StationConfig& cfg);

// Builds states and generator only; stationary left empty.
MarkovModel build_generator(const StationConfig& cfg, double arrival_rate);

// Solves pi Q = 0, sum(pi) = 1 by a direct dense solve; fills stationary,
// residual, and blocking_prob.
void stationary_distribution(MarkovModel& model);

double blocking_probability(const StationConfig& cfg, double arrival_rate);

double weighted_blocking(double b_ev, double b_rb, double gamma1, double gamma2);

// Largest lambda with blocking <= qos_max, bisection to 1e-3. When qos_max
// never binds the search cap (S+R)*mu*2^20 is returned.
double max_admissible_rate(const StationConfig& cfg);

double admissible_rate_cap(const StationConfig& cfg);

// Memoizing wrapper around blocking_probability for one station config;
// arrival rates are quantized to 1e-3 (well under estimator noise).
class BlockingCache {
  public:
    explicit BlockingCache(StationConfig cfg) : cfg_(std::move(cfg)) {}
    double at(double arrival_rate);
    const StationConfig& config() const { return cfg_; }

  private:
    StationConfig cfg_;
    std::unordered_map<std::int64_t, double> memo_;
};

} // namespace evnet
