#include "evnet/game.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evnet {

std::vector<double> ev_utility(const EvCustomer& customer,
                               const std::vector<double>& blocking,
                               const std::vector<double>& prices,
                               const std::vector<double>& distances,
                               double qos_target) {
    const std::size_t n = blocking.size();
    if (prices.size() != n || distances.size() != n || n == 0)
        throw std::invalid_argument("utility inputs must share a common nonzero length");
    for (double d : distances)
        if (d < 0) throw std::invalid_argument("distances must be >= 0");

    const double d_nearest = *std::min_element(distances.begin(), distances.end());
    std::vector<double> utility(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double h = std::exp(customer.urgency * (blocking[i] - qos_target));
        utility[i] = h * (prices[i] + customer.drive_cost_rate * distances[i] * distances[i] +
                          customer.dissatisfaction_rate * (distances[i] - d_nearest));
    }
    return utility;
}

int ev_choose(const EvCustomer& customer, const std::vector<double>& utilities,
              int nearest, double cost_nearest, double cost_candidate,
              double blocking_at_candidate, double qos_max_candidate) {
    if (utilities.empty()) throw std::invalid_argument("empty utility vector");
    int candidate = 0;
    for (int i = 1; i < static_cast<int>(utilities.size()); ++i)
        if (utilities[i] < utilities[candidate]) candidate = i;
    if (candidate == nearest) return nearest;
    const double savings = cost_nearest - cost_candidate;
    if (savings >= customer.incentive_threshold &&
        blocking_at_candidate <= qos_max_candidate)
        return candidate;
    return nearest;
}

double leader_payoff(const GameOutcome& outcome, const std::vector<double>& prices,
                     double price_block_penalty) {
    double payoff = 0.0;
    for (std::size_t i = 0; i < outcome.choices.size(); ++i) {
        const int station = outcome.choices[i];
        if (outcome.served[i]) payoff += prices[station];
        if (outcome.blocked[i]) payoff -= price_block_penalty;
    }
    return payoff;
}

} // namespace evnet
