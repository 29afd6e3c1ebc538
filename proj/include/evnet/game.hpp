#pragma once

#include <vector>

namespace evnet {

struct EvCustomer {
    double x = 0.0;
    double y = 0.0;
    double incentive_threshold = 0.0;   // minimum savings to accept rerouting
    double dissatisfaction_rate = 0.0;  // money per unit extra distance
    double drive_cost_rate = 0.0;       // money per squared distance driven
    double urgency = 0.0;               // blocking-aversion exponent; 0 when nearest is uncongested
    int decision = -1;
};

struct GameOutcome {
    std::vector<int> choices;        // station index per customer
    std::vector<char> served;        // q
    std::vector<char> blocked;       // q_B
    double revenue = 0.0;
    std::vector<long long> served_by_station;
    std::vector<long long> blocked_by_station;
};

// Per-station cost as seen by one customer:
//   h(B_n) * [ p_n + p_drive * d_n^2 + p_dis * (d_n - d_nearest) ]
// with h(x) = exp(urgency * (x - qos_target)).
std::vector<double> ev_utility(const EvCustomer& customer,
                               const std::vector<double>& blocking,
                               const std::vector<double>& prices,
                               const std::vector<double>& distances,
                               double qos_target);

// Picks argmin utility (lowest index on ties). A candidate other than the
// nearest station is accepted only when the money savings meet the customer's
// incentive threshold and the candidate's blocking estimate respects its QoS
// cap; otherwise the customer stays with the nearest station.
int ev_choose(const EvCustomer& customer, const std::vector<double>& utilities,
              int nearest, double cost_nearest, double cost_candidate,
              double blocking_at_candidate, double qos_max_candidate);

double leader_payoff(const GameOutcome& outcome, const std::vector<double>& prices,
                     double price_block_penalty);

} // namespace evnet
