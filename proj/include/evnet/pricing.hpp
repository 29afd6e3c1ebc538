#pragma once

#include <utility>

namespace evnet {

// Demand streams entering one station's pricing block (rates): nearest-station
// requests, retrying blocked locals, retrying blocked routed customers, plus
// the routed-in / acceptor / admitted rates observed downstream.
struct ArrivalStreams {
    double lambda_ev = 0.0;
    double lambda_bl = 0.0;
    double lambda_rb = 0.0;
    double lambda_r = 0.0;
    double lambda_ac = 0.0;
    double lambda_ad = 0.0;
};

struct PriceSignal {
    int station_index = 0;
    double price = 0.0;
    bool congested = false;
    double effective_rate = 0.0;
};

// lambda_ev + lambda_bl + lambda_rb.
double effective_rate(const ArrivalStreams& streams);

// 1 when the station is uncongested, else lambda_star / lambda_tilde.
double acceptance_fraction(double lambda_tilde, double lambda_star);

// p_normal below lambda_star; p_normal * (1 + theta * sqrt(-ln(lambda_star /
// lambda_tilde))) above it.
PriceSignal price(double lambda_tilde, double lambda_star, double price_normal,
                  double theta);

// (lambda_BL, lambda_RB) = retry_fraction * blocked rates.
std::pair<double, double> retry_streams(double blocked_local_rate,
                                        double blocked_routed_rate,
                                        double retry_fraction);

} // namespace evnet
