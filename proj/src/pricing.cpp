#include "evnet/pricing.hpp"

#include <cmath>
#include <stdexcept>

namespace evnet {

double effective_rate(const ArrivalStreams& streams) {
    if (streams.lambda_ev < 0 || streams.lambda_bl < 0 || streams.lambda_rb < 0)
        throw std::invalid_argument("stream rates must be >= 0");
    return streams.lambda_ev + streams.lambda_bl + streams.lambda_rb;
}

double acceptance_fraction(double lambda_tilde, double lambda_star) {
    if (!(lambda_star > 0)) throw std::invalid_argument("lambda_star must be > 0");
    if (lambda_tilde < 0) throw std::invalid_argument("lambda_tilde must be >= 0");
    if (lambda_tilde <= lambda_star) return 1.0;
    return lambda_star / lambda_tilde;
}

PriceSignal price(double lambda_tilde, double lambda_star, double price_normal,
                  double theta) {
    if (!(lambda_star > 0)) throw std::invalid_argument("lambda_star must be > 0");
    if (theta < 0) throw std::invalid_argument("theta must be >= 0");
    if (lambda_tilde < 0) throw std::invalid_argument("lambda_tilde must be >= 0");

    PriceSignal sig;
    sig.effective_rate = lambda_tilde;
    sig.congested = lambda_tilde > lambda_star;
    if (!sig.congested) {
        sig.price = price_normal;
    } else {
        const double surcharge = std::sqrt(-std::log(lambda_star / lambda_tilde));
        sig.price = price_normal * (1.0 + theta * surcharge);
    }
    return sig;
}

std::pair<double, double> retry_streams(double blocked_local_rate,
                                        double blocked_routed_rate,
                                        double retry_fraction) {
    if (blocked_local_rate < 0 || blocked_routed_rate < 0)
        throw std::invalid_argument("blocked rates must be >= 0");
    if (retry_fraction < 0 || retry_fraction > 1)
        throw std::invalid_argument("retry_fraction must be in [0,1]");
    return {retry_fraction * blocked_local_rate, retry_fraction * blocked_routed_rate};
}

} // namespace evnet
