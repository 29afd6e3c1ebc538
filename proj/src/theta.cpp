#include "evnet/theta.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evnet/markov.hpp"
#include "evnet/sim.hpp"

namespace evnet {

ThetaSweepResult tune_theta(const Scenario& scenario, const std::vector<double>& grid,
                            const std::string& mode) {
    validate_scenario(scenario);
    if (grid.empty()) throw std::invalid_argument("theta grid must not be empty");
    if (mode != "payoff" && mode != "blocking")
        throw std::invalid_argument("tune_theta mode must be payoff|blocking");
    for (double t : grid)
        if (t < 0) throw std::invalid_argument("theta grid values must be >= 0");

    std::vector<double> thetas = grid;
    std::sort(thetas.begin(), thetas.end());
    thetas.erase(std::unique(thetas.begin(), thetas.end()), thetas.end());

    ThetaSweepResult result;

    // Comparison point: the profile's peak, sampled at window starts.
    const int n_windows = static_cast<int>(std::llround(scenario.horizon / scenario.window));
    result.comparison_time = 0.0;
    result.comparison_rate = rate_at(scenario.profile, 0.0);
    for (int w = 1; w < n_windows; ++w) {
        const double t = w * scenario.window;
        const double r = rate_at(scenario.profile, t);
        if (r > result.comparison_rate) {
            result.comparison_rate = r;
            result.comparison_time = t;
        }
    }

    // Congested set under the tier's effective slots at the comparison rate.
    Scenario base = scenario;
    base.tier = Tier::full;
    const auto effective = effective_stations(base);
    std::vector<double> shares = base.shares;
    if (shares.empty()) {
        shares.assign(base.stations.size(),
                      1.0 / static_cast<double>(base.stations.size()));
    }
    for (std::size_t i = 0; i < effective.size(); ++i) {
        double lambda_star = 0.0;
        try {
            lambda_star = max_admissible_rate(effective[i]);
        } catch (const std::runtime_error&) {
            lambda_star = 0.0;
        }
        if (shares[i] * result.comparison_rate > lambda_star)
            result.tuned_stations.push_back(static_cast<int>(i));
    }

    // Constant-rate evaluation scenario: 8 warmup windows, 16 measured.
    Scenario eval = base;
    eval.profile.kind = ProfileKind::constant;
    eval.profile.base = result.comparison_rate;
    eval.profile.amplitude = 0.0;
    eval.profile.hourly.clear();
    const int warmup_windows = 8;
    const int measure_windows = 16;
    eval.horizon = (warmup_windows + measure_windows) * eval.window;
    eval.replications = std::min(scenario.replications, 10);

    for (double theta : thetas) {
        Scenario run = eval;
        for (int s : result.tuned_stations) run.stations[s].theta = theta;
        const SimMetrics metrics = run_simulation(run);
        ThetaSweepRow row;
        row.theta = theta;
        for (int s = 0; s < metrics.n_stations; ++s)
            row.pbt.push_back(measured_pbt(metrics, run.gamma1, run.gamma2, s,
                                           warmup_windows,
                                           warmup_windows + measure_windows));
        row.payoff = total_revenue(metrics, warmup_windows,
                                   warmup_windows + measure_windows);
        result.rows.push_back(std::move(row));
    }

    std::size_t best = 0;
    if (mode == "payoff") {
        for (std::size_t i = 1; i < result.rows.size(); ++i)
            if (result.rows[i].payoff > result.rows[best].payoff) best = i;
    } else {
        auto tuned_pbt = [&](const ThetaSweepRow& row) {
            double sum = 0.0;
            for (int s : result.tuned_stations) sum += row.pbt[s];
            return sum;
        };
        const double payoff_floor = result.rows.front().payoff - 1e-9;
        bool found = false;
        for (std::size_t i = 0; i < result.rows.size(); ++i) {
            if (result.rows[i].payoff < payoff_floor) continue;
            if (!found || tuned_pbt(result.rows[i]) < tuned_pbt(result.rows[best])) {
                best = i;
                found = true;
            }
        }
    }

    for (const auto& cfg : scenario.stations) result.best_theta.push_back(cfg.theta);
    for (int s : result.tuned_stations) result.best_theta[s] = result.rows[best].theta;
    return result;
}

} // namespace evnet
