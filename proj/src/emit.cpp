#include "evnet/emit.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace evnet {
namespace {

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& values) {
    MeanSd out;
    if (values.empty()) return out;
    for (double v : values) out.mean += v;
    out.mean /= values.size();
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.sd = std::sqrt(ss / (values.size() - 1));
    }
    return out;
}

struct StationTotals {
    std::vector<double> served, blocked, balked, revenue, blocking;
};

std::vector<StationTotals> per_station_totals(const SimMetrics& metrics) {
    std::vector<StationTotals> totals(metrics.n_stations);
    for (const auto& rep : metrics.reps) {
        std::vector<long long> served(metrics.n_stations, 0),
            blocked(metrics.n_stations, 0), balked(metrics.n_stations, 0),
            attempts(metrics.n_stations, 0);
        std::vector<double> revenue(metrics.n_stations, 0.0);
        for (const auto& r : rep.rows) {
            served[r.station] += r.served;
            blocked[r.station] += r.blocked_local + r.blocked_routed;
            balked[r.station] += r.balked;
            attempts[r.station] += r.attempts_local + r.attempts_routed;
            revenue[r.station] += r.revenue;
        }
        for (int s = 0; s < metrics.n_stations; ++s) {
            totals[s].served.push_back(static_cast<double>(served[s]));
            totals[s].blocked.push_back(static_cast<double>(blocked[s]));
            totals[s].balked.push_back(static_cast<double>(balked[s]));
            totals[s].revenue.push_back(revenue[s]);
            totals[s].blocking.push_back(
                attempts[s] > 0 ? static_cast<double>(blocked[s]) / attempts[s] : 0.0);
        }
    }
    return totals;
}

nlohmann::ordered_json stat_json(const std::vector<double>& values) {
    const MeanSd ms = mean_sd(values);
    return {{"mean", ms.mean}, {"sd", ms.sd}};
}

} // namespace

std::string windows_csv(const SimMetrics& metrics) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(6);
    out << "# schema: evnet.windows v1\n";
    out << "rep,window,station,entries_new,entries_retry_local,entries_retry_routed,"
           "routed_in,routed_out,attempts_local,attempts_routed,blocked_local,"
           "blocked_routed,served,balked,revenue,price,lambda_est,congested,"
           "occupancy_end,storage_end\n";
    for (const auto& rep : metrics.reps)
        for (const auto& r : rep.rows) {
            out << r.rep << ',' << r.window << ',' << r.station << ','
                << r.entries_new << ',' << r.entries_retry_local << ','
                << r.entries_retry_routed << ',' << r.routed_in << ','
                << r.routed_out << ',' << r.attempts_local << ','
                << r.attempts_routed << ',' << r.blocked_local << ','
                << r.blocked_routed << ',' << r.served << ',' << r.balked << ','
                << r.revenue << ',' << r.price << ',' << r.lambda_est << ','
                << (r.congested ? 1 : 0) << ',' << r.occupancy_end << ','
                << r.storage_end << '\n';
        }
    return out.str();
}

std::string summary_json(const Scenario& scenario, const SimMetrics& metrics) {
    nlohmann::ordered_json j;
    j["schema"] = "evnet.summary v1";
    j["scenario"] = scenario.name;
    j["tier"] = tier_to_string(metrics.tier);
    j["seed"] = scenario.seed;
    j["replications"] = static_cast<int>(metrics.reps.size());
    j["horizon"] = scenario.horizon;
    j["window"] = metrics.window;
    j["grid_slots"] = metrics.grid_slots;
    j["lambda_star"] = metrics.lambda_star;

    std::vector<double> arrivals, served, blocked, balked, routed, revenue;
    for (const auto& rep : metrics.reps) {
        arrivals.push_back(static_cast<double>(rep.arrivals));
        served.push_back(static_cast<double>(rep.served));
        blocked.push_back(static_cast<double>(rep.blocked));
        balked.push_back(static_cast<double>(rep.balked));
        routed.push_back(static_cast<double>(rep.routed));
        revenue.push_back(rep.revenue);
    }
    j["network"] = {
        {"arrivals", stat_json(arrivals)}, {"served", stat_json(served)},
        {"blocked", stat_json(blocked)},   {"balked", stat_json(balked)},
        {"routed", stat_json(routed)},     {"revenue", stat_json(revenue)},
    };

    const auto totals = per_station_totals(metrics);
    nlohmann::ordered_json stations = nlohmann::ordered_json::array();
    for (int s = 0; s < metrics.n_stations; ++s) {
        stations.push_back({
            {"station", s},
            {"grid_slots", metrics.grid_slots[s]},
            {"lambda_star", metrics.lambda_star[s]},
            {"served", stat_json(totals[s].served)},
            {"blocked", stat_json(totals[s].blocked)},
            {"balked", stat_json(totals[s].balked)},
            {"revenue", stat_json(totals[s].revenue)},
            {"blocking_fraction", stat_json(totals[s].blocking)},
        });
    }
    j["stations"] = stations;
    return j.dump(2) + "\n";
}

std::string summary_csv(const Scenario& scenario, const SimMetrics& metrics) {
    const auto totals = per_station_totals(metrics);
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(6);
    out << "# schema: evnet.summary v1\n";
    out << "scenario,tier,station,grid_slots,lambda_star,served_mean,served_sd,"
           "blocked_mean,blocked_sd,balked_mean,balked_sd,revenue_mean,revenue_sd,"
           "blocking_mean,blocking_sd\n";
    for (int s = 0; s < metrics.n_stations; ++s) {
        const MeanSd served = mean_sd(totals[s].served);
        const MeanSd blocked = mean_sd(totals[s].blocked);
        const MeanSd balked = mean_sd(totals[s].balked);
        const MeanSd revenue = mean_sd(totals[s].revenue);
        const MeanSd blocking = mean_sd(totals[s].blocking);
        out << scenario.name << ',' << tier_to_string(metrics.tier) << ',' << s << ','
            << metrics.grid_slots[s] << ',' << metrics.lambda_star[s] << ','
            << served.mean << ',' << served.sd << ',' << blocked.mean << ','
            << blocked.sd << ',' << balked.mean << ',' << balked.sd << ','
            << revenue.mean << ',' << revenue.sd << ',' << blocking.mean << ','
            << blocking.sd << '\n';
    }
    return out.str();
}

} // namespace evnet
