#include "evnet/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "evnet/markov.hpp"

namespace evnet {

void validate_topology(const NetworkTopology& topology) {
    const int n = static_cast<int>(topology.stations.size());
    if (n < 1) throw std::invalid_argument("topology needs at least one station");
    for (const auto& s : topology.stations) validate_station(s);
    if (topology.s_limit > topology.s_max)
        throw std::invalid_argument("s_limit must be <= s_max");
    if (topology.s_limit < 0 || topology.s_max < 0)
        throw std::invalid_argument("power budget fields must be >= 0");
    if (topology.distances.rows() != n || topology.distances.cols() != n)
        throw std::invalid_argument("distance matrix must be N x N");
    for (int i = 0; i < n; ++i) {
        if (topology.distances(i, i) != 0.0)
            throw std::invalid_argument("distance matrix diagonal must be zero");
        for (int j = 0; j < n; ++j) {
            if (topology.distances(i, j) < 0)
                throw std::invalid_argument("distances must be >= 0");
            if (std::abs(topology.distances(i, j) - topology.distances(j, i)) > 1e-9)
                throw std::invalid_argument("distance matrix must be symmetric");
        }
    }
}

Eigen::MatrixXd distances_from_locations(const std::vector<StationConfig>& stations) {
    const int n = static_cast<int>(stations.size());
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            d(i, j) = std::hypot(stations[i].x - stations[j].x,
                                 stations[i].y - stations[j].y);
    return d;
}

namespace {

class SlotBlocking {
  public:
    SlotBlocking(const NetworkTopology& topology, const std::vector<double>& rates)
        : topology_(topology), rates_(rates),
          memo_(topology.stations.size()) {}

    double at(int station, int slots) {
        auto& m = memo_[station];
        if (slots < static_cast<int>(m.size()) && m[slots] >= 0) return m[slots];
        if (slots >= static_cast<int>(m.size())) m.resize(slots + 1, -1.0);
        StationConfig cfg = topology_.stations[station];
        cfg.grid_slots = slots;
        m[slots] = blocking_probability(cfg, rates_[station]);
        return m[slots];
    }

  private:
    const NetworkTopology& topology_;
    const std::vector<double>& rates_;
    std::vector<std::vector<double>> memo_;
};

} // namespace

std::vector<int> phase1_allocate(const NetworkTopology& topology,
                                 const std::vector<double>& arrival_rates) {
    validate_topology(topology);
    const int n = static_cast<int>(topology.stations.size());
    if (static_cast<int>(arrival_rates.size()) != n)
        throw std::invalid_argument("one arrival rate per station required");
    for (double r : arrival_rates)
        if (!(r > 0)) throw std::invalid_argument("arrival rates must be > 0");

    SlotBlocking cache(topology, arrival_rates);
    std::vector<int> slots(n, 0);
    std::vector<double> blocking(n);
    for (int i = 0; i < n; ++i) blocking[i] = cache.at(i, 0);

    int budget = topology.s_max;
    while (budget > 0) {
        int best = -1;
        double best_gain = 0.0;
        for (int i = 0; i < n; ++i) {
            if (slots[i] >= topology.s_limit) continue;
            if (blocking[i] < topology.stations[i].qos_min) continue;
            const double gain = blocking[i] - cache.at(i, slots[i] + 1);
            if (gain > best_gain) {
                best = i;
                best_gain = gain;
            }
        }
        if (best < 0) break;
        ++slots[best];
        blocking[best] = cache.at(best, slots[best]);
        --budget;
    }
    return slots;
}

int compute_excess(const std::vector<int>& slots, int s_max) {
    const int used = std::accumulate(slots.begin(), slots.end(), 0);
    const int excess = s_max - used;
    if (excess < 0) throw std::logic_error("allocation exceeded the power budget");
    return excess;
}

void phase2_redistribute(const NetworkTopology& topology, std::vector<int>& slots,
                         const std::vector<int>& donor_excess,
                         AllocationReport& report) {
    const int n = static_cast<int>(topology.stations.size());
    std::vector<int> donors;
    for (int j = 0; j < n; ++j)
        if (donor_excess[j] > 0) donors.push_back(j);
    std::sort(donors.begin(), donors.end(), [&](int a, int b) {
        if (donor_excess[a] != donor_excess[b]) return donor_excess[a] > donor_excess[b];
        return a < b;
    });

    for (int donor : donors) {
        int remaining = donor_excess[donor];
        Phase2Grant record;
        record.donor = donor;
        record.grants.assign(n, 0);

        while (remaining > 0) {
            std::vector<int> eligible;
            for (int k = 0; k < n; ++k) {
                if (donor_excess[k] > 0) continue;  // saturated set excluded
                if (slots[k] >= topology.s_limit) continue;
                eligible.push_back(k);
            }
            if (eligible.empty()) break;

            double weight_sum = 0.0;
            std::vector<double> weight(eligible.size());
            for (std::size_t e = 0; e < eligible.size(); ++e) {
                const double d = std::max(topology.distances(eligible[e], donor), 1e-9);
                weight[e] = 1.0 / (d * d);
                weight_sum += weight[e];
            }

            std::vector<int> grant(eligible.size(), 0);
            std::vector<double> remainder(eligible.size());
            int granted = 0;
            for (std::size_t e = 0; e < eligible.size(); ++e) {
                const double quota = remaining * weight[e] / weight_sum;
                grant[e] = static_cast<int>(std::floor(quota));
                remainder[e] = quota - grant[e];
                granted += grant[e];
            }
            std::vector<std::size_t> order(eligible.size());
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
                return eligible[a] < eligible[b];
            });
            for (std::size_t e = 0; e < order.size() && granted < remaining; ++e) {
                ++grant[order[e]];
                ++granted;
            }

            int applied = 0;
            for (std::size_t e = 0; e < eligible.size(); ++e) {
                const int k = eligible[e];
                const int headroom = topology.s_limit - slots[k];
                const int g = std::min(grant[e], headroom);
                slots[k] += g;
                record.grants[k] += g;
                applied += g;
            }
            remaining -= applied;
            if (applied == 0) break;  // nobody could absorb anything
        }
        report.undistributed += remaining;
        report.grants.push_back(std::move(record));
    }
}

AllocationReport allocate(const NetworkTopology& topology,
                          const std::vector<double>& arrival_rates) {
    AllocationReport report;
    report.phase1 = phase1_allocate(topology, arrival_rates);
    const int n = static_cast<int>(topology.stations.size());
    report.excess = compute_excess(report.phase1, topology.s_max);

    SlotBlocking cache(topology, arrival_rates);
    report.blocking_before.resize(n);
    for (int i = 0; i < n; ++i)
        report.blocking_before[i] = cache.at(i, report.phase1[i]);

    // Attribute the unspent budget to cap-pinned stations by continuing the
    // greedy past the cap: each donor's share is what it would have taken next.
    report.donor_excess.assign(n, 0);
    {
        std::vector<int> virtual_slots = report.phase1;
        std::vector<double> blocking(n);
        for (int i = 0; i < n; ++i) blocking[i] = report.blocking_before[i];
        int leftover = report.excess;
        while (leftover > 0) {
            int best = -1;
            double best_gain = 0.0;
            for (int i = 0; i < n; ++i) {
                if (report.phase1[i] < topology.s_limit) continue;  // donors are cap-pinned
                const double gain = blocking[i] - cache.at(i, virtual_slots[i] + 1);
                if (gain > best_gain) {
                    best = i;
                    best_gain = gain;
                }
            }
            if (best < 0) break;
            ++virtual_slots[best];
            blocking[best] = cache.at(best, virtual_slots[best]);
            ++report.donor_excess[best];
            --leftover;
        }
    }

    report.final_alloc = report.phase1;
    phase2_redistribute(topology, report.final_alloc, report.donor_excess, report);
    const int attributed =
        std::accumulate(report.donor_excess.begin(), report.donor_excess.end(), 0);
    report.undistributed += report.excess - attributed;

    report.blocking_after.resize(n);
    for (int i = 0; i < n; ++i) {
        report.blocking_after[i] = cache.at(i, report.final_alloc[i]);
        if (report.blocking_after[i] > topology.stations[i].qos_max)
            report.qos_unmet.push_back(i);
    }
    return report;
}

} // namespace evnet
