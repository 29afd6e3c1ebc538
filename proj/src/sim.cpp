#include "evnet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "evnet/game.hpp"
#include "evnet/markov.hpp"
#include "evnet/pricing.hpp"
#include "evnet/rng.hpp"

namespace evnet {
namespace {

constexpr std::uint64_t kArrivalTag = 0xA881;
constexpr std::uint64_t kRechargeTag = 0x8EC4;
constexpr std::uint64_t kCustomerTag = 0xC057;
constexpr std::uint64_t kSharesTag = 0x54A8;

struct Event {
    double time = 0.0;
    int rank = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::arrival;
    int station = -1;
    std::uint64_t generation = 0;  // storage_recharge validity
    std::uint64_t customer = 0;    // retry payload
    bool routed_class = false;     // retry payload
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.rank != b.rank) return a.rank > b.rank;
        return a.seq > b.seq;
    }
};

struct Customer {
    Rng rng;
    double incentive_threshold = 0.0;
    double dissatisfaction_rate = 0.0;
    double service_unit = 0.0;  // exp(1) draw, scaled by 1/mu at admission
    double x = 0.0;
    double y = 0.0;
};

struct StationRuntime {
    StationConfig cfg;
    double lambda_star = 0.0;
    int occupancy = 0;
    int storage = 0;
    std::uint64_t recharge_generation = 0;
    bool recharge_pending = false;
    double last_change = 0.0;
    bool congested = false;
    double price = 0.0;
    double accept_fraction = 1.0;
    double lambda_est = 0.0;
    double pbt_estimate = 0.0;
    std::deque<long long> entries_history;
    std::deque<long long> attempts_history;
};

class Engine {
  public:
    Engine(const Scenario& scenario, const std::vector<StationConfig>& effective,
           const std::vector<double>& lambda_star,
           std::vector<BlockingCache>& blocking, const SimOptions& options)
        : sc_(scenario), effective_(effective), lambda_star_(lambda_star),
          blocking_(blocking), options_(options),
          n_(static_cast<int>(effective.size())),
          windows_(static_cast<int>(std::llround(scenario.horizon / scenario.window))) {}

    RepMetrics run_rep(int rep) {
        rep_ = rep;
        metrics_ = RepMetrics{};
        metrics_.rep = rep;
        metrics_.routed_matrix.assign(n_, std::vector<long long>(n_, 0));
        rows_.assign(static_cast<std::size_t>(windows_) * n_, WindowRow{});
        stations_.clear();
        pending_.clear();
        queue_ = {};
        seq_counter_ = 0;
        customer_count_ = 0;

        for (int s = 0; s < n_; ++s) {
            StationRuntime st;
            st.cfg = effective_[s];
            st.lambda_star = lambda_star_[s];
            st.storage = st.cfg.storage_units;
            st.price = st.cfg.price_normal;
            stations_.push_back(st);
        }
        for (int w = 0; w < windows_; ++w)
            for (int s = 0; s < n_; ++s) {
                WindowRow& r = row(w, s);
                r.rep = rep;
                r.window = w;
                r.station = s;
                r.price = stations_[s].cfg.price_normal;
            }
        if (options_.collect_occupancy) {
            metrics_.time_in_state.resize(n_);
            metrics_.arrival_seen.resize(n_);
            for (int s = 0; s < n_; ++s) {
                const int cap = stations_[s].cfg.grid_slots +
                                stations_[s].cfg.storage_units + 1;
                metrics_.time_in_state[s].assign(cap, 0.0);
                metrics_.arrival_seen[s].assign(cap, 0);
            }
        }

        arrival_rng_ = make_rng(sc_.seed, kArrivalTag, static_cast<std::uint64_t>(rep));
        recharge_rng_.clear();
        for (int s = 0; s < n_; ++s)
            recharge_rng_.push_back(make_rng(sc_.seed, kRechargeTag,
                                             static_cast<std::uint64_t>(rep),
                                             static_cast<std::uint64_t>(s)));

        for (int k = 1; k <= windows_; ++k) {
            Event e;
            e.time = k * sc_.window;
            e.kind = EventKind::rate_window_tick;
            push(e);
        }
        lambda_max_ = profile_max(sc_.profile);
        if (lambda_max_ > 0) {
            const double t0 = exponential(arrival_rng_, lambda_max_);
            if (t0 < sc_.horizon) {
                Event e;
                e.time = t0;
                e.kind = EventKind::arrival;
                push(e);
            }
        }

        const double horizon_cap = sc_.horizon * (1.0 + 1e-12) + 1e-12;
        while (!queue_.empty()) {
            Event e = queue_.top();
            queue_.pop();
            if (e.time > horizon_cap) break;
            now_ = e.time;
            switch (e.kind) {
                case EventKind::arrival: on_arrival_candidate(); break;
                case EventKind::departure: on_departure(e.station); break;
                case EventKind::storage_recharge: on_recharge(e); break;
                case EventKind::rate_window_tick: on_tick(e.time); break;
                case EventKind::retry: on_retry(e); break;
            }
        }
        if (options_.collect_occupancy)
            for (int s = 0; s < n_; ++s) sample_occupancy(s, sc_.horizon);

        metrics_.rows = std::move(rows_);
        return std::move(metrics_);
    }

  private:
    WindowRow& row(int w, int s) { return rows_[static_cast<std::size_t>(w) * n_ + s]; }

    int window_of(double t) const {
        const int w = static_cast<int>(t / sc_.window);
        return std::min(windows_ - 1, std::max(0, w));
    }

    void push(Event e) {
        e.rank = static_cast<int>(e.kind);
        e.seq = seq_counter_++;
        queue_.push(e);
    }

    void sample_occupancy(int s, double t) {
        StationRuntime& st = stations_[s];
        metrics_.time_in_state[s][st.occupancy] += t - st.last_change;
        st.last_change = t;
    }

    void change_state(int s, int delta_occ, int delta_storage) {
        StationRuntime& st = stations_[s];
        if (options_.collect_occupancy && delta_occ != 0) sample_occupancy(s, now_);
        st.occupancy += delta_occ;
        st.storage += delta_storage;
        update_recharge(s);
    }

    void update_recharge(int s) {
        StationRuntime& st = stations_[s];
        const bool want =
            st.storage < st.cfg.storage_units && st.occupancy < st.cfg.grid_slots;
        if (want && !st.recharge_pending) {
            ++st.recharge_generation;
            st.recharge_pending = true;
            Event e;
            e.time = now_ + exponential(recharge_rng_[s], st.cfg.storage_recharge_rate);
            e.kind = EventKind::storage_recharge;
            e.station = s;
            e.generation = st.recharge_generation;
            push(e);
        } else if (!want && st.recharge_pending) {
            ++st.recharge_generation;  // orphan the pending event
            st.recharge_pending = false;
        }
    }

    bool try_admit(int s) {
        StationRuntime& st = stations_[s];
        if (options_.collect_occupancy)
            ++metrics_.arrival_seen[s][st.occupancy];
        if (st.occupancy < st.cfg.grid_slots) {
            change_state(s, +1, 0);
            return true;
        }
        if (st.storage > 0) {
            change_state(s, +1, -1);
            return true;
        }
        return false;
    }

    void on_departure(int s) { change_state(s, -1, 0); }

    void on_recharge(const Event& e) {
        StationRuntime& st = stations_[e.station];
        if (!st.recharge_pending || e.generation != st.recharge_generation) return;
        st.recharge_pending = false;
        change_state(e.station, 0, +1);
    }

    void on_arrival_candidate() {
        const double t_next = now_ + exponential(arrival_rng_, lambda_max_);
        if (t_next < sc_.horizon) {
            Event e;
            e.time = t_next;
            e.kind = EventKind::arrival;
            push(e);
        }
        const double rate = rate_at(sc_.profile, now_);
        if (uniform01(arrival_rng_) >= rate / lambda_max_) return;  // thinned out

        ++metrics_.arrivals;
        const std::uint64_t id = customer_count_++;
        Customer c;
        c.rng = make_rng(sc_.seed, kCustomerTag, static_cast<std::uint64_t>(rep_), id);
        c.incentive_threshold =
            sc_.incentive_lo + uniform01(c.rng) * (sc_.incentive_hi - sc_.incentive_lo);
        c.dissatisfaction_rate =
            sc_.dissatisfaction_lo +
            uniform01(c.rng) * (sc_.dissatisfaction_hi - sc_.dissatisfaction_lo);
        c.service_unit = exponential(c.rng, 1.0);

        int nearest;
        if (!sc_.shares.empty()) {
            const double u = uniform01(arrival_rng_);
            double acc = 0.0;
            nearest = static_cast<int>(sc_.shares.size()) - 1;
            for (int i = 0; i < static_cast<int>(sc_.shares.size()); ++i) {
                acc += sc_.shares[i];
                if (u < acc) {
                    nearest = i;
                    break;
                }
            }
            std::tie(c.x, c.y) =
                sample_location_in_cell(sc_.spatial, sc_.stations, nearest, arrival_rng_);
        } else {
            std::tie(c.x, c.y) = sample_location(sc_.spatial, arrival_rng_);
            nearest = nearest_station(sc_.stations, c.x, c.y);
        }

        int destination = nearest;
        if (sc_.tier == Tier::full && stations_[nearest].congested)
            destination = route_choice(c, nearest);

        const int w = window_of(now_);
        if (destination != nearest) {
            ++row(w, nearest).routed_out;
            ++row(w, destination).routed_in;
            ++metrics_.routed;
            ++metrics_.routed_matrix[nearest][destination];
            attempt_admission(c, id, destination, /*routed=*/true, w);
        } else {
            present_at_pricing_block(c, id, nearest, /*retry_kind=*/0,
                                     /*routed=*/false, w);
        }
    }

    int route_choice(const Customer& c, int nearest) {
        std::vector<double> prices(n_), pbt(n_), dists(n_), costs(n_);
        for (int i = 0; i < n_; ++i) {
            prices[i] = stations_[i].price;
            pbt[i] = stations_[i].pbt_estimate;
            dists[i] = std::hypot(c.x - stations_[i].cfg.x, c.y - stations_[i].cfg.y);
            costs[i] = prices[i] + sc_.drive_cost_rate * dists[i] * dists[i];
        }
        EvCustomer ev;
        ev.x = c.x;
        ev.y = c.y;
        ev.incentive_threshold = c.incentive_threshold;
        ev.dissatisfaction_rate = c.dissatisfaction_rate;
        ev.drive_cost_rate = sc_.drive_cost_rate;
        ev.urgency = sc_.xi;
        const auto utilities =
            ev_utility(ev, pbt, prices, dists, stations_[nearest].cfg.qos_max);
        int candidate = 0;
        for (int i = 1; i < n_; ++i)
            if (utilities[i] < utilities[candidate]) candidate = i;
        return ev_choose(ev, utilities, nearest, costs[nearest], costs[candidate],
                         pbt[candidate], stations_[candidate].cfg.qos_max);
    }

    // retry_kind: 0 = new arrival, 1 = local retry, 2 = routed-customer retry
    void present_at_pricing_block(Customer& c, std::uint64_t id, int s, int retry_kind,
                                  bool routed, int w) {
        WindowRow& r = row(w, s);
        if (retry_kind == 0)
            ++r.entries_new;
        else if (retry_kind == 1)
            ++r.entries_retry_local;
        else
            ++r.entries_retry_routed;

        StationRuntime& st = stations_[s];
        if (sc_.tier == Tier::full && st.congested &&
            uniform01(c.rng) >= st.accept_fraction) {
            ++r.balked;
            ++metrics_.balked;
            resolve(id, /*keep=*/false);
            return;
        }
        attempt_admission(c, id, s, routed, w);
    }

    void attempt_admission(Customer& c, std::uint64_t id, int s, bool routed, int w) {
        WindowRow& r = row(w, s);
        if (routed)
            ++r.attempts_routed;
        else
            ++r.attempts_local;
        StationRuntime& st = stations_[s];
        if (try_admit(s)) {
            ++r.served;
            ++metrics_.served;
            r.revenue += st.price;
            metrics_.revenue += st.price;
            Event e;
            e.time = now_ + c.service_unit / st.cfg.charge_rate;
            e.kind = EventKind::departure;
            e.station = s;
            push(e);
            resolve(id, /*keep=*/false);
            return;
        }
        if (routed)
            ++r.blocked_routed;
        else
            ++r.blocked_local;
        ++metrics_.blocked;
        r.revenue -= st.cfg.price_block_penalty;
        metrics_.revenue -= st.cfg.price_block_penalty;
        if (sc_.retry_fraction > 0 && uniform01(c.rng) < sc_.retry_fraction) {
            const double delay = exponential(c.rng, 1.0 / sc_.retry_mean_delay);
            Event e;
            e.time = now_ + delay;
            e.kind = EventKind::retry;
            e.station = s;
            e.customer = id;
            e.routed_class = routed;
            push(e);
            resolve(id, /*keep=*/true, &c);
            return;
        }
        resolve(id, /*keep=*/false);
    }

    // Keeps or releases the customer's state across retries. `c` may point to
    // a local (not yet stored) customer that must be persisted.
    void resolve(std::uint64_t id, bool keep, Customer* c = nullptr) {
        if (keep) {
            if (c != nullptr && !pending_.count(id)) pending_.emplace(id, std::move(*c));
        } else {
            pending_.erase(id);
        }
    }

    void on_retry(const Event& e) {
        auto it = pending_.find(e.customer);
        if (it == pending_.end()) return;
        Customer& c = it->second;
        const int w = window_of(now_);
        present_at_pricing_block(c, e.customer, e.station,
                                 e.routed_class ? 2 : 1, e.routed_class, w);
    }

    void on_tick(double t) {
        const int k = static_cast<int>(std::llround(t / sc_.window));
        const int closing = k - 1;
        for (int s = 0; s < n_; ++s) {
            StationRuntime& st = stations_[s];
            WindowRow& r = row(closing, s);
            r.occupancy_end = st.occupancy;
            r.storage_end = st.storage;
            st.entries_history.push_back(r.entries_new + r.entries_retry_local +
                                         r.entries_retry_routed);
            st.attempts_history.push_back(r.attempts_local + r.attempts_routed);
            while (static_cast<int>(st.entries_history.size()) > sc_.estimator_windows)
                st.entries_history.pop_front();
            while (static_cast<int>(st.attempts_history.size()) > sc_.estimator_windows)
                st.attempts_history.pop_front();

            if (k >= windows_) continue;  // horizon reached; nothing left to control

            long long entries_sum = 0;
            for (long long v : st.entries_history) entries_sum += v;
            long long attempts_sum = 0;
            for (long long v : st.attempts_history) attempts_sum += v;
            const double span = st.entries_history.size() * sc_.window;
            st.lambda_est = span > 0 ? entries_sum / span : 0.0;
            const double attempt_rate = span > 0 ? attempts_sum / span : 0.0;

            if (sc_.tier == Tier::full && st.lambda_star > 0) {
                const PriceSignal signal = price(st.lambda_est, st.lambda_star,
                                                 st.cfg.price_normal, st.cfg.theta);
                st.congested = signal.congested;
                st.price = signal.price;
                st.accept_fraction = acceptance_fraction(st.lambda_est, st.lambda_star);
                if (sc_.blocking_estimator == "analytic") {
                    st.pbt_estimate = blocking_[s].at(attempt_rate);
                } else {
                    st.pbt_estimate = empirical_pbt(s, k);
                }
            }
            WindowRow& next = row(k, s);
            next.price = st.price;
            next.congested = st.congested;
            next.lambda_est = st.lambda_est;
        }
    }

    double empirical_pbt(int s, int k) const {
        long long al = 0, bl = 0, ar = 0, br = 0;
        for (int w = std::max(0, k - sc_.estimator_windows); w < k; ++w) {
            const WindowRow& r = rows_[static_cast<std::size_t>(w) * n_ + s];
            al += r.attempts_local;
            bl += r.blocked_local;
            ar += r.attempts_routed;
            br += r.blocked_routed;
        }
        const double b_ev = al > 0 ? static_cast<double>(bl) / al : 0.0;
        const double b_rb = ar > 0 ? static_cast<double>(br) / ar : 0.0;
        return sc_.gamma1 * b_ev + sc_.gamma2 * b_rb;
    }

    const Scenario& sc_;
    const std::vector<StationConfig>& effective_;
    const std::vector<double>& lambda_star_;
    std::vector<BlockingCache>& blocking_;
    SimOptions options_;
    int n_ = 0;
    int windows_ = 0;
    int rep_ = 0;
    double now_ = 0.0;
    double lambda_max_ = 0.0;
    std::uint64_t seq_counter_ = 0;
    std::uint64_t customer_count_ = 0;
    RepMetrics metrics_;
    std::vector<WindowRow> rows_;
    std::vector<StationRuntime> stations_;
    std::vector<Rng> recharge_rng_;
    Rng arrival_rng_;
    std::unordered_map<std::uint64_t, Customer> pending_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
};

std::vector<double> resolve_shares(const Scenario& sc) {
    if (!sc.shares.empty()) return sc.shares;
    Rng rng = make_rng(sc.seed, kSharesTag);
    return station_shares(sc.spatial, sc.stations, 100000, rng);
}

} // namespace

std::vector<StationConfig> effective_stations(const Scenario& scenario) {
    std::vector<StationConfig> effective = scenario.stations;
    if (scenario.tier != Tier::baseline) {
        const auto shares = resolve_shares(scenario);
        const double peak = profile_max(scenario.profile);
        std::vector<double> rates(shares.size());
        for (std::size_t i = 0; i < shares.size(); ++i) rates[i] = shares[i] * peak;
        const AllocationReport report = allocate(scenario_topology(scenario), rates);
        for (std::size_t i = 0; i < effective.size(); ++i)
            effective[i].grid_slots = report.final_alloc[i];
    }
    return effective;
}

SimMetrics run_simulation(const Scenario& scenario, const SimOptions& options) {
    validate_scenario(scenario);
    if (!std::isfinite(profile_max(scenario.profile)))
        throw std::invalid_argument("demand profile must be finite");

    const std::vector<StationConfig> effective = effective_stations(scenario);

    SimMetrics metrics;
    metrics.n_stations = static_cast<int>(effective.size());
    metrics.n_windows = static_cast<int>(std::llround(scenario.horizon / scenario.window));
    metrics.window = scenario.window;
    metrics.tier = scenario.tier;
    for (const auto& cfg : effective) metrics.grid_slots.push_back(cfg.grid_slots);

    std::vector<BlockingCache> blocking;
    for (const auto& cfg : effective) blocking.emplace_back(cfg);
    for (const auto& cfg : effective) {
        double ls = 0.0;
        try {
            ls = max_admissible_rate(cfg);
        } catch (const std::runtime_error&) {
            ls = 0.0;  // no admissible rate exists for this configuration
        }
        metrics.lambda_star.push_back(ls);
    }

    Engine engine(scenario, effective, metrics.lambda_star, blocking, options);
    for (int rep = 0; rep < scenario.replications; ++rep)
        metrics.reps.push_back(engine.run_rep(rep));
    return metrics;
}

std::optional<double> network_weighted_blocking_range(const SimMetrics& metrics,
                                                      int window_lo, int window_hi) {
    long long attempts = 0, blocked = 0;
    for (const auto& rep : metrics.reps)
        for (const auto& r : rep.rows) {
            if (r.window < window_lo || r.window >= window_hi) continue;
            attempts += r.attempts_local + r.attempts_routed;
            blocked += r.blocked_local + r.blocked_routed;
        }
    if (attempts == 0) return std::nullopt;
    return static_cast<double>(blocked) / static_cast<double>(attempts);
}

std::optional<double> network_weighted_blocking(const SimMetrics& metrics, int window) {
    return network_weighted_blocking_range(metrics, window, window + 1);
}

double measured_blocking(const SimMetrics& metrics, int station, int window_lo,
                         int window_hi) {
    long long attempts = 0, blocked = 0;
    for (const auto& rep : metrics.reps)
        for (const auto& r : rep.rows) {
            if (r.station != station || r.window < window_lo || r.window >= window_hi)
                continue;
            attempts += r.attempts_local + r.attempts_routed;
            blocked += r.blocked_local + r.blocked_routed;
        }
    return attempts > 0 ? static_cast<double>(blocked) / attempts : 0.0;
}

double measured_pbt(const SimMetrics& metrics, double gamma1, double gamma2,
                    int station, int window_lo, int window_hi) {
    long long al = 0, bl = 0, ar = 0, br = 0;
    for (const auto& rep : metrics.reps)
        for (const auto& r : rep.rows) {
            if (r.station != station || r.window < window_lo || r.window >= window_hi)
                continue;
            al += r.attempts_local;
            bl += r.blocked_local;
            ar += r.attempts_routed;
            br += r.blocked_routed;
        }
    const double b_ev = al > 0 ? static_cast<double>(bl) / al : 0.0;
    const double b_rb = ar > 0 ? static_cast<double>(br) / ar : 0.0;
    return gamma1 * b_ev + gamma2 * b_rb;
}

long long total_served(const SimMetrics& metrics, int window_lo, int window_hi) {
    long long served = 0;
    for (const auto& rep : metrics.reps)
        for (const auto& r : rep.rows)
            if (r.window >= window_lo && r.window < window_hi) served += r.served;
    return served;
}

double total_revenue(const SimMetrics& metrics, int window_lo, int window_hi) {
    double revenue = 0.0;
    for (const auto& rep : metrics.reps)
        for (const auto& r : rep.rows)
            if (r.window >= window_lo && r.window < window_hi) revenue += r.revenue;
    return revenue;
}

double congested_fraction(const SimMetrics& metrics, int station, int window) {
    if (metrics.reps.empty()) return 0.0;
    long long hits = 0;
    for (const auto& rep : metrics.reps) {
        const WindowRow& r =
            rep.rows[static_cast<std::size_t>(window) * metrics.n_stations + station];
        if (r.congested) ++hits;
    }
    return static_cast<double>(hits) / metrics.reps.size();
}

TierComparison compare_tiers(const Scenario& scenario, std::uint64_t seed) {
    TierComparison cmp;
    cmp.tiers = {Tier::baseline, Tier::allocation, Tier::full};
    cmp.n_hours = static_cast<int>(std::ceil(scenario.horizon - 1e-9));

    std::vector<SimMetrics> runs;
    for (Tier tier : cmp.tiers) {
        Scenario sc = scenario;
        sc.tier = tier;
        sc.seed = seed;
        runs.push_back(run_simulation(sc));
    }

    for (const auto& metrics : runs) {
        std::vector<long long> served(cmp.n_hours, 0);
        std::vector<double> revenue(cmp.n_hours, 0.0);
        std::vector<long long> attempts(cmp.n_hours, 0), blocked(cmp.n_hours, 0);
        for (const auto& rep : metrics.reps)
            for (const auto& r : rep.rows) {
                const int hour = std::min(cmp.n_hours - 1,
                                          static_cast<int>(r.window * metrics.window));
                served[hour] += r.served;
                revenue[hour] += r.revenue;
                attempts[hour] += r.attempts_local + r.attempts_routed;
                blocked[hour] += r.blocked_local + r.blocked_routed;
            }
        std::vector<std::optional<double>> wb(cmp.n_hours);
        for (int h = 0; h < cmp.n_hours; ++h)
            if (attempts[h] > 0)
                wb[h] = static_cast<double>(blocked[h]) / attempts[h];
        cmp.served.push_back(std::move(served));
        cmp.revenue.push_back(std::move(revenue));
        cmp.weighted_blocking.push_back(std::move(wb));
    }

    cmp.served_increase_pct.resize(cmp.n_hours);
    for (int h = 0; h < cmp.n_hours; ++h) {
        const long long base = cmp.served[0][h];
        const long long full = cmp.served[2][h];
        if (base > 0)
            cmp.served_increase_pct[h] = 100.0 * (full - base) / static_cast<double>(base);
    }
    return cmp;
}

} // namespace evnet
