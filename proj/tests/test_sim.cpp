#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "evnet/emit.hpp"
#include "evnet/sim.hpp"

using namespace evnet;

namespace {

double erlang_b(int s, double a) {
    double b = 1.0;
    for (int k = 1; k <= s; ++k) b = a * b / (k + a * b);
    return b;
}

Scenario quiet_station() {
    Scenario sc;
    sc.name = "quiet";
    StationConfig st;
    st.grid_slots = 5;
    st.storage_units = 0;
    st.charge_rate = 2.0;
    st.storage_recharge_rate = 1.0;
    st.qos_max = 0.05;
    st.qos_min = 1e-4;
    st.price_normal = 4.0;
    st.price_block_penalty = 5.0;
    st.theta = 0.5;
    sc.stations = {st};
    sc.s_max = 5;
    sc.s_limit = 5;
    sc.profile.kind = ProfileKind::constant;
    sc.profile.base = 0.5;
    sc.shares = {1.0};
    sc.seed = 11;
    sc.horizon = 50.0;
    sc.replications = 2;
    sc.window = 0.5;
    sc.estimator_windows = 2;
    sc.tier = Tier::baseline;
    return sc;
}

void check_conservation(const SimMetrics& metrics) {
    for (const auto& rep : metrics.reps) {
        long long new_entries = 0, routed_in = 0;
        for (const auto& r : rep.rows) {
            const long long presented = r.entries_new + r.entries_retry_local +
                                        r.entries_retry_routed + r.routed_in;
            const long long resolved =
                r.served + r.blocked_local + r.blocked_routed + r.balked;
            CHECK(presented == resolved);
            new_entries += r.entries_new;
            routed_in += r.routed_in;
        }
        CHECK(rep.arrivals == new_entries + routed_in);
    }
}

} // namespace

TEST_CASE("zero arrival rate produces an empty run") {
    Scenario sc = quiet_station();
    sc.profile.base = 0.0;
    sc.replications = 1;
    const SimMetrics metrics = run_simulation(sc);
    REQUIRE(metrics.reps.size() == 1);
    const auto& rep = metrics.reps[0];
    CHECK(rep.arrivals == 0);
    CHECK(rep.served == 0);
    CHECK(rep.revenue == 0.0);
    CHECK(static_cast<int>(rep.rows.size()) == metrics.n_windows);
    for (const auto& r : rep.rows) {
        CHECK(r.served == 0);
        CHECK(r.occupancy_end == 0);
    }
    CHECK_FALSE(network_weighted_blocking(metrics, 0).has_value());
}

TEST_CASE("invalid run parameters are rejected") {
    Scenario sc = quiet_station();
    sc.horizon = 0.0;
    CHECK_THROWS_AS(run_simulation(sc), ScenarioError);
    sc = quiet_station();
    sc.replications = 0;
    CHECK_THROWS_AS(run_simulation(sc), ScenarioError);
    sc = quiet_station();
    sc.window = -1.0;
    CHECK_THROWS_AS(run_simulation(sc), ScenarioError);
}

TEST_CASE("identical runs are byte identical, different seeds differ") {
    Scenario sc = make_paper_single_sine();
    sc.horizon = 40.0;
    sc.replications = 2;
    const std::string a = windows_csv(run_simulation(sc));
    const std::string b = windows_csv(run_simulation(sc));
    CHECK(a == b);

    sc.seed = 8;
    const std::string c = windows_csv(run_simulation(sc));
    CHECK(a != c);
}

TEST_CASE("per-window accounting balances on the network scenario") {
    Scenario sc = make_paper_network();
    sc.horizon = 6.0;
    sc.replications = 3;
    for (Tier tier : {Tier::baseline, Tier::allocation, Tier::full}) {
        sc.tier = tier;
        const SimMetrics metrics = run_simulation(sc);
        check_conservation(metrics);
        for (const auto& rep : metrics.reps) {
            for (const auto& r : rep.rows) {
                const int cap = metrics.grid_slots[r.station] +
                                sc.stations[r.station].storage_units;
                CHECK(r.occupancy_end <= cap);
                CHECK(r.storage_end >= 0);
                CHECK(r.storage_end <= sc.stations[r.station].storage_units);
            }
        }
    }
}

TEST_CASE("per-window accounting balances on the sine scenario") {
    Scenario sc = make_paper_single_sine();
    sc.horizon = 80.0;
    sc.replications = 3;
    const SimMetrics metrics = run_simulation(sc);
    check_conservation(metrics);
    long long balked = 0;
    for (const auto& rep : metrics.reps) balked += rep.balked;
    CHECK(balked > 0);  // the sine peak must trigger congestion pricing
}

TEST_CASE("routed counts reconcile with the routing matrix") {
    Scenario sc = make_paper_network();
    sc.horizon = 6.0;
    sc.replications = 2;
    sc.tier = Tier::full;
    const SimMetrics metrics = run_simulation(sc);
    for (const auto& rep : metrics.reps) {
        long long matrix_total = 0;
        for (const auto& row : rep.routed_matrix)
            matrix_total += std::accumulate(row.begin(), row.end(), 0LL);
        CHECK(matrix_total == rep.routed);
        long long routed_in = 0, routed_out = 0;
        for (const auto& r : rep.rows) {
            routed_in += r.routed_in;
            routed_out += r.routed_out;
        }
        CHECK(routed_in == rep.routed);
        CHECK(routed_out == rep.routed);
    }
}

TEST_CASE("long constant-rate run converges to the loss-system blocking") {
    const Scenario sc = make_erlang_check();
    const SimMetrics metrics = run_simulation(sc);
    const auto& rep = metrics.reps[0];
    long long attempts = 0, blocked = 0;
    for (const auto& r : rep.rows) {
        attempts += r.attempts_local + r.attempts_routed;
        blocked += r.blocked_local + r.blocked_routed;
    }
    REQUIRE(attempts > 50000);
    const double b_hat = static_cast<double>(blocked) / attempts;
    const double b_true = erlang_b(5, 8.0 / 2.0);
    const double se = std::sqrt(b_true * (1.0 - b_true) / attempts);
    CHECK(std::abs(b_hat - b_true) <= 3.0 * se);
}

TEST_CASE("arrivals see time averages on the constant-rate run") {
    Scenario sc = make_erlang_check();
    sc.horizon = 5000.0;
    sc.window = 25.0;
    SimOptions options;
    options.collect_occupancy = true;
    const SimMetrics metrics = run_simulation(sc, options);
    const auto& rep = metrics.reps[0];
    REQUIRE(rep.time_in_state.size() == 1);
    const auto& occupancy_time = rep.time_in_state[0];
    const auto& seen = rep.arrival_seen[0];
    const double total_time =
        std::accumulate(occupancy_time.begin(), occupancy_time.end(), 0.0);
    const double total_seen =
        std::accumulate(seen.begin(), seen.end(), 0LL);
    REQUIRE(total_time > 0);
    REQUIRE(total_seen > 0);
    double tv = 0.0;
    for (std::size_t k = 0; k < occupancy_time.size(); ++k)
        tv += std::abs(occupancy_time[k] / total_time - seen[k] / total_seen);
    CHECK(tv / 2.0 <= 0.01);
}

TEST_CASE("tier controls are inert without congestion") {
    Scenario sc = quiet_station();
    sc.tier = Tier::allocation;
    const SimMetrics alloc = run_simulation(sc);
    sc.tier = Tier::full;
    const SimMetrics full = run_simulation(sc);
    REQUIRE(alloc.grid_slots == full.grid_slots);
    CHECK(windows_csv(alloc) == windows_csv(full));
    for (const auto& rep : full.reps) {
        CHECK(rep.balked == 0);
        CHECK(rep.routed == 0);
    }
}

TEST_CASE("tier comparison is flat without congestion") {
    const Scenario sc = quiet_station();
    const TierComparison cmp = compare_tiers(sc, sc.seed);
    REQUIRE(cmp.tiers.size() == 3);
    REQUIRE(cmp.n_hours == 50);
    for (int h = 0; h < cmp.n_hours; ++h) {
        CHECK(cmp.served[0][h] == cmp.served[1][h]);
        CHECK(cmp.served[1][h] == cmp.served[2][h]);
        CHECK(cmp.revenue[0][h] == doctest::Approx(cmp.revenue[2][h]));
    }
}

TEST_CASE("effective stations follow the tier") {
    Scenario sc = make_paper_network();
    sc.tier = Tier::baseline;
    auto stations = effective_stations(sc);
    std::vector<int> slots;
    for (const auto& st : stations) slots.push_back(st.grid_slots);
    CHECK(slots == std::vector<int>{7, 8, 8, 8, 8});

    sc.tier = Tier::allocation;
    stations = effective_stations(sc);
    slots.clear();
    for (const auto& st : stations) slots.push_back(st.grid_slots);
    CHECK(slots == std::vector<int>{2, 13, 13, 6, 5});
}

TEST_CASE("aggregation helpers on synthetic metrics") {
    SimMetrics metrics;
    metrics.n_stations = 2;
    metrics.n_windows = 1;
    metrics.window = 1.0;
    metrics.grid_slots = {1, 1};
    metrics.lambda_star = {1.0, 1.0};
    RepMetrics rep;
    WindowRow a;
    a.station = 0;
    a.attempts_local = 100;
    a.blocked_local = 10;
    a.served = 90;
    WindowRow b;
    b.station = 1;
    b.attempts_local = 100;
    b.blocked_local = 30;
    b.served = 70;
    rep.rows = {a, b};
    metrics.reps = {rep};

    // equal attempt weights: pooled blocking is the midpoint of 0.1 and 0.3
    const auto wb = network_weighted_blocking(metrics, 0);
    REQUIRE(wb.has_value());
    CHECK(*wb == doctest::Approx(0.2).epsilon(1e-12));

    CHECK(measured_blocking(metrics, 0, 0, 1) == doctest::Approx(0.1));
    CHECK(measured_blocking(metrics, 1, 0, 1) == doctest::Approx(0.3));
    // no routed attempts: only the local class contributes to the weighted sum
    CHECK(measured_pbt(metrics, 0.45, 0.55, 1, 0, 1) == doctest::Approx(0.45 * 0.3));
    CHECK(total_served(metrics, 0, 1) == 160);
}
