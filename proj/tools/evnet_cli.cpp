#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evnet/allocation.hpp"
#include "evnet/demand.hpp"
#include "evnet/emit.hpp"
#include "evnet/markov.hpp"
#include "evnet/scenario.hpp"
#include "evnet/sim.hpp"
#include "evnet/theta.hpp"

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::vector<double> peak_rates(const evnet::Scenario& scenario) {
    std::vector<double> shares = scenario.shares;
    if (shares.empty()) {
        evnet::Rng rng = evnet::make_rng(scenario.seed, 0x54A8);
        shares = evnet::station_shares(scenario.spatial, scenario.stations, 100000, rng);
    }
    const double peak = evnet::profile_max(scenario.profile);
    std::vector<double> rates(shares.size());
    for (std::size_t i = 0; i < shares.size(); ++i) rates[i] = shares[i] * peak;
    return rates;
}

std::string vec_to_string(const std::vector<int>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(v[i]);
    }
    return s + "]";
}

int do_run(const std::string& scenario_path, const std::string& tier,
           std::uint64_t seed, bool seed_set, int replications, double horizon,
           const std::string& out_dir, const std::string& format) {
    evnet::Scenario scenario = evnet::load_scenario(scenario_path);
    if (!tier.empty()) scenario.tier = evnet::tier_from_string(tier);
    if (seed_set) scenario.seed = seed;
    if (replications > 0) scenario.replications = replications;
    if (horizon > 0) scenario.horizon = horizon;
    evnet::validate_scenario(scenario);

    const evnet::SimMetrics metrics = evnet::run_simulation(scenario);

    std::filesystem::create_directories(out_dir);
    const std::string windows_path = out_dir + "/windows.csv";
    write_file(windows_path, evnet::windows_csv(metrics));
    std::string summary_path;
    if (format == "json") {
        summary_path = out_dir + "/summary.json";
        write_file(summary_path, evnet::summary_json(scenario, metrics));
    } else {
        summary_path = out_dir + "/summary.csv";
        write_file(summary_path, evnet::summary_csv(scenario, metrics));
    }

    long long served = 0, blocked = 0, balked = 0;
    double revenue = 0.0;
    for (const auto& rep : metrics.reps) {
        served += rep.served;
        blocked += rep.blocked;
        balked += rep.balked;
        revenue += rep.revenue;
    }
    std::cout << "scenario " << scenario.name << " tier "
              << evnet::tier_to_string(scenario.tier) << " seed " << scenario.seed
              << ": " << metrics.reps.size() << " replications, served " << served
              << ", blocked " << blocked << ", balked " << balked << ", revenue "
              << revenue << "\n";
    std::cout << "wrote " << windows_path << " and " << summary_path << "\n";
    return 0;
}

int do_allocate(const std::string& scenario_path, const std::string& format) {
    const evnet::Scenario scenario = evnet::load_scenario(scenario_path);
    const evnet::NetworkTopology topology = evnet::scenario_topology(scenario);
    const std::vector<double> rates = peak_rates(scenario);
    const evnet::AllocationReport report = evnet::allocate(topology, rates);

    if (format == "json") {
        nlohmann::ordered_json j;
        j["schema"] = "evnet.allocation v1";
        j["scenario"] = scenario.name;
        j["arrival_rates"] = rates;
        j["phase1"] = report.phase1;
        j["excess"] = report.excess;
        j["donor_excess"] = report.donor_excess;
        nlohmann::ordered_json grants = nlohmann::ordered_json::array();
        for (const auto& g : report.grants)
            grants.push_back({{"donor", g.donor}, {"grants", g.grants}});
        j["grants"] = grants;
        j["undistributed"] = report.undistributed;
        j["final"] = report.final_alloc;
        j["blocking_before"] = report.blocking_before;
        j["blocking_after"] = report.blocking_after;
        j["qos_unmet"] = report.qos_unmet;
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    int total = 0;
    for (int s : report.final_alloc) total += s;
    std::cout << "phase1:           " << vec_to_string(report.phase1) << "\n";
    std::cout << "excess:           " << report.excess << "\n";
    for (const auto& g : report.grants)
        std::cout << "phase2 donor " << g.donor << ":   " << vec_to_string(g.grants)
                  << "\n";
    std::cout << "undistributed:    " << report.undistributed << "\n";
    std::cout << "final:            " << vec_to_string(report.final_alloc) << " (sum "
              << total << ")\n";
    std::cout << "blocking_before: ";
    for (double b : report.blocking_before) std::cout << ' ' << b;
    std::cout << "\nblocking_after:  ";
    for (double b : report.blocking_after) std::cout << ' ' << b;
    std::cout << "\n";
    if (!report.qos_unmet.empty()) {
        std::cout << "qos_unmet: stations";
        for (int s : report.qos_unmet) std::cout << ' ' << s;
        std::cout << " stay above qos_max at the allowed power\n";
    }
    return 0;
}

int do_blocking_grid(int s_min, int s_max, int r_min, int r_max, double lambda_min,
                     double lambda_max, double lambda_step, double mu, double nu,
                     const std::string& out_path) {
    if (s_min < 0 || s_max < s_min || r_min < 0 || r_max < r_min)
        throw std::invalid_argument("invalid S or R range");
    if (!(lambda_min > 0) || lambda_max < lambda_min || !(lambda_step > 0))
        throw std::invalid_argument("invalid lambda range");

    std::ostringstream out;
    out << "# schema: evnet.blocking_grid v1\n";
    out << "grid_slots,storage_units,lambda,blocking\n";
    out.precision(12);
    for (int s = s_min; s <= s_max; ++s)
        for (int r = r_min; r <= r_max; ++r)
            for (double lam = lambda_min; lam <= lambda_max + 1e-12; lam += lambda_step) {
                evnet::StationConfig cfg;
                cfg.grid_slots = s;
                cfg.storage_units = r;
                cfg.charge_rate = mu;
                cfg.storage_recharge_rate = nu;
                out << s << ',' << r << ',' << lam << ','
                    << evnet::blocking_probability(cfg, lam) << '\n';
            }
    if (out_path.empty())
        std::cout << out.str();
    else
        write_file(out_path, out.str());
    return 0;
}

int do_profit_curve(const std::string& scenario_path, double lambda_min,
                    double lambda_max, double lambda_step, double cost_grid_slot,
                    double cost_storage_unit, const std::string& out_path) {
    if (!(lambda_min > 0) || lambda_max < lambda_min || !(lambda_step > 0))
        throw std::invalid_argument("invalid lambda range");
    const evnet::Scenario scenario = evnet::load_scenario(scenario_path);
    const evnet::StationConfig cfg = scenario.stations.at(0);
    const double fixed_cost =
        cost_grid_slot * cfg.grid_slots + cost_storage_unit * cfg.storage_units;

    std::ostringstream out;
    out << "# schema: evnet.profit_curve v1\n";
    out << "lambda,blocking,profit\n";
    out.precision(12);
    for (double lam = lambda_min; lam <= lambda_max + 1e-12; lam += lambda_step) {
        const double b = evnet::blocking_probability(cfg, lam);
        const double profit = cfg.price_normal * lam * (1.0 - b) -
                              cfg.price_block_penalty * lam * b - fixed_cost;
        out << lam << ',' << b << ',' << profit << '\n';
    }
    if (out_path.empty())
        std::cout << out.str();
    else
        write_file(out_path, out.str());
    return 0;
}

int do_theta_sweep(const std::string& scenario_path, double theta_min, double theta_max,
                   double theta_step, const std::string& mode,
                   const std::string& out_path) {
    if (theta_min < 0 || theta_max < theta_min || !(theta_step > 0))
        throw std::invalid_argument("invalid theta range");
    const evnet::Scenario scenario = evnet::load_scenario(scenario_path);
    std::vector<double> grid;
    for (double t = theta_min; t <= theta_max + 1e-12; t += theta_step)
        grid.push_back(t);
    const evnet::ThetaSweepResult result = evnet::tune_theta(scenario, grid, mode);

    std::ostringstream out;
    out << "# schema: evnet.theta_sweep v1\n";
    out << "theta,payoff";
    for (std::size_t s = 0; s < scenario.stations.size(); ++s) out << ",pbt_" << s;
    out << "\n";
    out.precision(12);
    for (const auto& row : result.rows) {
        out << row.theta << ',' << row.payoff;
        for (double p : row.pbt) out << ',' << p;
        out << '\n';
    }
    if (out_path.empty())
        std::cout << out.str();
    else
        write_file(out_path, out.str());

    std::cerr << "tuned stations:";
    for (int s : result.tuned_stations) std::cerr << ' ' << s;
    std::cerr << "\nbest theta:";
    for (double t : result.best_theta) std::cerr << ' ' << t;
    std::cerr << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analysis and simulation of a capacitated EV fast-charging network"};
    app.require_subcommand(1);

    std::string scenario_path, tier, out_dir = ".", format = "json", out_path, mode = "payoff";
    std::uint64_t seed = 0;
    int replications = 0;
    double horizon = 0.0;

    auto* run = app.add_subcommand("run", "Simulate a scenario and emit metrics");
    run->add_option("--scenario", scenario_path, "Scenario file")->required();
    run->add_option("--tier", tier, "Override tier: baseline|allocation|full");
    auto* seed_opt = run->add_option("--seed", seed, "Override RNG seed");
    run->add_option("--replications", replications, "Override replication count")
        ->check(CLI::PositiveNumber);
    run->add_option("--horizon", horizon, "Override horizon (hours)")
        ->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--format", format, "Summary format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    std::string alloc_format = "text";
    auto* alloc = app.add_subcommand("allocate", "Two-phase grid power allocation");
    alloc->add_option("--scenario", scenario_path, "Scenario file")->required();
    alloc->add_option("--format", alloc_format, "Report format: text|json")
        ->check(CLI::IsMember({"text", "json"}));

    int s_min = 1, s_max = 10, r_min = 0, r_max = 8;
    double lambda_min = 1.0, lambda_max = 10.0, lambda_step = 1.0;
    double mu = 2.0, nu = 3.0;
    auto* grid = app.add_subcommand("blocking-grid",
                                    "Analytic blocking over an (S, R, lambda) grid");
    grid->add_option("--s-min", s_min, "Smallest grid-slot count");
    grid->add_option("--s-max", s_max, "Largest grid-slot count");
    grid->add_option("--r-min", r_min, "Smallest storage count");
    grid->add_option("--r-max", r_max, "Largest storage count");
    grid->add_option("--lambda-min", lambda_min, "Smallest arrival rate");
    grid->add_option("--lambda-max", lambda_max, "Largest arrival rate");
    grid->add_option("--lambda-step", lambda_step, "Arrival rate step");
    grid->add_option("--mu", mu, "Per-EV service rate");
    grid->add_option("--nu", nu, "Storage recharge rate");
    grid->add_option("--out", out_path, "Output CSV path (default stdout)");

    double cost_grid_slot = 1.2, cost_storage_unit = 1.2;
    auto* profit = app.add_subcommand(
        "profit-curve", "Expected profit vs arrival rate for the first station");
    profit->add_option("--scenario", scenario_path, "Scenario file")->required();
    profit->add_option("--lambda-min", lambda_min, "Smallest arrival rate");
    profit->add_option("--lambda-max", lambda_max, "Largest arrival rate");
    profit->add_option("--lambda-step", lambda_step, "Arrival rate step");
    profit->add_option("--cost-grid-slot", cost_grid_slot,
                       "Fixed cost per grid slot per unit time");
    profit->add_option("--cost-storage-unit", cost_storage_unit,
                       "Fixed cost per storage unit per unit time");
    profit->add_option("--out", out_path, "Output CSV path (default stdout)");

    double theta_min = 0.0, theta_max = 1.0, theta_step = 0.05;
    auto* sweep = app.add_subcommand("theta-sweep",
                                     "Blocking and payoff vs the pricing parameter");
    sweep->add_option("--scenario", scenario_path, "Scenario file")->required();
    sweep->add_option("--theta-min", theta_min, "Smallest theta");
    sweep->add_option("--theta-max", theta_max, "Largest theta");
    sweep->add_option("--theta-step", theta_step, "Theta step");
    sweep->add_option("--mode", mode, "Selection mode: payoff|blocking")
        ->check(CLI::IsMember({"payoff", "blocking"}));
    sweep->add_option("--out", out_path, "Output CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed())
            return do_run(scenario_path, tier, seed, seed_opt->count() > 0, replications,
                          horizon, out_dir, format);
        if (alloc->parsed())
            return do_allocate(scenario_path, alloc_format);
        if (grid->parsed())
            return do_blocking_grid(s_min, s_max, r_min, r_max, lambda_min, lambda_max,
                                    lambda_step, mu, nu, out_path);
        if (profit->parsed())
            return do_profit_curve(scenario_path, lambda_min, lambda_max, lambda_step,
                                   cost_grid_slot, cost_storage_unit, out_path);
        if (sweep->parsed())
            return do_theta_sweep(scenario_path, theta_min, theta_max, theta_step, mode,
                                  out_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
