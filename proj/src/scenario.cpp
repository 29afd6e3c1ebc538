#include "evnet/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace evnet {

using json = nlohmann::ordered_json;

std::string tier_to_string(Tier tier) {
    switch (tier) {
        case Tier::baseline: return "baseline";
        case Tier::allocation: return "allocation";
        case Tier::full: return "full";
    }
    throw std::logic_error("unknown tier");
}

Tier tier_from_string(const std::string& s) {
    if (s == "baseline") return Tier::baseline;
    if (s == "allocation") return Tier::allocation;
    if (s == "full") return Tier::full;
    throw ScenarioError("unknown tier '" + s + "' (expected baseline|allocation|full)");
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ScenarioError("scenario error at " + path + ": " + msg);
}

class Obj {
  public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }
    const json& need(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) fail(path_, "missing key '" + key + "'");
        return *it;
    }
    const json* opt(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    void done() const {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key())) fail(path_, "unknown key '" + item.key() + "'");
    }
    const std::string& path() const { return path_; }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

double num(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

std::uint64_t u64(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<std::uint64_t>();
}

std::string str(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

std::vector<double> num_array(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(num(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::pair<double, double> num_pair(const json& j, const std::string& path) {
    auto v = num_array(j, path);
    if (v.size() != 2) fail(path, "expected exactly two numbers");
    return {v[0], v[1]};
}

StationConfig parse_station(const json& j, const std::string& path) {
    Obj o(j, path);
    StationConfig cfg;
    cfg.grid_slots = integer(o.need("grid_slots"), path + ".grid_slots");
    cfg.storage_units = integer(o.need("storage_units"), path + ".storage_units");
    cfg.charge_rate = num(o.need("charge_rate"), path + ".charge_rate");
    cfg.storage_recharge_rate =
        num(o.need("storage_recharge_rate"), path + ".storage_recharge_rate");
    cfg.qos_max = num(o.need("qos_max"), path + ".qos_max");
    cfg.price_normal = num(o.need("price_normal"), path + ".price_normal");
    cfg.price_block_penalty =
        num(o.need("price_block_penalty"), path + ".price_block_penalty");
    if (const json* v = o.opt("qos_min")) cfg.qos_min = num(*v, path + ".qos_min");
    if (const json* v = o.opt("theta")) cfg.theta = num(*v, path + ".theta");
    if (const json* v = o.opt("x")) cfg.x = num(*v, path + ".x");
    if (const json* v = o.opt("y")) cfg.y = num(*v, path + ".y");
    o.done();
    try {
        validate_station(cfg);
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    return cfg;
}

json station_to_json(const StationConfig& cfg) {
    json j;
    j["grid_slots"] = cfg.grid_slots;
    j["storage_units"] = cfg.storage_units;
    j["charge_rate"] = cfg.charge_rate;
    j["storage_recharge_rate"] = cfg.storage_recharge_rate;
    j["qos_max"] = cfg.qos_max;
    j["qos_min"] = cfg.qos_min;
    j["price_normal"] = cfg.price_normal;
    j["price_block_penalty"] = cfg.price_block_penalty;
    j["theta"] = cfg.theta;
    j["x"] = cfg.x;
    j["y"] = cfg.y;
    return j;
}

} // namespace

bool Scenario::operator==(const Scenario& other) const {
    auto same_matrix = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() &&
               (a.size() == 0 || (a.array() == b.array()).all());
    };
    auto same_station = [](const StationConfig& a, const StationConfig& b) {
        return a.grid_slots == b.grid_slots && a.storage_units == b.storage_units &&
               a.charge_rate == b.charge_rate &&
               a.storage_recharge_rate == b.storage_recharge_rate &&
               a.qos_max == b.qos_max && a.qos_min == b.qos_min &&
               a.price_normal == b.price_normal &&
               a.price_block_penalty == b.price_block_penalty && a.theta == b.theta &&
               a.x == b.x && a.y == b.y;
    };
    if (stations.size() != other.stations.size()) return false;
    for (std::size_t i = 0; i < stations.size(); ++i)
        if (!same_station(stations[i], other.stations[i])) return false;
    return name == other.name && s_max == other.s_max && s_limit == other.s_limit &&
           has_distances == other.has_distances &&
           (!has_distances || same_matrix(distances, other.distances)) &&
           spatial.area == other.spatial.area &&
           spatial.hotspot_fraction == other.spatial.hotspot_fraction &&
           spatial.beta_x_a == other.spatial.beta_x_a &&
           spatial.beta_x_b == other.spatial.beta_x_b &&
           spatial.beta_y_a == other.spatial.beta_y_a &&
           spatial.beta_y_b == other.spatial.beta_y_b &&
           spatial.patch_scale == other.spatial.patch_scale &&
           profile.kind == other.profile.kind && profile.base == other.profile.base &&
           profile.amplitude == other.profile.amplitude &&
           profile.period == other.profile.period && profile.phase == other.profile.phase &&
           profile.hourly == other.profile.hourly && shares == other.shares &&
           gamma1 == other.gamma1 && gamma2 == other.gamma2 && xi == other.xi &&
           incentive_lo == other.incentive_lo && incentive_hi == other.incentive_hi &&
           dissatisfaction_lo == other.dissatisfaction_lo &&
           dissatisfaction_hi == other.dissatisfaction_hi &&
           drive_cost_rate == other.drive_cost_rate &&
           retry_fraction == other.retry_fraction &&
           retry_mean_delay == other.retry_mean_delay &&
           blocking_estimator == other.blocking_estimator && seed == other.seed &&
           horizon == other.horizon && replications == other.replications &&
           window == other.window && estimator_windows == other.estimator_windows &&
           tier == other.tier;
}

void validate_scenario(const Scenario& scenario) {
    if (scenario.stations.empty())
        throw ScenarioError("scenario error at stations: at least one station required");
    for (const auto& s : scenario.stations) validate_station(s);
    scenario_topology(scenario);  // validates budget fields and distances
    validate_spatial(scenario.spatial);
    validate_profile(scenario.profile);
    if (!scenario.shares.empty()) {
        if (scenario.shares.size() != scenario.stations.size())
            throw ScenarioError("scenario error at demand.shares: one share per station");
        double sum = 0.0;
        for (double s : scenario.shares) {
            if (s < 0) throw ScenarioError("scenario error at demand.shares: shares must be >= 0");
            sum += s;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ScenarioError("scenario error at demand.shares: shares must sum to 1");
    }
    if (scenario.gamma1 < 0 || scenario.gamma2 < 0 ||
        std::abs(scenario.gamma1 + scenario.gamma2 - 1.0) > 1e-9)
        throw ScenarioError("scenario error at game: gamma1 + gamma2 must equal 1");
    if (!(scenario.gamma2 > scenario.gamma1))
        throw ScenarioError("scenario error at game: gamma2 must exceed gamma1");
    if (scenario.xi < 0) throw ScenarioError("scenario error at game.xi: must be >= 0");
    if (scenario.incentive_lo < 0 || scenario.incentive_hi < scenario.incentive_lo)
        throw ScenarioError("scenario error at game.incentive_range: need 0 <= lo <= hi");
    if (scenario.dissatisfaction_lo < 0 ||
        scenario.dissatisfaction_hi < scenario.dissatisfaction_lo)
        throw ScenarioError("scenario error at game.dissatisfaction_range: need 0 <= lo <= hi");
    if (scenario.drive_cost_rate < 0)
        throw ScenarioError("scenario error at game.drive_cost_rate: must be >= 0");
    if (scenario.retry_fraction < 0 || scenario.retry_fraction > 1)
        throw ScenarioError("scenario error at game.retry_fraction: must be in [0,1]");
    if (!(scenario.retry_mean_delay > 0))
        throw ScenarioError("scenario error at game.retry_mean_delay: must be > 0");
    if (scenario.blocking_estimator != "analytic" && scenario.blocking_estimator != "empirical")
        throw ScenarioError(
            "scenario error at game.blocking_estimator: expected analytic|empirical");
    if (!(scenario.horizon > 0))
        throw ScenarioError("scenario error at run.horizon: must be > 0");
    if (!(scenario.window > 0))
        throw ScenarioError("scenario error at run.window: must be > 0");
    const double n_windows = scenario.horizon / scenario.window;
    if (std::abs(n_windows - std::round(n_windows)) > 1e-9)
        throw ScenarioError(
            "scenario error at run.horizon: must be an integer multiple of run.window");
    if (scenario.replications < 1)
        throw ScenarioError("scenario error at run.replications: must be >= 1");
    if (scenario.estimator_windows < 1)
        throw ScenarioError("scenario error at run.estimator_windows: must be >= 1");
}

NetworkTopology scenario_topology(const Scenario& scenario) {
    NetworkTopology topology;
    topology.stations = scenario.stations;
    topology.s_max = scenario.s_max;
    topology.s_limit = scenario.s_limit;
    topology.distances = scenario.has_distances
                             ? scenario.distances
                             : distances_from_locations(scenario.stations);
    try {
        validate_topology(topology);
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(std::string("scenario error at topology: ") + e.what());
    }
    return topology;
}

Scenario scenario_from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("scenario parse error: ") + e.what());
    }

    Obj o(root, "$");
    Scenario sc;
    const int version = integer(o.need("schema_version"), "$.schema_version");
    if (version != 1) fail("$.schema_version", "unsupported schema version");
    sc.name = str(o.need("name"), "$.name");

    {
        const json& arr = o.need("stations");
        if (!arr.is_array() || arr.empty())
            fail("$.stations", "expected a nonempty array");
        for (std::size_t i = 0; i < arr.size(); ++i)
            sc.stations.push_back(
                parse_station(arr[i], "$.stations[" + std::to_string(i) + "]"));
    }

    {
        Obj t(o.need("topology"), "$.topology");
        sc.s_max = integer(t.need("s_max"), "$.topology.s_max");
        sc.s_limit = integer(t.need("s_limit"), "$.topology.s_limit");
        if (const json* d = t.opt("distances")) {
            if (!d->is_array() || d->size() != sc.stations.size())
                fail("$.topology.distances", "expected an N x N matrix");
            const int n = static_cast<int>(sc.stations.size());
            sc.distances.resize(n, n);
            for (int r = 0; r < n; ++r) {
                auto row = num_array((*d)[r],
                                     "$.topology.distances[" + std::to_string(r) + "]");
                if (static_cast<int>(row.size()) != n)
                    fail("$.topology.distances[" + std::to_string(r) + "]",
                         "expected an N x N matrix");
                for (int c = 0; c < n; ++c) sc.distances(r, c) = row[c];
            }
            sc.has_distances = true;
        }
        t.done();
    }

    {
        Obj d(o.need("demand"), "$.demand");
        {
            Obj sp(d.need("spatial"), "$.demand.spatial");
            sc.spatial.area = num(sp.need("area"), "$.demand.spatial.area");
            sc.spatial.hotspot_fraction =
                num(sp.need("hotspot_fraction"), "$.demand.spatial.hotspot_fraction");
            std::tie(sc.spatial.beta_x_a, sc.spatial.beta_x_b) =
                num_pair(sp.need("beta_x"), "$.demand.spatial.beta_x");
            std::tie(sc.spatial.beta_y_a, sc.spatial.beta_y_b) =
                num_pair(sp.need("beta_y"), "$.demand.spatial.beta_y");
            sc.spatial.patch_scale =
                num(sp.need("patch_scale"), "$.demand.spatial.patch_scale");
            sp.done();
            try {
                validate_spatial(sc.spatial);
            } catch (const std::invalid_argument& e) {
                fail("$.demand.spatial", e.what());
            }
        }
        {
            Obj pr(d.need("profile"), "$.demand.profile");
            const std::string kind = str(pr.need("kind"), "$.demand.profile.kind");
            if (kind == "constant") {
                sc.profile.kind = ProfileKind::constant;
                sc.profile.base = num(pr.need("rate"), "$.demand.profile.rate");
            } else if (kind == "sine") {
                sc.profile.kind = ProfileKind::sine;
                sc.profile.base = num(pr.need("base"), "$.demand.profile.base");
                sc.profile.amplitude =
                    num(pr.need("amplitude"), "$.demand.profile.amplitude");
                sc.profile.period = num(pr.need("period"), "$.demand.profile.period");
                if (const json* v = pr.opt("phase"))
                    sc.profile.phase = num(*v, "$.demand.profile.phase");
            } else if (kind == "table") {
                sc.profile.kind = ProfileKind::table;
                sc.profile.hourly = num_array(pr.need("hourly"), "$.demand.profile.hourly");
            } else {
                fail("$.demand.profile.kind", "expected constant|sine|table");
            }
            pr.done();
            try {
                validate_profile(sc.profile);
            } catch (const std::invalid_argument& e) {
                fail("$.demand.profile", e.what());
            }
        }
        if (const json* sh = d.opt("shares"))
            sc.shares = num_array(*sh, "$.demand.shares");
        d.done();
    }

    if (const json* g = o.opt("game")) {
        Obj go(*g, "$.game");
        if (const json* v = go.opt("gamma1")) sc.gamma1 = num(*v, "$.game.gamma1");
        if (const json* v = go.opt("gamma2")) sc.gamma2 = num(*v, "$.game.gamma2");
        if (const json* v = go.opt("xi")) sc.xi = num(*v, "$.game.xi");
        if (const json* v = go.opt("incentive_range"))
            std::tie(sc.incentive_lo, sc.incentive_hi) =
                num_pair(*v, "$.game.incentive_range");
        if (const json* v = go.opt("dissatisfaction_range"))
            std::tie(sc.dissatisfaction_lo, sc.dissatisfaction_hi) =
                num_pair(*v, "$.game.dissatisfaction_range");
        if (const json* v = go.opt("drive_cost_rate"))
            sc.drive_cost_rate = num(*v, "$.game.drive_cost_rate");
        if (const json* v = go.opt("retry_fraction"))
            sc.retry_fraction = num(*v, "$.game.retry_fraction");
        if (const json* v = go.opt("retry_mean_delay"))
            sc.retry_mean_delay = num(*v, "$.game.retry_mean_delay");
        if (const json* v = go.opt("blocking_estimator"))
            sc.blocking_estimator = str(*v, "$.game.blocking_estimator");
        go.done();
    }

    {
        Obj r(o.need("run"), "$.run");
        sc.seed = u64(r.need("seed"), "$.run.seed");
        sc.horizon = num(r.need("horizon"), "$.run.horizon");
        sc.replications = integer(r.need("replications"), "$.run.replications");
        sc.window = num(r.need("window"), "$.run.window");
        if (const json* v = r.opt("estimator_windows"))
            sc.estimator_windows = integer(*v, "$.run.estimator_windows");
        sc.tier = tier_from_string(str(r.need("tier"), "$.run.tier"));
        r.done();
    }

    o.done();
    try {
        validate_scenario(sc);
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
    }
    return sc;
}

std::string scenario_to_json(const Scenario& scenario) {
    json j;
    j["schema_version"] = 1;
    j["name"] = scenario.name;
    j["stations"] = json::array();
    for (const auto& s : scenario.stations) j["stations"].push_back(station_to_json(s));

    json topo;
    topo["s_max"] = scenario.s_max;
    topo["s_limit"] = scenario.s_limit;
    if (scenario.has_distances) {
        json rows = json::array();
        for (int r = 0; r < scenario.distances.rows(); ++r) {
            json row = json::array();
            for (int c = 0; c < scenario.distances.cols(); ++c)
                row.push_back(scenario.distances(r, c));
            rows.push_back(row);
        }
        topo["distances"] = rows;
    }
    j["topology"] = topo;

    json demand;
    demand["spatial"] = {
        {"area", scenario.spatial.area},
        {"hotspot_fraction", scenario.spatial.hotspot_fraction},
        {"beta_x", {scenario.spatial.beta_x_a, scenario.spatial.beta_x_b}},
        {"beta_y", {scenario.spatial.beta_y_a, scenario.spatial.beta_y_b}},
        {"patch_scale", scenario.spatial.patch_scale},
    };
    json profile;
    switch (scenario.profile.kind) {
        case ProfileKind::constant:
            profile["kind"] = "constant";
            profile["rate"] = scenario.profile.base;
            break;
        case ProfileKind::sine:
            profile["kind"] = "sine";
            profile["base"] = scenario.profile.base;
            profile["amplitude"] = scenario.profile.amplitude;
            profile["period"] = scenario.profile.period;
            profile["phase"] = scenario.profile.phase;
            break;
        case ProfileKind::table:
            profile["kind"] = "table";
            profile["hourly"] = scenario.profile.hourly;
            break;
    }
    demand["profile"] = profile;
    if (!scenario.shares.empty()) demand["shares"] = scenario.shares;
    j["demand"] = demand;

    j["game"] = {
        {"gamma1", scenario.gamma1},
        {"gamma2", scenario.gamma2},
        {"xi", scenario.xi},
        {"incentive_range", {scenario.incentive_lo, scenario.incentive_hi}},
        {"dissatisfaction_range", {scenario.dissatisfaction_lo, scenario.dissatisfaction_hi}},
        {"drive_cost_rate", scenario.drive_cost_rate},
        {"retry_fraction", scenario.retry_fraction},
        {"retry_mean_delay", scenario.retry_mean_delay},
        {"blocking_estimator", scenario.blocking_estimator},
    };
    j["run"] = {
        {"seed", scenario.seed},
        {"horizon", scenario.horizon},
        {"replications", scenario.replications},
        {"window", scenario.window},
        {"estimator_windows", scenario.estimator_windows},
        {"tier", tier_to_string(scenario.tier)},
    };
    return j.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return scenario_from_json(buf.str());
}

void save_scenario(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scenario file: " + path);
    out << scenario_to_json(scenario);
}

Scenario make_paper_network() {
    Scenario sc;
    sc.name = "paper-network";
    const int slots[5] = {7, 8, 8, 8, 8};
    const double xs[5] = {5, 10, 25, 15, 25};
    const double ys[5] = {25, 10, 25, 15, 5};
    const double thetas[5] = {0.5, 1.0, 1.0, 0.5, 0.5};
    for (int i = 0; i < 5; ++i) {
        StationConfig s;
        s.grid_slots = slots[i];
        s.storage_units = 8;
        s.charge_rate = 2.0;
        s.storage_recharge_rate = 3.0;
        s.qos_max = 0.05;
        s.qos_min = 1e-4;
        s.price_normal = 4.0;
        s.price_block_penalty = 6.0;
        s.theta = thetas[i];
        s.x = xs[i];
        s.y = ys[i];
        sc.stations.push_back(s);
    }
    sc.s_max = 39;
    sc.s_limit = 13;
    sc.profile.kind = ProfileKind::table;
    sc.profile.hourly = {12, 10, 9,  9,  10, 14, 22, 34, 44, 50, 52, 51,
                         50, 49, 50, 51, 52, 52, 50, 44, 36, 28, 20, 15};
    sc.shares = {0.01, 0.50, 0.42, 0.02, 0.05};
    sc.seed = 42;
    sc.horizon = 24.0;
    sc.replications = 20;
    sc.window = 0.25;
    sc.estimator_windows = 4;
    sc.tier = Tier::full;
    return sc;
}

Scenario make_paper_single_sine() {
    Scenario sc;
    sc.name = "paper-single-sine";
    StationConfig s;
    s.grid_slots = 5;
    s.storage_units = 5;
    s.charge_rate = 2.0;
    s.storage_recharge_rate = 4.0;
    s.qos_max = 0.01;
    s.qos_min = 1e-4;
    s.price_normal = 4.0;
    s.price_block_penalty = 5.0;
    s.theta = 0.5;
    s.x = 0.0;
    s.y = 0.0;
    sc.stations.push_back(s);
    sc.s_max = 5;
    sc.s_limit = 5;
    sc.profile.kind = ProfileKind::sine;
    sc.profile.base = 5.0;
    sc.profile.amplitude = 1.75;
    sc.profile.period = 80.0;
    sc.profile.phase = 20.0;
    sc.shares = {1.0};
    sc.seed = 7;
    sc.horizon = 160.0;
    sc.replications = 40;
    sc.window = 1.0;
    sc.estimator_windows = 2;
    sc.tier = Tier::full;
    return sc;
}

Scenario make_erlang_check() {
    Scenario sc;
    sc.name = "erlang-check";
    StationConfig s;
    s.grid_slots = 5;
    s.storage_units = 0;
    s.charge_rate = 2.0;
    s.storage_recharge_rate = 1.0;
    s.qos_max = 0.05;
    s.qos_min = 1e-4;
    s.price_normal = 4.0;
    s.price_block_penalty = 5.0;
    s.theta = 0.0;
    s.x = 0.0;
    s.y = 0.0;
    sc.stations.push_back(s);
    sc.s_max = 5;
    sc.s_limit = 5;
    sc.profile.kind = ProfileKind::constant;
    sc.profile.base = 8.0;
    sc.shares = {1.0};
    sc.retry_fraction = 0.0;
    sc.seed = 123;
    sc.horizon = 12500.0;
    sc.replications = 1;
    sc.window = 25.0;
    sc.estimator_windows = 1;
    sc.tier = Tier::baseline;
    return sc;
}

} // namespace evnet
