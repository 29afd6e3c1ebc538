#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "evnet/scenario.hpp"

using namespace evnet;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("tier names round trip") {
    for (Tier t : {Tier::baseline, Tier::allocation, Tier::full})
        CHECK(tier_from_string(tier_to_string(t)) == t);
    CHECK_THROWS_AS(tier_from_string("turbo"), ScenarioError);
}

TEST_CASE("presets validate") {
    CHECK_NOTHROW(validate_scenario(make_paper_network()));
    CHECK_NOTHROW(validate_scenario(make_paper_single_sine()));
    CHECK_NOTHROW(validate_scenario(make_erlang_check()));
}

TEST_CASE("json round trip preserves every field") {
    for (const Scenario& sc :
         {make_paper_network(), make_paper_single_sine(), make_erlang_check()}) {
        const Scenario back = scenario_from_json(scenario_to_json(sc));
        CHECK(back == sc);
    }
}

TEST_CASE("file round trip") {
    const std::string path = temp_path("evnet_roundtrip.json");
    const Scenario sc = make_paper_network();
    save_scenario(sc, path);
    const Scenario back = load_scenario(path);
    CHECK(back == sc);
    std::remove(path.c_str());
}

TEST_CASE("missing file is a load error") {
    CHECK_THROWS_AS(load_scenario(temp_path("evnet_nonexistent_xyz.json")),
                    ScenarioError);
}

TEST_CASE("unknown keys are rejected with their path") {
    auto j = nlohmann::ordered_json::parse(scenario_to_json(make_erlang_check()));

    SUBCASE("top level") {
        j["bogus"] = 1;
        CHECK_THROWS_WITH_AS(scenario_from_json(j.dump()),
                             doctest::Contains("bogus"), ScenarioError);
    }
    SUBCASE("inside a station") {
        j["stations"][0]["colour"] = "red";
        try {
            scenario_from_json(j.dump());
            FAIL("expected a scenario error");
        } catch (const ScenarioError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("colour") != std::string::npos);
            CHECK(msg.find("stations[0]") != std::string::npos);
        }
    }
    SUBCASE("inside run") {
        j["run"]["speed"] = 9;
        CHECK_THROWS_WITH_AS(scenario_from_json(j.dump()),
                             doctest::Contains("run"), ScenarioError);
    }
}

TEST_CASE("invariant violations carry a field path") {
    auto base = nlohmann::ordered_json::parse(scenario_to_json(make_paper_network()));

    SUBCASE("blocking weights must sum to one") {
        auto j = base;
        j["game"]["gamma1"] = 0.5;
        j["game"]["gamma2"] = 0.6;
        CHECK_THROWS_WITH_AS(scenario_from_json(j.dump()),
                             doctest::Contains("gamma"), ScenarioError);
    }
    SUBCASE("demand shares must sum to one") {
        auto j = base;
        j["demand"]["shares"][0] = 0.9;
        CHECK_THROWS_WITH_AS(scenario_from_json(j.dump()),
                             doctest::Contains("shares"), ScenarioError);
    }
    SUBCASE("horizon must cover whole windows") {
        auto j = base;
        j["run"]["horizon"] = 24.1;
        CHECK_THROWS_WITH_AS(scenario_from_json(j.dump()),
                             doctest::Contains("horizon"), ScenarioError);
    }
    SUBCASE("schema version is pinned") {
        auto j = base;
        j["schema_version"] = 2;
        CHECK_THROWS_WITH_AS(scenario_from_json(j.dump()),
                             doctest::Contains("schema_version"), ScenarioError);
    }
    SUBCASE("station invariants surface the station path") {
        auto j = base;
        j["stations"][2]["charge_rate"] = 0.0;
        CHECK_THROWS_WITH_AS(scenario_from_json(j.dump()),
                             doctest::Contains("stations[2]"), ScenarioError);
    }
    SUBCASE("unknown tier") {
        auto j = base;
        j["run"]["tier"] = "hyper";
        CHECK_THROWS_AS(scenario_from_json(j.dump()), ScenarioError);
    }
}

TEST_CASE("shipped preset files match the built-in presets") {
    const std::string dir = EVNET_SCENARIO_DIR;
    CHECK(load_scenario(dir + "/paper-network.json") == make_paper_network());
    CHECK(load_scenario(dir + "/paper-single-sine.json") == make_paper_single_sine());
    CHECK(load_scenario(dir + "/erlang-check.json") == make_erlang_check());
}

TEST_CASE("paper-network preset carries the expected operating point") {
    const Scenario sc = make_paper_network();
    REQUIRE(sc.stations.size() == 5);
    CHECK(sc.s_max == 39);
    CHECK(sc.s_limit == 13);
    CHECK(sc.stations[0].grid_slots == 7);
    for (int i = 1; i < 5; ++i) CHECK(sc.stations[i].grid_slots == 8);
    for (const auto& st : sc.stations) {
        CHECK(st.storage_units == 8);
        CHECK(st.charge_rate == 2.0);
        CHECK(st.storage_recharge_rate == 3.0);
        CHECK(st.qos_max == 0.05);
        CHECK(st.price_normal == 4.0);
        CHECK(st.price_block_penalty == 6.0);
    }
    CHECK(sc.shares == std::vector<double>{0.01, 0.50, 0.42, 0.02, 0.05});
    REQUIRE(sc.profile.kind == ProfileKind::table);
    CHECK(sc.profile.hourly[10] == 52.0);
    CHECK(sc.gamma1 == 0.45);
    CHECK(sc.gamma2 == 0.55);
    CHECK(sc.window == 0.25);
    CHECK(sc.tier == Tier::full);
}

TEST_CASE("topology derives distances from coordinates") {
    const Scenario sc = make_paper_network();
    const NetworkTopology topo = scenario_topology(sc);
    CHECK(topo.s_max == 39);
    CHECK(topo.s_limit == 13);
    CHECK(topo.distances(1, 3) == doctest::Approx(std::sqrt(50.0)));
    CHECK(topo.distances(0, 0) == 0.0);
}

TEST_CASE("explicit distance matrices are honored") {
    Scenario sc = make_erlang_check();
    sc.has_distances = true;
    sc.distances = Eigen::MatrixXd::Zero(1, 1);
    const std::string text = scenario_to_json(sc);
    const Scenario back = scenario_from_json(text);
    CHECK(back.has_distances);
    CHECK(back == sc);
}
