#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ccert/scenario.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ccert;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("goldfish schedule reproduces the closed-form constants") {
    GoldfishSchedule s = goldfish_schedule(1.0);
    // eps1/eps2 from the closed-form expression
    CHECK(s.eps1 == doctest::Approx(0.5841939203584998).epsilon(1e-12));
    CHECK(s.eps3 == doctest::Approx(std::sqrt(3.0) - 1).epsilon(1e-14));
    CHECK(0 < s.eps1);
    CHECK(s.eps1 < s.eps3);
    CHECK(s.eps3 < s.eps2);
    // support is [0, 10pi/3] with two unit-pi gaps
    CHECK(s.segments.front()[0] == 0.0);
    CHECK(s.segments.front()[1] == doctest::Approx(kPi / 3));
    CHECK(s.segments.front()[2] == doctest::Approx(s.eps1));
    CHECK(s.segments.back()[1] == doctest::Approx(10 * kPi / 3));
    double nonzero = 0;
    for (auto& [a, b, lvl] : s.segments) nonzero += b - a;
    CHECK(nonzero == doctest::Approx(4 * kPi / 3));
}

TEST_CASE("goldfish closure and checkpoint agreement") {
    GoldfishReport rep = goldfish(1.0, 1.0);
    CHECK(rep.closure_closed_form <= 1e-9);
    CHECK(rep.closure_numeric <= 1e-7);
    CHECK(rep.max_checkpoint_gap <= 1e-7);
    for (const auto& l : rep.aux_loops) {
        CHECK(l.i3_gain >= -1e-9);
        // constant one-period loop sweeps pi * level^2
        CHECK(l.i3_gain == doctest::Approx(kPi * l.level * l.level).epsilon(1e-9));
    }
}

TEST_CASE("goldfish input validation") {
    CHECK_THROWS_AS(goldfish(1.0, 0.5), std::invalid_argument);   // eps2 >= eps
    CHECK_THROWS_AS(goldfish(-0.1, 0.5), std::invalid_argument);  // eps2 <= 0
    CHECK_THROWS_AS(goldfish(0.5, 1.5), std::invalid_argument);   // eps > 1
}

TEST_CASE("goldfish exact path: constant control sanity") {
    // u = 1 from the origin with phi0 = 0: (I1,I2)(pi) = (0,2), I3(pi) = pi/2
    GoldfishSchedule s;
    s.eps1 = s.eps2 = s.eps3 = 1.0;
    s.segments = {{0.0, kPi, 1.0}};
    Eigen::Vector4d x = goldfish_exact_state(s, kPi, 0, 0, 0, 0);
    CHECK(x[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(x[2] == doctest::Approx(kPi / 2).epsilon(1e-12));
    CHECK(x[3] == doctest::Approx(kPi));
}

TEST_CASE("area property: 200 trials, no violations") {
    AreaTestStats st = area_property_test(200, 7);
    CHECK(st.trials == 200);
    CHECK(st.closed >= 150);  // most random draws project successfully
    CHECK(st.violations == 0);
    CHECK(st.min_gain >= -1e-8);
    CHECK(st.max_residual <= 1e-8);
}

TEST_CASE("area property: generated controls are nonnegative by construction") {
    // the generator draws uniforms in [0,1] and clips at zero during the
    // projection, so a sign-violating control cannot be produced
    for (int trial = 0; trial < 5; ++trial) {
        CounterRng rng{7, static_cast<std::uint64_t>(trial), 0};
        for (int k = 0; k < 24; ++k) CHECK(rng.uniform() >= 0.0);
    }
    AreaTestStats one = area_property_test(1, 42);
    CHECK(one.trials == 1);
}

TEST_CASE("mc_reach: inside verdict for the wide sector") {
    Scenario s = make_builtin("ex48", {{"theta", 0.3}, {"alpha", 0.5}, {"count", 17}});
    ReachCloud cloud = mc_reach(s.sys, s.u, s.points[0], 2 * kPi, 300, 11, 8,
                                ProjectionSpec::drop_angle(4), 1e-8);
    CHECK(cloud.skipped == 0);
    CHECK(cloud.endpoints.size() == 300);
    CHECK(cloud.hull == ReachCloud::Hull::Inside);
}

TEST_CASE("mc_reach: outside verdict and monotone drift for the tilted sector") {
    Scenario s = make_builtin("ex48", {{"theta", 0.7}, {"alpha", 0.5}, {"count", 17}});
    ReachCloud cloud = mc_reach(s.sys, s.u, s.points[0], 2 * kPi, 200, 11, 8,
                                ProjectionSpec::drop_angle(4), 1e-8);
    CHECK(cloud.hull != ReachCloud::Hull::Inside);
    // every endpoint drifts upward along I3 (the obstruction direction)
    for (const auto& e : cloud.endpoints) CHECK(e[2] >= -1e-9);
}

TEST_CASE("mc_reach: endpoints re-integrate from their stored controls") {
    Scenario s = make_builtin("ex52", {});
    ReachCloud cloud = mc_reach(s.sys, s.u, s.points[0], 2 * kPi, 20, 3, 8, {}, 1e-10);
    REQUIRE(cloud.full_endpoints.size() == 20);
    for (std::size_t i = 0; i < cloud.full_endpoints.size(); ++i) {
        std::vector<std::pair<double, Eigen::VectorXd>> schedule;
        for (int k = 0; k < cloud.controls[i].rows(); ++k)
            schedule.push_back({cloud.dt, cloud.controls[i].row(k).transpose()});
        Eigen::VectorXd again = integrate_piecewise(s.sys, s.points[0], schedule, 1e-10);
        CHECK((again - cloud.full_endpoints[i]).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
}

TEST_CASE("mc_reach: deterministic given the seed") {
    Scenario s = make_builtin("ex52", {});
    ReachCloud a = mc_reach(s.sys, s.u, s.points[0], kPi, 10, 99, 4, {}, 1e-9);
    ReachCloud b = mc_reach(s.sys, s.u, s.points[0], kPi, 10, 99, 4, {}, 1e-9);
    CHECK(a.to_csv() == b.to_csv());
    ReachCloud c = mc_reach(s.sys, s.u, s.points[0], kPi, 10, 100, 4, {}, 1e-9);
    CHECK(a.to_csv() != c.to_csv());
    CHECK_THROWS_AS(mc_reach(s.sys, s.u, s.points[0], kPi, 0, 1, 4, {}, 1e-9),
                    std::invalid_argument);

    // worker count must not change the artifacts
    setenv("CCERT_THREADS", "3", 1);
    ReachCloud d = mc_reach(s.sys, s.u, s.points[0], kPi, 10, 99, 4, {}, 1e-9);
    unsetenv("CCERT_THREADS");
    CHECK(a.to_csv() == d.to_csv());
}

TEST_CASE("builtin scenarios resolve") {
    for (const auto& n : builtin_names()) {
        Scenario s = make_builtin(n, {});
        CHECK(!s.points.empty());
        CHECK(validate(s.sys, s.u).empty());
    }
    CHECK_THROWS_AS(make_builtin("nope", {}), std::invalid_argument);
}

TEST_CASE("config ingestion round trip") {
    nlohmann::json cfg;
    cfg["name"] = "inline-system";
    cfg["coords"] = nlohmann::json::array({"I", "phi"});
    cfg["omega"] = "1";
    cfg["controls"] = nlohmann::json::array({nlohmann::json::array({"1", "0"})});
    cfg["control_set"] = {{"type", "interval"}, {"lo", 0.0}, {"hi", 1.0}};
    cfg["point"] = nlohmann::json::array({0.0, 0.0});
    cfg["checks"] = nlohmann::json::array({"obstruction_orbital"});
    Scenario s = scenario_from_json(cfg);
    CHECK(s.name == "inline-system");
    CHECK(s.sys.product_form);
    CHECK(s.points.size() == 1);
    REQUIRE(s.checks.size() == 1);
    CHECK(s.checks[0].name == "obstruction_orbital");

    nlohmann::json builtin_cfg = {{"builtin", "toy"}};
    Scenario t = scenario_from_json(builtin_cfg);
    CHECK(t.checks.size() == 2);

    nlohmann::json bad = {{"name", "no-point"}};
    CHECK_THROWS_AS(scenario_from_json(bad), std::exception);
}

TEST_CASE("control_set_from_json covers every variant") {
    auto parse = [](const char* text) { return control_set_from_json(nlohmann::json::parse(text)); };
    CHECK(parse(R"({"type":"interval","lo":-1,"hi":2})").dim() == 1);
    CHECK(parse(R"({"type":"box","bounds":[[-1,1],[0,2]]})").dim() == 2);
    CHECK(parse(R"({"type":"polytope","vertices":[[0,0],[1,0],[0,1]]})").dim() == 2);
    CHECK(parse(R"({"type":"disk_sector","half_angle":0.4})").dim() == 2);
    CHECK(parse(R"({"type":"scaled","epsilon":0.5,"inner":{"type":"interval","lo":0,"hi":1}})")
              .dim() == 1);
    CHECK(parse(R"({"type":"product","factors":[
            {"type":"interval","lo":0,"hi":1},{"type":"interval","lo":-1,"hi":1}]})")
              .dim() == 2);
    CHECK_THROWS_AS(parse(R"({"type":"blob"})"), std::invalid_argument);
}

TEST_CASE("run_scenario writes the sufficient-met certificate for the wide sector") {
    Scenario s = make_builtin("ex48", {{"theta", 0.3}, {"alpha", 0.5}, {"count", 17}});
    s.checks = {{"one_period_proj", 0}};
    s.refine.initial_steps = 17;
    s.refine.max_steps = 257;
    s.output_dir = "/tmp/ccert_ex48_unit";
    std::ostringstream log;
    CHECK(run_scenario(s, log) == 0);
    std::ifstream f("/tmp/ccert_ex48_unit/certificates.json");
    nlohmann::json certs;
    f >> certs;
    REQUIRE(certs.is_array());
    REQUIRE(!certs.empty());
    CHECK(certs[0]["status"] == "sufficient-met");
    CHECK(certs[0]["witness"]["kind"] == "positive-combination");
    std::filesystem::remove_all("/tmp/ccert_ex48_unit");
}

TEST_CASE("run_scenario writes reproducible artifacts") {
    Scenario s = make_builtin("toy", {});
    s.mc.samples = 25;
    s.mc.seed = 5;
    s.refine.initial_steps = 17;
    s.refine.max_steps = 129;

    auto run_once = [&](const std::string& dir) {
        Scenario copy = s;
        copy.output_dir = dir;
        std::ostringstream log;
        int rc = run_scenario(copy, log);
        CHECK(rc == 0);
        std::ifstream certs(dir + "/certificates.json", std::ios::binary);
        std::stringstream cbuf;
        cbuf << certs.rdbuf();
        std::ifstream cloud(dir + "/cloud_0.csv", std::ios::binary);
        std::stringstream dbuf;
        dbuf << cloud.rdbuf();
        return std::make_pair(cbuf.str(), dbuf.str());
    };
    auto [certs1, cloud1] = run_once("/tmp/ccert_test_out1");
    auto [certs2, cloud2] = run_once("/tmp/ccert_test_out2");
    CHECK(certs1 == certs2);  // byte-identical
    CHECK(cloud1 == cloud2);
    CHECK(certs1.find("obstructed") != std::string::npos);
    CHECK(cloud1.substr(0, 13) == "sample,coord0");
    std::filesystem::remove_all("/tmp/ccert_test_out1");
    std::filesystem::remove_all("/tmp/ccert_test_out2");
}
