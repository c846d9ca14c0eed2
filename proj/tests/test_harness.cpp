#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "rollsafe/harness.hpp"
#include "rollsafe/trace_io.hpp"

using namespace rollsafe;

namespace {

Scenario short_scenario(FilterKind f) {
    Scenario sc = default_scenario();
    sc.horizon = 1.0;
    sc.variant.filter = f;
    return sc;
}

std::string csv_of(const RunResult& r) {
    std::ostringstream os;
    write_trace_csv(os, r.trace);
    return os.str();
}

}  // namespace

TEST_CASE("nominal controller examples") {
    const InputBox box;
    CHECK(nominal_control({1, 0, 0, 0, 0}, {1, 0}, {1, 1}, box).u_v == 0.0);
    const auto a = nominal_control({0, 0, 0, 0, 0}, {1, 0}, {1, 1}, box);
    CHECK(a.u_v == doctest::Approx(1.0));
    CHECK(a.u_omega == doctest::Approx(0.0));
    const auto b = nominal_control({0, 0, kPi / 2, 0, 0}, {0, 1}, {1, 1}, box);
    CHECK(b.u_v == doctest::Approx(1.0));
    CHECK(b.u_omega == doctest::Approx(0.0).epsilon(1e-12));
    const auto c = nominal_control({0, 0, 0, 0, 0}, {10, 0}, {1, 1}, box);
    CHECK(c.u_v == 3.0);
}

TEST_CASE("variant parsing") {
    const auto v = parse_variant("pssf_const:0.5");
    CHECK(v.filter == FilterKind::pssf_const);
    CHECK(v.pssf_delta_bar == 0.5);
    CHECK(v.key() == "pssf_const_0.5");
    CHECK(v.text() == "pssf_const:0.5");
    CHECK(parse_variant("dacbf_def4").key() == "dacbf_def4");
    CHECK_THROWS_AS(parse_variant("pssf_const"), ConfigError);
    CHECK_THROWS_AS(parse_variant("none:1"), ConfigError);
    CHECK_THROWS_AS(parse_variant("pssf_const:abc"), ConfigError);
    CHECK_THROWS_AS(parse_variant("lqr"), ConfigError);
    CHECK(parse_variant_list("none,dacbf_def4").size() == 2);
    CHECK(parse_variant_list("").empty());
}

TEST_CASE("config overrides and unknown keys") {
    const auto sc = scenario_from_json_text(R"({"simulation": {"seed": 7}, "controller": {"filter": "none"}})");
    CHECK(sc.seed == 7);
    CHECK(sc.variant.filter == FilterKind::none);
    CHECK(sc.alpha_c == default_scenario().alpha_c);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"simulation": {"sede": 7}})"), ConfigError);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"bogus": 1})"), ConfigError);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"simulation": {"horizon": "long"}})"), ConfigError);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"simulation": {"horizon": -1}})"), ConfigError);
    CHECK_THROWS_AS(scenario_from_json_text("{not json"), ConfigError);
    try {
        scenario_from_json_text(R"({"terrain": {"roll_end": 3}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("terrain.roll_end") != std::string::npos);
    }
    const auto round = scenario_from_json_text(scenario_to_json_text(default_scenario()));
    CHECK(scenario_to_json_text(round) == scenario_to_json_text(default_scenario()));
}

TEST_CASE("runs are deterministic and seed-dependent") {
    const auto sc = short_scenario(FilterKind::dacbf_def4);
    const auto a = run(sc);
    const auto b = run(sc);
    CHECK(csv_of(a) == csv_of(b));
    CHECK(summary_to_json(a.summary) == summary_to_json(b.summary));
    Scenario other = sc;
    other.seed = 2;
    CHECK(csv_of(run(other)) != csv_of(a));
    CHECK(a.trace.size() == sc.steps() + 1);
    for (std::size_t i = 1; i < a.trace.size(); ++i) CHECK(a.trace[i].t > a.trace[i - 1].t);
}

TEST_CASE("trace csv layout") {
    const auto r = run(short_scenario(FilterKind::none));
    const auto text = csv_of(r);
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    CHECK(line == "# schema=rollsafe-trace/1");
    std::getline(is, line);
    CHECK(line.rfind("t,x,y,theta,omega,v", 0) == 0);
    const auto ncols = trace_columns().size();
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        CHECK(static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) == ncols - 1);
    }
    CHECK(rows == r.trace.size());
}

TEST_CASE("summary fields") {
    const auto r = run(short_scenario(FilterKind::dacbf_def4));
    const auto& s = r.summary;
    CHECK(s.completed);
    CHECK(s.min_h == std::min(s.min_h1, s.min_h2));
    CHECK(s.noise_sup <= default_scenario().noise.v_inf);
    CHECK(s.envelope_violations == 0);
    CHECK(s.delta_sound.has_value());
    const auto j = nlohmann::json::parse(summary_to_json(s));
    CHECK(j.at("variant") == "dacbf_def4");
    CHECK(j.contains("schedules"));

    const auto n = run(short_scenario(FilterKind::none));
    CHECK_FALSE(n.summary.delta_sound.has_value());
    for (const auto& rec : n.trace) CHECK(std::isnan(rec.beta1));
}

TEST_CASE("compare shares signals across variants") {
    const Scenario base = short_scenario(FilterKind::dacbf_def4);
    const auto only = compare(base, {});
    REQUIRE(only.size() == 1);
    CHECK(only[0].variant.filter == FilterKind::dacbf_def4);

    std::vector<RunResult> results;
    const auto rows = compare(base, parse_variant_list("none,cbf_qp_bd,pssf_const:0.5"), &results);
    REQUIRE(rows.size() == 3);
    REQUIRE(results.size() == 3);
    for (std::size_t k = 0; k < results[0].trace.size(); ++k) {
        CHECK(results[0].trace[k].g_y == results[1].trace[k].g_y);
        CHECK(results[0].trace[k].p_y - results[0].trace[k].g_y ==
              doctest::Approx(results[2].trace[k].p_y - results[2].trace[k].g_y).epsilon(1e-15));
    }
    const auto j = nlohmann::json::parse(comparison_to_json(base, rows));
    CHECK(j.at("runs").size() == 3);
}

TEST_CASE("non-finite dynamics end the run with a partial trace") {
    Scenario sc = short_scenario(FilterKind::dacbf_def4);
    sc.disturbance.v = {1.0, 0.0, 0.0, 1e300, 0.0, 0.0};
    sc.disturbance.omega = {1.0, 0.0, 0.0, 1e300, 0.0, 0.0};
    const auto r = run(sc);
    CHECK_FALSE(r.summary.completed);
    CHECK_FALSE(r.summary.error.empty());
    CHECK(r.trace.size() < sc.steps() + 1);
}
