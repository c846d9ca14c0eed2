#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rollsafe/barrier.hpp"
#include "rollsafe/differentiator.hpp"
#include "rollsafe/sysmodel.hpp"

namespace rollsafe {

enum class FilterKind { none, cbf_qp_bd, pssf_const, dacbf_def4, dacbf_cor1 };

const char* filter_name(FilterKind kind);
FilterKind parse_filter(const std::string& name);

// A filter choice plus its constant bound (pssf_const only).
// Text form: "none", "cbf_qp_bd", "pssf_const:0.5", "dacbf_def4", "dacbf_cor1".
struct Variant {
    FilterKind filter = FilterKind::dacbf_def4;
    double pssf_delta_bar = 0.0;

    // File-name-safe key, e.g. "pssf_const_0.5".
    std::string key() const;
    std::string text() const;
};

Variant parse_variant(const std::string& text);
std::vector<Variant> parse_variant_list(const std::string& csv);

struct Goal {
    double x = 0.0;
    double y = 0.0;
};

struct NominalGains {
    double K_v = 1.0;
    double K_omega = 1.0;
};

struct Scenario {
    TerrainProfile terrain;
    NoiseConfig noise;
    DisturbanceModel disturbance;
    GeometryParams geometry;
    ActuatorParams actuator;
    InputBox box;
    RobotState initial;
    Goal goal;
    NominalGains gains;

    Variant variant;
    double alpha_c = 2.0;
    DeltaBarSchedule delta_bar;  // time-varying bound for the dacbf filters
    DifferentiatorConfig differentiator;

    double horizon = 8.0;        // s
    double control_rate = 50.0;  // Hz
    int substeps = 4;
    double goal_tolerance = 0.05;  // m
    double safety_tol = 1e-3;      // truth-h below -safety_tol counts as a violation
    double schedule_grid_step = 0.01;
    std::uint64_t seed = 1;

    CbfAuditGrid audit;

    void validate() const;
    double control_period() const { return 1.0 / control_rate; }
    std::size_t steps() const;
    BarrierContext barrier_context() const { return {geometry, actuator, differentiator.hgo}; }
};

// The rollover-critical 27 degree scenario.
Scenario default_scenario();

// Nested JSON; every key optional, unknown keys rejected with ConfigError.
Scenario scenario_from_json_text(const std::string& text, const Scenario& base = default_scenario());
Scenario load_scenario(const std::string& path);
std::string scenario_to_json_text(const Scenario& scenario);

}  // namespace rollsafe
