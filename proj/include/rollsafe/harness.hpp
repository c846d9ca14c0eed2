#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rollsafe/barrier.hpp"
#include "rollsafe/qp.hpp"
#include "rollsafe/scenario.hpp"

namespace rollsafe {

// u_v = K_v d_g, u_w = K_w (y_g - y)/d_g - K_w sin(theta), clamped to the box.
// Returns (0, 0) inside goal_tolerance.
ControlInput nominal_control(const RobotState& state, const Goal& goal, const NominalGains& gains,
                             const InputBox& box, double goal_tolerance = 0.05);

struct TraceRecord {
    double t = 0.0;
    RobotState state;
    std::array<Estimate, 2> est;  // g_y, g_z
    double g_y = 0.0, g_z = 0.0;  // truth
    double g_y_rate = 0.0, g_z_rate = 0.0;
    double p_y = 0.0, p_z = 0.0;  // measured
    ControlInput u_nom;
    ControlInput u;
    double h1 = 0.0, h2 = 0.0;      // truth
    double h1_M = 0.0, h2_M = 0.0;  // at the estimates, minus L_h M
    double y_Z = 0.0;
    double M = 0.0, M_rate = 0.0;
    double delta_bar = 0.0;
    double delta = 0.0;  // |omega d_v + v d_omega|
    DisturbanceSample d;
    // Applied rows; NaN when the filter adds none.
    double beta1 = 0.0, beta2 = 0.0;
    // Shadow rows of both dacbf forms for the conservatism comparison; NaN
    // outside the dacbf filters.
    double def4_beta1 = 0.0, def4_beta2 = 0.0;
    double cor1_beta1 = 0.0, cor1_beta2 = 0.0;
    // Input-free part of dh_M/dt and the input row for each barrier (h_M uses
    // the estimates and the live envelope for every filter).
    double drift1 = 0.0, drift2 = 0.0;
    std::array<double, 2> row1{}, row2{};
    QpStatus qp_status = QpStatus::optimal;
    std::string active_set = "-";
    double slack = 0.0;
};

struct RunSummary {
    std::string variant;
    std::uint64_t seed = 0;
    bool completed = true;
    std::string error;
    std::size_t steps = 0;

    double min_h1 = 0.0;
    double min_h2 = 0.0;
    double min_h = 0.0;
    double t_min_h = 0.0;
    bool violated = false;  // min_h < -safety_tol

    double final_distance = 0.0;
    std::optional<double> time_to_goal;

    std::size_t infeasible_count = 0;
    double max_slack = 0.0;
    std::size_t envelope_violations = 0;
    double max_delta = 0.0;
    // realized |delta| <= delta_bar(t) at every step; empty for filters without a bound
    std::optional<bool> delta_sound;
    double noise_sup = 0.0;
    // Steps where the cor1 row is less conservative than def4 (dacbf only).
    std::size_t cor1_looser_steps = 0;

    std::vector<ScheduleReport> schedules;
    bool schedules_pass() const;
};

struct RunResult {
    std::vector<TraceRecord> trace;
    RunSummary summary;
};

NoiseTrack make_noise(const Scenario& scenario);

// Robot dynamics with disturbance plus both HGOs driven by the continuous
// measurement, under a held input u.
std::array<double, AugmentedState::kSize> augmented_rhs(const Scenario& scenario,
                                                        const NoiseTrack& noise, double t,
                                                        const std::array<double, AugmentedState::kSize>& x,
                                                        const ControlInput& u);

// Envelope shared by every run of the scenario (independent of the first sample).
DifferentiatorBank make_bank(const Scenario& scenario, std::span<const double> first_measurements);

// Schedule checks relevant to the scenario's filter.
std::vector<ScheduleReport> schedule_reports(const Scenario& scenario);

// Closed loop: measure, update differentiators, assemble rows, QP, hold the
// input and integrate. Numerical failures end the run early with
// summary.completed = false.
RunResult run(const Scenario& scenario);

struct ComparisonRow {
    Variant variant;
    RunSummary summary;
};

// Runs every variant with the base seed and signals. An empty list runs the
// base filter alone.
std::vector<ComparisonRow> compare(const Scenario& base, const std::vector<Variant>& variants,
                                   std::vector<RunResult>* results = nullptr);

Scenario with_variant(const Scenario& base, const Variant& variant);

}  // namespace rollsafe
