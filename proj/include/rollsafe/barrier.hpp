#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "rollsafe/constraint.hpp"
#include "rollsafe/differentiator.hpp"
#include "rollsafe/sysmodel.hpp"

namespace rollsafe {

// h1 guards the right track edge, h2 the left.
enum class Barrier { h1, h2 };

const char* barrier_name(Barrier which);

struct GeometryParams {
    double b = 0.30;     // half-track width, m
    double l_cg = 0.40;  // CG height above ground, m
    // Only used by the general ZMP expression.
    double mass = 20.0;
    double I_x = 0.5;
    double I_y = 0.8;
    double I_z = 1.0;

    void validate() const;
    double ratio() const { return b / l_cg; }
};

// Lateral ZMP coordinate with the quasi-static body accelerations substituted.
double zmp_lateral(double v, double omega, double g_y, double g_z, const GeometryParams& geom);

// Body accelerations and rates of the full moment balance.
struct ZmpBodyTerms {
    double y_ddot = 0.0;     // lateral body acceleration
    double z_ddot = 0.0;     // normal body acceleration
    double roll_accel = 0.0;
    double pitch_rate = 0.0;
};

// Moment balance about the ZMP solved for y_Z. Agrees with zmp_lateral when
// y_ddot = -v omega and the remaining terms vanish.
double zmp_lateral_general(double omega, double g_y, double g_z, const ZmpBodyTerms& terms,
                           const GeometryParams& geom);

// h1 = v w - (b/l) g_z - g_y,  h2 = -v w - (b/l) g_z + g_y
double eval_h(Barrier which, double v, double omega, double g_y, double g_z,
              const GeometryParams& geom);

// Gradient of h with respect to (g_y, g_z).
std::array<double, 2> param_gradient(Barrier which, const GeometryParams& geom);
// Euclidean norm of param_gradient.
double lipschitz_constant(Barrier which, const GeometryParams& geom);

struct Estimate {
    double mu1 = 0.0;
    double mu2 = 0.0;
};

// Robot state plus the differentiator estimates for (g_y, g_z).
struct AugmentedState {
    RobotState robot;
    std::array<Estimate, 2> est;  // [0] = g_y, [1] = g_z

    static constexpr std::size_t kSize = 9;
    std::array<double, kSize> pack() const;
    static AugmentedState unpack(const std::array<double, kSize>& x);
};

struct Measurement {
    double p_y = 0.0;
    double p_z = 0.0;
};

struct AlphaLinear {
    double alpha_c = 1.0;

    void validate() const;
    double operator()(double h) const { return alpha_c * h; }
};

// delta_bar(t) = a e^{-c t} + b0
struct DeltaBarSchedule {
    double a = 0.0;
    double c = 0.0;
    double b0 = 0.0;

    void validate() const;
    double value(double t) const { return a * std::exp(-c * t) + b0; }
    double rate(double t) const { return -a * c * std::exp(-c * t); }
};

struct BarrierEval {
    double h = 0.0;    // at the estimates
    double h_M = 0.0;  // h - L_h M
    double L_h = 0.0;
    std::array<double, 5> grad_x{};  // over (x, y, theta, omega, v)
    std::array<double, 2> dh_dp{};   // over the mu1 estimates (g_y, g_z)
    double drift = 0.0;              // input-free part of dh_M/dt
    std::array<double, 2> input_row{};
};

struct BarrierContext {
    GeometryParams geom;
    ActuatorParams actuator;
    HgoParams hgo;
};

// Evaluates h at the estimates, subtracts L_h M, and fills the Lie-derivative
// terms along the augmented (robot + HGO) flow.
BarrierEval eval_h_M(Barrier which, const AugmentedState& aug, const Measurement& p, double M,
                     double M_rate, const BarrierContext& ctx);

enum class DacbfMode { DefFour, CorollaryOne };

// DefFour:      a.u >= -alpha(h_M) - drift_M       (drift_M includes -L_h M')
// CorollaryOne: a.u >= -alpha_c h - drift + alpha_c delta_bar(t)
ConstraintRow assemble_dacbf_row(Barrier which, const AugmentedState& aug, double t,
                                 const DifferentiatorBank& bank,
                                 const std::optional<Measurement>& p, const BarrierContext& ctx,
                                 const AlphaLinear& alpha, DacbfMode mode,
                                 const std::optional<DeltaBarSchedule>& delta_bar);

// Constant-bound projection-to-state row: a.u >= -alpha(h - delta_bar) - drift,
// h and drift from the HGO estimates, no envelope.
ConstraintRow assemble_pssf_row(Barrier which, const AugmentedState& aug,
                                const std::optional<Measurement>& p, const BarrierContext& ctx,
                                const AlphaLinear& alpha, double delta_bar);

// Plain CBF row evaluated on raw measurements with externally supplied
// parameter rates (the backward-difference baseline).
ConstraintRow assemble_raw_cbf_row(Barrier which, const RobotState& state, const Measurement& p,
                                   double g_y_rate, double g_z_rate, const BarrierContext& ctx,
                                   const AlphaLinear& alpha);

struct ScheduleReport {
    std::string name;
    bool pass = true;
    std::optional<double> first_violation_t;
    double min_margin = 0.0;  // min over the grid of (rhs - lhs)
    std::size_t grid_points = 0;
};

// -delta_bar' + delta_bar <= -alpha(-delta_bar) on t = 0, step, ..., horizon.
ScheduleReport check_tpssf_schedule(const DeltaBarSchedule& delta_bar, const AlphaLinear& alpha,
                                    double horizon, double grid_step);

using TimeFunction = std::function<double(double)>;

// -L_h M'(t) + delta_bar(t) <= alpha_c L_h M(t) on the grid.
ScheduleReport check_theorem3_condition(double L_h, const TimeFunction& M,
                                        const TimeFunction& M_rate,
                                        const DeltaBarSchedule& delta_bar,
                                        const AlphaLinear& alpha, double horizon,
                                        double grid_step);

// Literal premises of the linear-alpha sufficient condition: alpha_c >= 1 and
// M' <= -alpha_c M on the grid.
ScheduleReport check_corollary_premises(const TimeFunction& M, const TimeFunction& M_rate,
                                        const AlphaLinear& alpha, double horizon,
                                        double grid_step);

// L_h (M' + alpha_c M) <= alpha_c delta_bar(t): the pointwise condition under
// which the CorollaryOne row is at least as conservative as the DefFour row.
ScheduleReport check_corollary_dominance(double L_h, const TimeFunction& M,
                                         const TimeFunction& M_rate,
                                         const DeltaBarSchedule& delta_bar,
                                         const AlphaLinear& alpha, double horizon,
                                         double grid_step);

struct CbfAuditGrid {
    double v_min = -3.0, v_max = 3.0;
    double omega_min = -2.0, omega_max = 2.0;
    double roll_min = deg_to_rad(-27.0), roll_max = deg_to_rad(27.0);
    std::size_t v_points = 61;  // odd counts put a node on zero
    std::size_t omega_points = 41;
    std::size_t roll_points = 19;
    double gravity = 9.81;

    void validate() const;
    std::size_t total() const { return v_points * omega_points * roll_points; }
    double v_at(std::size_t i) const;
    double omega_at(std::size_t j) const;
    double roll_at(std::size_t k) const;
};

struct CbfAuditReport {
    std::string barrier;
    std::size_t points_checked = 0;    // grid points inside the safe set
    std::size_t degenerate_points = 0;  // ||L_g h|| below tolerance
    std::size_t necessary_violations = 0;
    std::size_t bounded_input_violations = 0;  // sup over the box < -alpha(h)
    std::optional<std::array<double, 3>> first_violation;  // (v, omega, roll)
    bool pass() const { return necessary_violations == 0 && bounded_input_violations == 0; }
};

// Audit of the CBF condition at static slopes. At points of the safe set where
// ||L_g h|| < 1e-8 (1 + ||state||) checks L_f h >= -alpha(h); everywhere in the
// safe set also checks the bounded-input supremum over the box vertices.
// Serial reference; the OpenMP kernel lives in batch.hpp.
CbfAuditReport verify_cbf_candidate(Barrier which, const CbfAuditGrid& grid, const InputBox& box,
                                    const AlphaLinear& alpha, const GeometryParams& geom,
                                    const ActuatorParams& actuator);

// Per-point audit used by both the serial and parallel drivers.
struct CbfAuditPoint {
    bool in_safe_set = false;
    bool degenerate = false;
    bool necessary_violation = false;
    bool bounded_violation = false;
};
CbfAuditPoint audit_cbf_point(Barrier which, double v, double omega, double roll, double gravity,
                              const InputBox& box, const AlphaLinear& alpha,
                              const GeometryParams& geom, const ActuatorParams& actuator);

}  // namespace rollsafe
