#include "rollsafe/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rollsafe {

const char* barrier_name(Barrier which) { return which == Barrier::h1 ? "h1" : "h2"; }

namespace {

// +1 for h1, -1 for h2: sign of the v*omega term.
double motion_sign(Barrier which) { return which == Barrier::h1 ? 1.0 : -1.0; }

bool exceeds(double lhs, double rhs) {
    return lhs - rhs > 1e-12 * (1.0 + std::abs(lhs) + std::abs(rhs));
}

std::vector<double> time_grid(double horizon, double step) {
    if (!(step > 0.0)) throw DomainError("schedule check: grid spacing must be positive");
    if (!(horizon >= 0.0)) throw DomainError("schedule check: negative horizon");
    std::vector<double> ts;
    const auto n = static_cast<std::size_t>(std::floor(horizon / step + 1e-9));
    ts.reserve(n + 2);
    for (std::size_t k = 0; k <= n; ++k) ts.push_back(static_cast<double>(k) * step);
    if (horizon - ts.back() > 1e-12) ts.push_back(horizon);
    return ts;
}

template <typename Lhs, typename Rhs>
ScheduleReport grid_check(std::string name, double horizon, double step, Lhs lhs, Rhs rhs) {
    ScheduleReport rep;
    rep.name = std::move(name);
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (double t : time_grid(horizon, step)) {
        const double l = lhs(t);
        const double r = rhs(t);
        rep.min_margin = std::min(rep.min_margin, r - l);
        ++rep.grid_points;
        if (exceeds(l, r) && rep.pass) {
            rep.pass = false;
            rep.first_violation_t = t;
        }
    }
    return rep;
}

}  // namespace

void GeometryParams::validate() const {
    if (!(b > 0.0) || !(l_cg > 0.0)) throw DomainError("GeometryParams: b and l_cg must be positive");
    if (!(mass > 0.0)) throw DomainError("GeometryParams: mass must be positive");
}

double zmp_lateral(double v, double omega, double g_y, double g_z, const GeometryParams& geom) {
    if (std::abs(g_z) < 1e-6) throw SingularityError("zmp_lateral: |g_z| below 1e-6");
    return (v * omega * geom.l_cg - g_y * geom.l_cg) / g_z;
}

double zmp_lateral_general(double omega, double g_y, double g_z, const ZmpBodyTerms& terms,
                           const GeometryParams& geom) {
    const double den = geom.mass * terms.z_ddot + geom.mass * g_z;
    if (std::abs(den) < 1e-6 * geom.mass) throw SingularityError("zmp_lateral_general: vanishing normal force");
    const double num = -geom.mass * terms.y_ddot * geom.l_cg - geom.mass * g_y * geom.l_cg -
                       (geom.I_x * terms.roll_accel + (geom.I_y - geom.I_z) * terms.pitch_rate * omega);
    return num / den;
}

double eval_h(Barrier which, double v, double omega, double g_y, double g_z,
              const GeometryParams& geom) {
    const double s = motion_sign(which);
    return s * v * omega - geom.ratio() * g_z - s * g_y;
}

std::array<double, 2> param_gradient(Barrier which, const GeometryParams& geom) {
    return {-motion_sign(which), -geom.ratio()};
}

double lipschitz_constant(Barrier which, const GeometryParams& geom) {
    const auto q = param_gradient(which, geom);
    return std::hypot(q[0], q[1]);
}

std::array<double, AugmentedState::kSize> AugmentedState::pack() const {
    return {robot.x, robot.y, robot.theta, robot.omega, robot.v,
            est[0].mu1, est[0].mu2, est[1].mu1, est[1].mu2};
}

AugmentedState AugmentedState::unpack(const std::array<double, kSize>& x) {
    AugmentedState a;
    a.robot = {x[0], x[1], x[2], x[3], x[4]};
    a.est[0] = {x[5], x[6]};
    a.est[1] = {x[7], x[8]};
    return a;
}

void AlphaLinear::validate() const {
    if (!(alpha_c > 0.0)) throw DomainError("AlphaLinear: alpha_c must be positive");
}

void DeltaBarSchedule::validate() const {
    if (!(a >= 0.0 && c >= 0.0 && b0 >= 0.0)) {
        throw DomainError("DeltaBarSchedule: a, c, b0 must be >= 0");
    }
}

BarrierEval eval_h_M(Barrier which, const AugmentedState& aug, const Measurement& p, double M,
                     double M_rate, const BarrierContext& ctx) {
    if (!(M >= 0.0)) throw DomainError("eval_h_M: envelope must be >= 0");
    const double s = motion_sign(which);
    const auto& r = aug.robot;
    const auto& act = ctx.actuator;

    BarrierEval ev;
    ev.h = eval_h(which, r.v, r.omega, aug.est[0].mu1, aug.est[1].mu1, ctx.geom);
    ev.L_h = lipschitz_constant(which, ctx.geom);
    ev.h_M = ev.h - ev.L_h * M;
    ev.grad_x = {0.0, 0.0, 0.0, s * r.v, s * r.omega};
    ev.dh_dp = param_gradient(which, ctx.geom);

    DiffChannel cy;
    cy.mu1_hat = aug.est[0].mu1;
    cy.mu2_hat = aug.est[0].mu2;
    DiffChannel cz;
    cz.mu1_hat = aug.est[1].mu1;
    cz.mu2_hat = aug.est[1].mu2;
    const auto ry = hgo_derivative(cy, ctx.hgo, p.p_y);
    const auto rz = hgo_derivative(cz, ctx.hgo, p.p_z);

    // omega' and v' without input: -tau_w omega, -tau_v v
    const double robot_drift = ev.grad_x[3] * (-act.tau_omega * r.omega) +
                               ev.grad_x[4] * (-act.tau_v * r.v);
    const double param_drift = ev.dh_dp[0] * ry.mu1_rate + ev.dh_dp[1] * rz.mu1_rate;
    ev.drift = robot_drift + param_drift - ev.L_h * M_rate;
    ev.input_row = {ev.grad_x[4] * act.tau_v, ev.grad_x[3] * act.tau_omega};
    return ev;
}

ConstraintRow assemble_dacbf_row(Barrier which, const AugmentedState& aug, double t,
                                 const DifferentiatorBank& bank,
                                 const std::optional<Measurement>& p, const BarrierContext& ctx,
                                 const AlphaLinear& alpha, DacbfMode mode,
                                 const std::optional<DeltaBarSchedule>& delta_bar) {
    if (!p) throw StalenessError("assemble_dacbf_row: no current measurement");
    alpha.validate();
    BarrierContext local = ctx;
    local.hgo = bank.hgo();

    ConstraintRow row;
    if (mode == DacbfMode::DefFour) {
        const auto ev = eval_h_M(which, aug, *p, bank.envelope(t), bank.envelope_rate(t), local);
        row.a_row = ev.input_row;
        row.beta = -alpha(ev.h_M) - ev.drift;
        row.label = std::string(barrier_name(which)) + ":def4";
    } else {
        if (alpha.alpha_c < 1.0) throw DomainError("assemble_dacbf_row: CorollaryOne needs alpha_c >= 1");
        const auto ev = eval_h_M(which, aug, *p, 0.0, 0.0, local);
        const double db = delta_bar ? delta_bar->value(t) : 0.0;
        row.a_row = ev.input_row;
        row.beta = -alpha(ev.h) - ev.drift + alpha.alpha_c * db;
        row.label = std::string(barrier_name(which)) + ":cor1";
    }
    return row;
}

ConstraintRow assemble_pssf_row(Barrier which, const AugmentedState& aug,
                                const std::optional<Measurement>& p, const BarrierContext& ctx,
                                const AlphaLinear& alpha, double delta_bar) {
    if (!p) throw StalenessError("assemble_pssf_row: no current measurement");
    if (!(delta_bar >= 0.0)) throw DomainError("assemble_pssf_row: delta_bar must be >= 0");
    alpha.validate();
    const auto ev = eval_h_M(which, aug, *p, 0.0, 0.0, ctx);
    ConstraintRow row;
    row.a_row = ev.input_row;
    row.beta = -alpha(ev.h - delta_bar) - ev.drift;
    row.label = std::string(barrier_name(which)) + ":pssf";
    return row;
}

ConstraintRow assemble_raw_cbf_row(Barrier which, const RobotState& state, const Measurement& p,
                                   double g_y_rate, double g_z_rate, const BarrierContext& ctx,
                                   const AlphaLinear& alpha) {
    alpha.validate();
    const double s = motion_sign(which);
    const auto q = param_gradient(which, ctx.geom);
    const double h = eval_h(which, state.v, state.omega, p.p_y, p.p_z, ctx.geom);
    const double drift = s * state.v * (-ctx.actuator.tau_omega * state.omega) +
                         s * state.omega * (-ctx.actuator.tau_v * state.v) + q[0] * g_y_rate +
                         q[1] * g_z_rate;
    ConstraintRow row;
    row.a_row = {s * state.omega * ctx.actuator.tau_v, s * state.v * ctx.actuator.tau_omega};
    row.beta = -alpha(h) - drift;
    row.label = std::string(barrier_name(which)) + ":bd";
    return row;
}

ScheduleReport check_tpssf_schedule(const DeltaBarSchedule& delta_bar, const AlphaLinear& alpha,
                                    double horizon, double grid_step) {
    return grid_check(
        "tpssf_schedule", horizon, grid_step,
        [&](double t) { return -delta_bar.rate(t) + delta_bar.value(t); },
        [&](double t) { return -alpha(-delta_bar.value(t)); });
}

ScheduleReport check_theorem3_condition(double L_h, const TimeFunction& M,
                                        const TimeFunction& M_rate,
                                        const DeltaBarSchedule& delta_bar,
                                        const AlphaLinear& alpha, double horizon,
                                        double grid_step) {
    return grid_check(
        "envelope_disturbance_condition", horizon, grid_step,
        [&](double t) { return -L_h * M_rate(t) + delta_bar.value(t); },
        [&](double t) { return alpha.alpha_c * L_h * M(t); });
}

ScheduleReport check_corollary_premises(const TimeFunction& M, const TimeFunction& M_rate,
                                        const AlphaLinear& alpha, double horizon,
                                        double grid_step) {
    auto rep = grid_check(
        "corollary_premises", horizon, grid_step, [&](double t) { return M_rate(t); },
        [&](double t) { return -alpha.alpha_c * M(t); });
    if (alpha.alpha_c < 1.0) {
        rep.pass = false;
        rep.first_violation_t = 0.0;
    }
    return rep;
}

ScheduleReport check_corollary_dominance(double L_h, const TimeFunction& M,
                                         const TimeFunction& M_rate,
                                         const DeltaBarSchedule& delta_bar,
                                         const AlphaLinear& alpha, double horizon,
                                         double grid_step) {
    return grid_check(
        "corollary_dominance", horizon, grid_step,
        [&](double t) { return L_h * (M_rate(t) + alpha.alpha_c * M(t)); },
        [&](double t) { return alpha.alpha_c * delta_bar.value(t); });
}

void CbfAuditGrid::validate() const {
    if (v_points == 0 || omega_points == 0 || roll_points == 0) {
        throw DomainError("CbfAuditGrid: empty grid");
    }
    if (!(v_min <= v_max && omega_min <= omega_max && roll_min <= roll_max)) {
        throw DomainError("CbfAuditGrid: inverted range");
    }
    if (!(std::max(std::abs(roll_min), std::abs(roll_max)) < kPi / 2.0)) {
        throw DomainError("CbfAuditGrid: |roll| must stay below pi/2");
    }
}

namespace {
double lin(double lo, double hi, std::size_t i, std::size_t n) {
    if (n <= 1) return lo;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}
}  // namespace

double CbfAuditGrid::v_at(std::size_t i) const { return lin(v_min, v_max, i, v_points); }
double CbfAuditGrid::omega_at(std::size_t j) const { return lin(omega_min, omega_max, j, omega_points); }
double CbfAuditGrid::roll_at(std::size_t k) const { return lin(roll_min, roll_max, k, roll_points); }

CbfAuditPoint audit_cbf_point(Barrier which, double v, double omega, double roll, double gravity,
                              const InputBox& box, const AlphaLinear& alpha,
                              const GeometryParams& geom, const ActuatorParams& actuator) {
    CbfAuditPoint out;
    const double g_y = gravity * std::sin(roll);
    const double g_z = -gravity * std::cos(roll);
    const double h = eval_h(which, v, omega, g_y, g_z, geom);
    if (h < 0.0) return out;
    out.in_safe_set = true;

    const double s = motion_sign(which);
    const std::array<double, 2> lg{s * omega * actuator.tau_v, s * v * actuator.tau_omega};
    const double lf = -s * (actuator.tau_v + actuator.tau_omega) * v * omega;
    const double floor = -alpha(h);

    const double tol = 1e-8 * (1.0 + std::hypot(v, omega));
    if (std::hypot(lg[0], lg[1]) < tol) {
        out.degenerate = true;
        out.necessary_violation = exceeds(floor, lf);
    }
    double best = -std::numeric_limits<double>::infinity();
    for (double uv : {box.v_min, box.v_max}) {
        for (double uw : {box.omega_min, box.omega_max}) {
            best = std::max(best, lf + lg[0] * uv + lg[1] * uw);
        }
    }
    out.bounded_violation = exceeds(floor, best);
    return out;
}

CbfAuditReport verify_cbf_candidate(Barrier which, const CbfAuditGrid& grid, const InputBox& box,
                                    const AlphaLinear& alpha, const GeometryParams& geom,
                                    const ActuatorParams& actuator) {
    grid.validate();
    box.validate();
    alpha.validate();
    CbfAuditReport rep;
    rep.barrier = barrier_name(which);
    for (std::size_t k = 0; k < grid.roll_points; ++k) {
        for (std::size_t i = 0; i < grid.v_points; ++i) {
            for (std::size_t j = 0; j < grid.omega_points; ++j) {
                const double v = grid.v_at(i);
                const double w = grid.omega_at(j);
                const double r = grid.roll_at(k);
                const auto pt = audit_cbf_point(which, v, w, r, grid.gravity, box, alpha, geom, actuator);
                if (!pt.in_safe_set) continue;
                ++rep.points_checked;
                if (pt.degenerate) ++rep.degenerate_points;
                if (pt.necessary_violation) ++rep.necessary_violations;
                if (pt.bounded_violation) ++rep.bounded_input_violations;
                if ((pt.necessary_violation || pt.bounded_violation) && !rep.first_violation) {
                    rep.first_violation = std::array<double, 3>{v, w, r};
                }
            }
        }
    }
    return rep;
}

}  // namespace rollsafe
