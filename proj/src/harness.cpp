#include "rollsafe/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rollsafe/errors.hpp"

namespace rollsafe {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kN = AugmentedState::kSize;

bool has_time_varying_bound(FilterKind f) {
    return f == FilterKind::dacbf_def4 || f == FilterKind::dacbf_cor1;
}

}  // namespace

ControlInput nominal_control(const RobotState& s, const Goal& goal, const NominalGains& gains,
                             const InputBox& box, double goal_tolerance) {
    const double dx = goal.x - s.x;
    const double dy = goal.y - s.y;
    const double d = std::hypot(dx, dy);
    if (d < goal_tolerance) return {0.0, 0.0};
    ControlInput u;
    u.u_v = gains.K_v * d;
    u.u_omega = gains.K_omega * dy / d - gains.K_omega * std::sin(s.theta);
    return box.clamp(u);
}

bool RunSummary::schedules_pass() const {
    return std::all_of(schedules.begin(), schedules.end(), [](const ScheduleReport& r) { return r.pass; });
}

NoiseTrack make_noise(const Scenario& sc) {
    return NoiseTrack(sc.noise, sc.seed, sc.horizon + 1.0);
}

DifferentiatorBank make_bank(const Scenario& sc, std::span<const double> first) {
    return DifferentiatorBank(sc.differentiator, sc.noise.v_inf, first);
}

std::array<double, kN> augmented_rhs(const Scenario& sc, const NoiseTrack& noise, double t,
                                     const std::array<double, kN>& x, const ControlInput& u) {
    const auto aug = AugmentedState::unpack(x);
    const auto dyn = eval_dynamics(aug.robot, u, sc.actuator, sc.disturbance.at(t));
    const auto meas = gravity_at(t, sc.terrain, noise);
    const auto& hgo = sc.differentiator.hgo;
    const double kl = hgo.k1 * hgo.ell;
    const double kl2 = hgo.k2 * hgo.ell * hgo.ell;
    std::array<double, kN> out{};
    for (std::size_t i = 0; i < 5; ++i) out[i] = dyn[i];
    const double ey = meas.p_y - aug.est[0].mu1;
    const double ez = meas.p_z - aug.est[1].mu1;
    out[5] = aug.est[0].mu2 + kl * ey;
    out[6] = kl2 * ey;
    out[7] = aug.est[1].mu2 + kl * ez;
    out[8] = kl2 * ez;
    return out;
}

std::vector<ScheduleReport> schedule_reports(const Scenario& sc) {
    std::vector<ScheduleReport> out;
    const AlphaLinear alpha{sc.alpha_c};
    const double step = sc.schedule_grid_step;
    const double L_h = lipschitz_constant(Barrier::h1, sc.geometry);
    const std::array<double, 2> zeros{0.0, 0.0};
    const auto bank = make_bank(sc, zeros);
    const TimeFunction M = [bank](double t) { return bank.envelope(t); };
    const TimeFunction M_rate = [bank](double t) { return bank.envelope_rate(t); };

    switch (sc.variant.filter) {
        case FilterKind::pssf_const:
            out.push_back(check_tpssf_schedule({0.0, 0.0, sc.variant.pssf_delta_bar}, alpha, sc.horizon, step));
            break;
        case FilterKind::dacbf_def4:
            out.push_back(check_theorem3_condition(L_h, M, M_rate, sc.delta_bar, alpha, sc.horizon, step));
            break;
        case FilterKind::dacbf_cor1:
            out.push_back(check_tpssf_schedule(sc.delta_bar, alpha, sc.horizon, step));
            out.push_back(check_corollary_premises(M, M_rate, alpha, sc.horizon, step));
            out.push_back(check_corollary_dominance(L_h, M, M_rate, sc.delta_bar, alpha, sc.horizon, step));
            break;
        default:
            break;
    }
    return out;
}

RunResult run(const Scenario& sc) {
    sc.validate();
    RunResult res;
    auto& sum = res.summary;
    sum.variant = sc.variant.key();
    sum.seed = sc.seed;
    sum.schedules = schedule_reports(sc);

    const auto noise = make_noise(sc);
    sum.noise_sup = noise.realized_sup();
    const double dt = sc.control_period();
    const double h_sub = dt / static_cast<double>(sc.substeps);
    const std::size_t n_steps = sc.steps();
    const BarrierContext ctx = sc.barrier_context();
    const AlphaLinear alpha{sc.alpha_c};
    const FilterKind filter = sc.variant.filter;

    const auto m0 = gravity_at(0.0, sc.terrain, noise);
    const std::array<double, 2> first{m0.p_y, m0.p_z};
    const auto bank = make_bank(sc, first);

    AugmentedState aug;
    aug.robot = sc.initial;
    aug.est[0] = {m0.p_y, 0.0};
    aug.est[1] = {m0.p_z, 0.0};

    BackwardDiffWindow bd_y(dt);
    BackwardDiffWindow bd_z(dt);

    sum.min_h1 = sum.min_h2 = sum.min_h = std::numeric_limits<double>::infinity();
    if (filter == FilterKind::pssf_const || has_time_varying_bound(filter)) sum.delta_sound = true;
    res.trace.reserve(n_steps + 1);

    for (std::size_t k = 0; k <= n_steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        TraceRecord rec;
        try {
            const auto meas = gravity_at(t, sc.terrain, noise);
            const auto truth = gravity_truth(t, sc.terrain);
            const Measurement p{meas.p_y, meas.p_z};
            const double nb = sc.noise.v_inf * (1.0 + 1e-12);
            if (std::abs(p.p_y - meas.g_y0) > nb || std::abs(p.p_z - meas.g_z0) > nb) {
                throw NumericalError("noise sample exceeds v_inf");
            }
            bd_y.push(p.p_y);
            bd_z.push(p.p_z);

            rec.t = t;
            rec.state = aug.robot;
            rec.est = aug.est;
            rec.g_y = meas.g_y0;
            rec.g_z = meas.g_z0;
            rec.g_y_rate = truth.g_y_rate;
            rec.g_z_rate = truth.g_z_rate;
            rec.p_y = p.p_y;
            rec.p_z = p.p_z;

            const double M = bank.envelope(t);
            const double M_rate = bank.envelope_rate(t);
            rec.M = M;
            rec.M_rate = M_rate;
            const auto e1 = eval_h_M(Barrier::h1, aug, p, M, M_rate, ctx);
            const auto e2 = eval_h_M(Barrier::h2, aug, p, M, M_rate, ctx);
            rec.h1_M = e1.h_M;
            rec.h2_M = e2.h_M;
            rec.drift1 = e1.drift;
            rec.drift2 = e2.drift;
            rec.row1 = e1.input_row;
            rec.row2 = e2.input_row;

            const auto& r = aug.robot;
            rec.h1 = eval_h(Barrier::h1, r.v, r.omega, meas.g_y0, meas.g_z0, sc.geometry);
            rec.h2 = eval_h(Barrier::h2, r.v, r.omega, meas.g_y0, meas.g_z0, sc.geometry);
            rec.y_Z = zmp_lateral(r.v, r.omega, meas.g_y0, meas.g_z0, sc.geometry);
            rec.d = sc.disturbance.at(t);
            rec.delta = std::abs(r.omega * rec.d.d_v + r.v * rec.d.d_omega);

            rec.u_nom = nominal_control(r, sc.goal, sc.gains, sc.box, sc.goal_tolerance);

            QpProblem qp;
            qp.u_nom = {rec.u_nom.u_v, rec.u_nom.u_omega};
            qp.lower = {sc.box.v_min, sc.box.omega_min};
            qp.upper = {sc.box.v_max, sc.box.omega_max};

            rec.def4_beta1 = rec.def4_beta2 = rec.cor1_beta1 = rec.cor1_beta2 = kNaN;
            rec.delta_bar = kNaN;
            switch (filter) {
                case FilterKind::none:
                    break;
                case FilterKind::cbf_qp_bd: {
                    const double gy_rate = backward_diff(bd_y);
                    const double gz_rate = backward_diff(bd_z);
                    qp.rows.push_back(assemble_raw_cbf_row(Barrier::h1, r, p, gy_rate, gz_rate, ctx, alpha));
                    qp.rows.push_back(assemble_raw_cbf_row(Barrier::h2, r, p, gy_rate, gz_rate, ctx, alpha));
                    break;
                }
                case FilterKind::pssf_const:
                    rec.delta_bar = sc.variant.pssf_delta_bar;
                    qp.rows.push_back(assemble_pssf_row(Barrier::h1, aug, p, ctx, alpha, rec.delta_bar));
                    qp.rows.push_back(assemble_pssf_row(Barrier::h2, aug, p, ctx, alpha, rec.delta_bar));
                    break;
                case FilterKind::dacbf_def4:
                case FilterKind::dacbf_cor1: {
                    rec.delta_bar = sc.delta_bar.value(t);
                    const auto d4a = assemble_dacbf_row(Barrier::h1, aug, t, bank, p, ctx, alpha, DacbfMode::DefFour, sc.delta_bar);
                    const auto d4b = assemble_dacbf_row(Barrier::h2, aug, t, bank, p, ctx, alpha, DacbfMode::DefFour, sc.delta_bar);
                    rec.def4_beta1 = d4a.beta;
                    rec.def4_beta2 = d4b.beta;
                    if (sc.alpha_c >= 1.0) {
                        const auto c1a = assemble_dacbf_row(Barrier::h1, aug, t, bank, p, ctx, alpha, DacbfMode::CorollaryOne, sc.delta_bar);
                        const auto c1b = assemble_dacbf_row(Barrier::h2, aug, t, bank, p, ctx, alpha, DacbfMode::CorollaryOne, sc.delta_bar);
                        rec.cor1_beta1 = c1a.beta;
                        rec.cor1_beta2 = c1b.beta;
                        const double tol = 1e-12;
                        if (c1a.beta < d4a.beta - tol * (1.0 + std::abs(d4a.beta))) ++sum.cor1_looser_steps;
                        else if (c1b.beta < d4b.beta - tol * (1.0 + std::abs(d4b.beta))) ++sum.cor1_looser_steps;
                        if (filter == FilterKind::dacbf_cor1) {
                            qp.rows.push_back(c1a);
                            qp.rows.push_back(c1b);
                        }
                    }
                    if (filter == FilterKind::dacbf_def4) {
                        qp.rows.push_back(d4a);
                        qp.rows.push_back(d4b);
                    }
                    break;
                }
            }
            rec.beta1 = qp.rows.size() > 0 ? qp.rows[0].beta : kNaN;
            rec.beta2 = qp.rows.size() > 1 ? qp.rows[1].beta : kNaN;

            const auto sol = solve(qp);
            rec.u = {sol.u_star[0], sol.u_star[1]};
            rec.qp_status = sol.status;
            rec.active_set = sol.active_set_string();
            rec.slack = sol.slack_used;

            // summary bookkeeping
            if (rec.h1 < sum.min_h1) sum.min_h1 = rec.h1;
            if (rec.h2 < sum.min_h2) sum.min_h2 = rec.h2;
            const double hmin = std::min(rec.h1, rec.h2);
            if (hmin < sum.min_h) {
                sum.min_h = hmin;
                sum.t_min_h = t;
            }
            if (sol.status == QpStatus::infeasible_relaxed) {
                ++sum.infeasible_count;
                sum.max_slack = std::max(sum.max_slack, sol.slack_used);
            }
            const double env_y = bank.channel_envelope(0, t);
            const double env_z = bank.channel_envelope(1, t);
            if (std::abs(aug.est[0].mu2 - truth.g_y_rate) > env_y) ++sum.envelope_violations;
            if (std::abs(aug.est[1].mu2 - truth.g_z_rate) > env_z) ++sum.envelope_violations;
            sum.max_delta = std::max(sum.max_delta, rec.delta);
            if (sum.delta_sound && rec.delta > rec.delta_bar) sum.delta_sound = false;
            res.trace.push_back(rec);

            if (k == n_steps) break;
            auto x = aug.pack();
            const ControlInput u_hold = rec.u;
            for (int s = 0; s < sc.substeps; ++s) {
                const double ts = t + static_cast<double>(s) * h_sub;
                x = step_rk4<kN>(x, ts, h_sub, [&](double tt, const std::array<double, kN>& xx) {
                    return augmented_rhs(sc, noise, tt, xx, u_hold);
                });
            }
            aug = AugmentedState::unpack(x);
            aug.robot.theta = wrap_angle(aug.robot.theta);
            if (!aug.robot.finite()) throw NumericalError("non-finite robot state");
        } catch (const std::exception& e) {
            sum.completed = false;
            sum.error = e.what();
            break;
        }
    }

    sum.steps = res.trace.size();
    if (!res.trace.empty()) {
        for (const auto& rec : res.trace) {
            const double dist = std::hypot(sc.goal.x - rec.state.x, sc.goal.y - rec.state.y);
            if (!sum.time_to_goal && dist < sc.goal_tolerance) sum.time_to_goal = rec.t;
        }
        const auto& last = res.trace.back().state;
        sum.final_distance = std::hypot(sc.goal.x - last.x, sc.goal.y - last.y);
    }
    sum.violated = !sum.completed || sum.min_h < -sc.safety_tol;
    return res;
}

Scenario with_variant(const Scenario& base, const Variant& variant) {
    Scenario s = base;
    s.variant = variant;
    return s;
}

std::vector<ComparisonRow> compare(const Scenario& base, const std::vector<Variant>& variants,
                                   std::vector<RunResult>* results) {
    std::vector<Variant> list = variants;
    if (list.empty()) list.push_back(base.variant);
    std::vector<ComparisonRow> rows;
    if (results) results->clear();
    for (const auto& v : list) {
        auto r = run(with_variant(base, v));
        rows.push_back({v, r.summary});
        if (results) results->push_back(std::move(r));
    }
    return rows;
}

}  // namespace rollsafe
