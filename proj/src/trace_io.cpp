#include "rollsafe/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "rollsafe/errors.hpp"

namespace rollsafe {

using ojson = nlohmann::ordered_json;

namespace {

void put(std::string& line, double x) {
    char buf[40];
    if (std::isnan(x)) {
        line += "nan";
    } else {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        line += buf;
    }
}

// JSON has no NaN/inf.
ojson num(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

ojson schedule_json(const ScheduleReport& r) {
    ojson j;
    j["name"] = r.name;
    j["pass"] = r.pass;
    j["first_violation_t"] = r.first_violation_t ? ojson(*r.first_violation_t) : ojson(nullptr);
    j["min_margin"] = num(r.min_margin);
    j["grid_points"] = r.grid_points;
    return j;
}

ojson summary_obj(const RunSummary& s) {
    ojson j;
    j["variant"] = s.variant;
    j["seed"] = s.seed;
    j["completed"] = s.completed;
    if (!s.error.empty()) j["error"] = s.error;
    j["steps"] = s.steps;
    j["min_h1"] = num(s.min_h1);
    j["min_h2"] = num(s.min_h2);
    j["min_h"] = num(s.min_h);
    j["t_min_h"] = s.t_min_h;
    j["violated"] = s.violated;
    j["final_distance"] = num(s.final_distance);
    j["time_to_goal"] = s.time_to_goal ? ojson(*s.time_to_goal) : ojson(nullptr);
    j["infeasible_count"] = s.infeasible_count;
    j["max_slack"] = s.max_slack;
    j["envelope_violations"] = s.envelope_violations;
    j["max_delta"] = s.max_delta;
    j["delta_sound"] = s.delta_sound ? ojson(*s.delta_sound) : ojson(nullptr);
    j["noise_sup"] = s.noise_sup;
    j["cor1_looser_steps"] = s.cor1_looser_steps;
    j["schedules_pass"] = s.schedules_pass();
    ojson sched = ojson::array();
    for (const auto& r : s.schedules) sched.push_back(schedule_json(r));
    j["schedules"] = sched;
    return j;
}

}  // namespace

std::vector<std::string> trace_columns() {
    return {"t",          "x",          "y",          "theta",      "omega",     "v",
            "mu1_gy",     "mu2_gy",     "mu1_gz",     "mu2_gz",     "g_y",       "g_z",
            "g_y_rate",   "g_z_rate",   "p_y",        "p_z",        "u_nom_v",   "u_nom_omega",
            "u_v",        "u_omega",    "h1",         "h2",         "h1_M",      "h2_M",
            "y_Z",        "M",          "M_rate",     "delta_bar",  "delta",     "d_omega",
            "d_v",        "beta1",      "beta2",      "def4_beta1", "def4_beta2", "cor1_beta1",
            "cor1_beta2", "drift1",     "drift2",     "row1_v",     "row1_omega", "row2_v",
            "row2_omega", "qp_status",  "active_set", "slack"};
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
    out << "# schema=" << kTraceSchema << '\n';
    const auto cols = trace_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    std::string line;
    for (const auto& r : trace) {
        line.clear();
        const double vals[] = {r.t,          r.state.x,     r.state.y,      r.state.theta,  r.state.omega,
                               r.state.v,    r.est[0].mu1,  r.est[0].mu2,   r.est[1].mu1,   r.est[1].mu2,
                               r.g_y,        r.g_z,         r.g_y_rate,     r.g_z_rate,     r.p_y,
                               r.p_z,        r.u_nom.u_v,   r.u_nom.u_omega, r.u.u_v,       r.u.u_omega,
                               r.h1,         r.h2,          r.h1_M,         r.h2_M,         r.y_Z,
                               r.M,          r.M_rate,      r.delta_bar,    r.delta,        r.d.d_omega,
                               r.d.d_v,      r.beta1,       r.beta2,        r.def4_beta1,   r.def4_beta2,
                               r.cor1_beta1, r.cor1_beta2,  r.drift1,       r.drift2,       r.row1[0],
                               r.row1[1],    r.row2[0],     r.row2[1]};
        bool first = true;
        for (double x : vals) {
            if (!first) line += ',';
            first = false;
            put(line, x);
        }
        line += ',';
        line += qp_status_name(r.qp_status);
        line += ',';
        line += r.active_set;
        line += ',';
        put(line, r.slack);
        out << line << '\n';
    }
}

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    write_trace_csv(out, trace);
}

std::string summary_to_json(const RunSummary& summary, int indent) {
    return summary_obj(summary).dump(indent);
}

std::string run_to_json(const Scenario& scenario, const RunSummary& summary) {
    ojson j;
    j["schema"] = "rollsafe-summary/1";
    j["scenario"] = ojson::parse(scenario_to_json_text(scenario));
    j["runs"] = ojson::array({summary_obj(summary)});
    return j.dump(2) + "\n";
}

std::string comparison_to_json(const Scenario& base, const std::vector<ComparisonRow>& rows) {
    ojson j;
    j["schema"] = "rollsafe-summary/1";
    j["scenario"] = ojson::parse(scenario_to_json_text(base));
    ojson runs = ojson::array();
    std::size_t unsafe = 0;
    for (const auto& r : rows) {
        runs.push_back(summary_obj(r.summary));
        if (r.summary.violated) ++unsafe;
    }
    j["runs"] = runs;
    j["unsafe_count"] = unsafe;
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

}  // namespace rollsafe
