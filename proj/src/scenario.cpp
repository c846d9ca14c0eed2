#include "rollsafe/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rollsafe/errors.hpp"

namespace rollsafe {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

const char* filter_name(FilterKind kind) {
    switch (kind) {
        case FilterKind::none: return "none";
        case FilterKind::cbf_qp_bd: return "cbf_qp_bd";
        case FilterKind::pssf_const: return "pssf_const";
        case FilterKind::dacbf_def4: return "dacbf_def4";
        case FilterKind::dacbf_cor1: return "dacbf_cor1";
    }
    return "?";
}

FilterKind parse_filter(const std::string& name) {
    for (auto k : {FilterKind::none, FilterKind::cbf_qp_bd, FilterKind::pssf_const,
                   FilterKind::dacbf_def4, FilterKind::dacbf_cor1}) {
        if (name == filter_name(k)) return k;
    }
    throw ConfigError("unknown filter '" + name + "'");
}

namespace {

std::string fmt_g(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string Variant::key() const {
    if (filter == FilterKind::pssf_const) return std::string("pssf_const_") + fmt_g(pssf_delta_bar);
    return filter_name(filter);
}

std::string Variant::text() const {
    if (filter == FilterKind::pssf_const) return std::string("pssf_const:") + fmt_g(pssf_delta_bar);
    return filter_name(filter);
}

Variant parse_variant(const std::string& raw) {
    const std::string text = trim(raw);
    Variant v;
    const auto colon = text.find(':');
    v.filter = parse_filter(text.substr(0, colon));
    if (colon != std::string::npos) {
        if (v.filter != FilterKind::pssf_const) throw ConfigError("only pssf_const takes a bound: " + text);
        try {
            std::size_t used = 0;
            const std::string num = text.substr(colon + 1);
            v.pssf_delta_bar = std::stod(num, &used);
            if (used != num.size()) throw ConfigError("bad bound in variant " + text);
        } catch (const std::logic_error&) {
            throw ConfigError("bad bound in variant " + text);
        }
        if (!(v.pssf_delta_bar >= 0.0)) throw ConfigError("pssf bound must be >= 0: " + text);
    } else if (v.filter == FilterKind::pssf_const) {
        throw ConfigError("pssf_const needs a bound, e.g. pssf_const:0.5");
    }
    return v;
}

std::vector<Variant> parse_variant_list(const std::string& csv) {
    std::vector<Variant> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!trim(item).empty()) out.push_back(parse_variant(item));
    }
    return out;
}

void Scenario::validate() const {
    terrain.validate();
    if (!(noise.v_inf >= 0.0) || !(noise.sample_rate > 0.0) || !(noise.cutoff_hz > 0.0)) {
        throw ConfigError("noise: v_inf >= 0, sample_rate > 0, cutoff_hz > 0 required");
    }
    disturbance.omega.validate();
    disturbance.v.validate();
    geometry.validate();
    actuator.validate();
    box.validate();
    if (!initial.finite()) throw ConfigError("initial state must be finite");
    if (!std::isfinite(goal.x) || !std::isfinite(goal.y)) throw ConfigError("goal must be finite");
    if (!(gains.K_v > 0.0) || !(gains.K_omega > 0.0)) throw ConfigError("gains must be positive");
    if (!(alpha_c > 0.0)) throw ConfigError("alpha_c must be positive");
    delta_bar.validate();
    differentiator.validate();
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (!(control_rate > 0.0)) throw ConfigError("control_rate must be positive");
    if (substeps < 1) throw ConfigError("substeps must be >= 1");
    if (!(goal_tolerance > 0.0)) throw ConfigError("goal_tolerance must be positive");
    if (!(safety_tol >= 0.0)) throw ConfigError("safety_tol must be >= 0");
    if (!(schedule_grid_step > 0.0)) throw ConfigError("schedule_grid_step must be positive");
    if (variant.filter == FilterKind::pssf_const && !(variant.pssf_delta_bar >= 0.0)) {
        throw ConfigError("pssf bound must be >= 0");
    }
    if (variant.filter == FilterKind::dacbf_cor1 && alpha_c < 1.0) {
        throw ConfigError("dacbf_cor1 needs alpha_c >= 1");
    }
    audit.validate();
}

std::size_t Scenario::steps() const {
    return static_cast<std::size_t>(std::llround(horizon * control_rate));
}

Scenario default_scenario() {
    Scenario s;
    s.terrain.roll_start = 0.0;
    s.terrain.roll_end = deg_to_rad(27.0);
    s.terrain.ramp_start = 0.0;
    s.terrain.ramp_duration = 2.0;

    s.noise.v_inf = 0.01;
    s.noise.sample_rate = 1000.0;
    s.noise.cutoff_hz = 50.0;

    // Pushes the yaw rate clockwise; |delta| <= 3 (0.2 e^{-t/2} + 0.1).
    s.disturbance.omega = {-1.0, 0.2, 0.5, 0.1, 0.3, 0.5};

    // Facing away from the goal, so the turn back happens on the full slope.
    s.initial.theta = deg_to_rad(165.0);
    s.goal = {6.0, 0.0};
    s.gains = {1.0, 2.0};

    s.variant.filter = FilterKind::dacbf_def4;
    s.alpha_c = 50.0;
    s.delta_bar = {0.6, 0.5, 0.3};

    s.differentiator.rate_bound = 0.0;  // the ramp starts at rest
    s.differentiator.accel_bound = 6.0;

    s.horizon = 8.0;
    s.seed = 1;
    return s;
}

// ---- JSON ----

namespace {

class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + "expected an object");
    }

    void num(const char* key, double& out) {
        if (const json* v = take(key)) {
            if (!v->is_number()) throw ConfigError(where(key) + "expected a number");
            out = v->get<double>();
            if (!std::isfinite(out)) throw ConfigError(where(key) + "must be finite");
        }
    }
    void deg(const char* key, double& out_rad) {
        double d = rad_to_deg(out_rad);
        if (peek(key)) {
            num(key, d);
            out_rad = deg_to_rad(d);
        }
    }
    void integer(const char* key, int& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_integer()) throw ConfigError(where(key) + "expected an integer");
            out = v->get<int>();
        }
    }
    void count(const char* key, std::size_t& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_unsigned()) throw ConfigError(where(key) + "expected a non-negative integer");
            out = v->get<std::size_t>();
        }
    }
    void seed(const char* key, std::uint64_t& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_unsigned()) throw ConfigError(where(key) + "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void text(const char* key, std::string& out) {
        if (const json* v = take(key)) {
            if (!v->is_string()) throw ConfigError(where(key) + "expected a string");
            out = v->get<std::string>();
        }
    }
    template <typename F>
    void sub(const char* key, F&& fill) {
        if (const json* v = take(key)) {
            Section s(*v, path_.empty() ? key : path_ + "." + key);
            fill(s);
            s.finish();
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError("unknown config key '" + where_key(it.key()) + "'");
        }
    }

private:
    bool peek(const char* key) const { return j_.contains(key); }
    const json* take(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    std::string where_key(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    std::string where(const char* key) const { return where_key(key) + ": "; }
    std::string where() const { return (path_.empty() ? std::string("<root>") : path_) + ": "; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_channel(Section& s, DisturbanceChannel& c) {
    s.num("sign", c.sign);
    s.num("a", c.a);
    s.num("c", c.c);
    s.num("b", c.b);
    s.num("ripple", c.ripple);
    s.num("frequency", c.frequency);
}

ojson channel_json(const DisturbanceChannel& c) {
    return {{"sign", c.sign}, {"a", c.a}, {"c", c.c}, {"b", c.b}, {"ripple", c.ripple}, {"frequency", c.frequency}};
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text, const Scenario& base) {
    json root;
    try {
        root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    Scenario s = base;
    Section top(root, "");
    top.sub("terrain", [&](Section& t) {
        t.deg("roll_start_deg", s.terrain.roll_start);
        t.deg("roll_end_deg", s.terrain.roll_end);
        t.num("ramp_start", s.terrain.ramp_start);
        t.num("ramp_duration", s.terrain.ramp_duration);
        t.deg("sine_amplitude_deg", s.terrain.sine_amplitude);
        t.num("sine_frequency", s.terrain.sine_frequency);
        t.num("sine_phase", s.terrain.sine_phase);
        t.num("gravity", s.terrain.gravity);
    });
    top.sub("noise", [&](Section& n) {
        n.num("v_inf", s.noise.v_inf);
        n.num("sample_rate", s.noise.sample_rate);
        n.num("cutoff_hz", s.noise.cutoff_hz);
    });
    top.sub("disturbance", [&](Section& d) {
        d.sub("omega", [&](Section& c) { read_channel(c, s.disturbance.omega); });
        d.sub("v", [&](Section& c) { read_channel(c, s.disturbance.v); });
    });
    top.sub("geometry", [&](Section& g) {
        g.num("b", s.geometry.b);
        g.num("l_cg", s.geometry.l_cg);
        g.num("mass", s.geometry.mass);
        g.num("I_x", s.geometry.I_x);
        g.num("I_y", s.geometry.I_y);
        g.num("I_z", s.geometry.I_z);
    });
    top.sub("actuator", [&](Section& a) {
        a.num("tau_v", s.actuator.tau_v);
        a.num("tau_omega", s.actuator.tau_omega);
    });
    top.sub("input_box", [&](Section& b) {
        b.num("v_min", s.box.v_min);
        b.num("v_max", s.box.v_max);
        b.num("omega_min", s.box.omega_min);
        b.num("omega_max", s.box.omega_max);
    });
    top.sub("initial", [&](Section& i) {
        i.num("x", s.initial.x);
        i.num("y", s.initial.y);
        i.deg("theta_deg", s.initial.theta);
        i.num("omega", s.initial.omega);
        i.num("v", s.initial.v);
    });
    top.sub("goal", [&](Section& g) {
        g.num("x", s.goal.x);
        g.num("y", s.goal.y);
    });
    top.sub("gains", [&](Section& g) {
        g.num("K_v", s.gains.K_v);
        g.num("K_omega", s.gains.K_omega);
    });
    top.sub("controller", [&](Section& c) {
        std::string filter = s.variant.text();
        c.text("filter", filter);
        if (filter.rfind("pssf_const", 0) == 0 && filter.find(':') == std::string::npos) {
            s.variant.filter = FilterKind::pssf_const;
        } else {
            s.variant = parse_variant(filter);
        }
        c.num("pssf_delta_bar", s.variant.pssf_delta_bar);
        c.num("alpha_c", s.alpha_c);
        c.sub("delta_bar", [&](Section& d) {
            d.num("a", s.delta_bar.a);
            d.num("c", s.delta_bar.c);
            d.num("b0", s.delta_bar.b0);
        });
    });
    top.sub("differentiator", [&](Section& d) {
        d.num("k1", s.differentiator.hgo.k1);
        d.num("k2", s.differentiator.hgo.k2);
        d.num("ell", s.differentiator.hgo.ell);
        d.num("lambda", s.differentiator.lambda);
        d.num("rate_bound", s.differentiator.rate_bound);
        d.num("accel_bound", s.differentiator.accel_bound);
        d.num("safety_factor", s.differentiator.safety_factor);
    });
    top.sub("simulation", [&](Section& m) {
        m.num("horizon", s.horizon);
        m.num("control_rate", s.control_rate);
        m.integer("substeps", s.substeps);
        m.num("goal_tolerance", s.goal_tolerance);
        m.num("safety_tol", s.safety_tol);
        m.num("schedule_grid_step", s.schedule_grid_step);
        m.seed("seed", s.seed);
    });
    top.sub("audit", [&](Section& a) {
        a.num("v_min", s.audit.v_min);
        a.num("v_max", s.audit.v_max);
        a.num("omega_min", s.audit.omega_min);
        a.num("omega_max", s.audit.omega_max);
        a.deg("roll_min_deg", s.audit.roll_min);
        a.deg("roll_max_deg", s.audit.roll_max);
        a.count("v_points", s.audit.v_points);
        a.count("omega_points", s.audit.omega_points);
        a.count("roll_points", s.audit.roll_points);
        a.num("gravity", s.audit.gravity);
    });
    top.finish();
    try {
        s.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid scenario: ") + e.what());
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json_text(ss.str());
}

std::string scenario_to_json_text(const Scenario& s) {
    ojson j;
    j["terrain"] = {{"roll_start_deg", rad_to_deg(s.terrain.roll_start)},
                    {"roll_end_deg", rad_to_deg(s.terrain.roll_end)},
                    {"ramp_start", s.terrain.ramp_start},
                    {"ramp_duration", s.terrain.ramp_duration},
                    {"sine_amplitude_deg", rad_to_deg(s.terrain.sine_amplitude)},
                    {"sine_frequency", s.terrain.sine_frequency},
                    {"sine_phase", s.terrain.sine_phase},
                    {"gravity", s.terrain.gravity}};
    j["noise"] = {{"v_inf", s.noise.v_inf}, {"sample_rate", s.noise.sample_rate}, {"cutoff_hz", s.noise.cutoff_hz}};
    j["disturbance"] = {{"omega", channel_json(s.disturbance.omega)}, {"v", channel_json(s.disturbance.v)}};
    j["geometry"] = {{"b", s.geometry.b}, {"l_cg", s.geometry.l_cg}, {"mass", s.geometry.mass},
                     {"I_x", s.geometry.I_x}, {"I_y", s.geometry.I_y}, {"I_z", s.geometry.I_z}};
    j["actuator"] = {{"tau_v", s.actuator.tau_v}, {"tau_omega", s.actuator.tau_omega}};
    j["input_box"] = {{"v_min", s.box.v_min}, {"v_max", s.box.v_max},
                      {"omega_min", s.box.omega_min}, {"omega_max", s.box.omega_max}};
    j["initial"] = {{"x", s.initial.x}, {"y", s.initial.y}, {"theta_deg", rad_to_deg(s.initial.theta)},
                    {"omega", s.initial.omega}, {"v", s.initial.v}};
    j["goal"] = {{"x", s.goal.x}, {"y", s.goal.y}};
    j["gains"] = {{"K_v", s.gains.K_v}, {"K_omega", s.gains.K_omega}};
    j["controller"] = {{"filter", s.variant.text()},
                       {"alpha_c", s.alpha_c},
                       {"delta_bar", {{"a", s.delta_bar.a}, {"c", s.delta_bar.c}, {"b0", s.delta_bar.b0}}}};
    j["differentiator"] = {{"k1", s.differentiator.hgo.k1}, {"k2", s.differentiator.hgo.k2},
                           {"ell", s.differentiator.hgo.ell}, {"lambda", s.differentiator.lambda},
                           {"rate_bound", s.differentiator.rate_bound},
                           {"accel_bound", s.differentiator.accel_bound},
                           {"safety_factor", s.differentiator.safety_factor}};
    j["simulation"] = {{"horizon", s.horizon}, {"control_rate", s.control_rate}, {"substeps", s.substeps},
                       {"goal_tolerance", s.goal_tolerance}, {"safety_tol", s.safety_tol},
                       {"schedule_grid_step", s.schedule_grid_step}, {"seed", s.seed}};
    j["audit"] = {{"v_min", s.audit.v_min}, {"v_max", s.audit.v_max},
                  {"omega_min", s.audit.omega_min}, {"omega_max", s.audit.omega_max},
                  {"roll_min_deg", rad_to_deg(s.audit.roll_min)}, {"roll_max_deg", rad_to_deg(s.audit.roll_max)},
                  {"v_points", s.audit.v_points}, {"omega_points", s.audit.omega_points},
                  {"roll_points", s.audit.roll_points}, {"gravity", s.audit.gravity}};
    return j.dump(2);
}

}  // namespace rollsafe
