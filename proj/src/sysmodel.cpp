#include "rollsafe/sysmodel.hpp"

#include <algorithm>
#include <random>

namespace rollsafe {

double wrap_angle(double angle) {
    if (!std::isfinite(angle)) throw DomainError("wrap_angle: non-finite angle");
    double wrapped = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
    if (wrapped <= -kPi) wrapped += 2.0 * kPi;
    return wrapped;
}

bool RobotState::finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(theta) &&
           std::isfinite(omega) && std::isfinite(v);
}

void InputBox::validate() const {
    if (!(v_min <= v_max) || !(omega_min <= omega_max)) {
        throw DomainError("InputBox: lower bound exceeds upper bound");
    }
}

ControlInput InputBox::clamp(const ControlInput& u) const {
    return {std::clamp(u.u_v, v_min, v_max), std::clamp(u.u_omega, omega_min, omega_max)};
}

bool InputBox::contains(const ControlInput& u, double tol) const {
    return u.u_v >= v_min - tol && u.u_v <= v_max + tol && u.u_omega >= omega_min - tol &&
           u.u_omega <= omega_max + tol;
}

void ActuatorParams::validate() const {
    if (!(tau_v > 0.0) || !(tau_omega > 0.0)) {
        throw DomainError("ActuatorParams: tau_v and tau_omega must be positive");
    }
}

StateDerivative eval_dynamics(const RobotState& s, const ControlInput& u,
                              const ActuatorParams& params, const DisturbanceSample& d) {
    if (!s.finite() || !std::isfinite(u.u_v) || !std::isfinite(u.u_omega) ||
        !std::isfinite(d.d_omega) || !std::isfinite(d.d_v)) {
        throw DomainError("eval_dynamics: non-finite input");
    }
    return {
        s.v * std::cos(s.theta),
        s.v * std::sin(s.theta),
        s.omega,
        -params.tau_omega * s.omega + params.tau_omega * u.u_omega + d.d_omega,
        -params.tau_v * s.v + params.tau_v * u.u_v + d.d_v,
    };
}

void TerrainProfile::validate() const {
    if (!(gravity > 0.0)) throw DomainError("TerrainProfile: gravity must be positive");
    if (!(ramp_duration >= 0.0)) throw DomainError("TerrainProfile: negative ramp duration");
    if (!(sine_frequency >= 0.0)) throw DomainError("TerrainProfile: negative sine frequency");
    const double worst = std::max(std::abs(roll_start), std::abs(roll_end)) + std::abs(sine_amplitude);
    if (!(worst < kPi / 2.0)) throw DomainError("TerrainProfile: |roll| must stay below pi/2");
}

namespace {

struct RampPhase {
    double s;       // normalized position in [0, 1]
    bool inside;    // strictly within the blend
};

RampPhase ramp_phase(const TerrainProfile& p, double t) {
    if (p.ramp_duration <= 0.0) return {t >= p.ramp_start ? 1.0 : 0.0, false};
    const double s = (t - p.ramp_start) / p.ramp_duration;
    if (s <= 0.0) return {0.0, false};
    if (s >= 1.0) return {1.0, false};
    return {s, true};
}

}  // namespace

double TerrainProfile::roll(double t) const {
    const auto ph = ramp_phase(*this, t);
    const double blend = ph.inside ? 0.5 * (1.0 - std::cos(kPi * ph.s)) : ph.s;
    const double w = 2.0 * kPi * sine_frequency;
    return roll_start + (roll_end - roll_start) * blend + sine_amplitude * std::sin(w * t + sine_phase);
}

double TerrainProfile::roll_rate(double t) const {
    const auto ph = ramp_phase(*this, t);
    double rate = 0.0;
    if (ph.inside) {
        rate = (roll_end - roll_start) * kPi / (2.0 * ramp_duration) * std::sin(kPi * ph.s);
    }
    const double w = 2.0 * kPi * sine_frequency;
    return rate + sine_amplitude * w * std::cos(w * t + sine_phase);
}

double TerrainProfile::roll_accel(double t) const {
    const auto ph = ramp_phase(*this, t);
    double acc = 0.0;
    if (ph.inside) {
        acc = (roll_end - roll_start) * kPi * kPi / (2.0 * ramp_duration * ramp_duration) *
              std::cos(kPi * ph.s);
    }
    const double w = 2.0 * kPi * sine_frequency;
    return acc - sine_amplitude * w * w * std::sin(w * t + sine_phase);
}

GravityTruth gravity_truth(double t, const TerrainProfile& profile) {
    const double phi = profile.roll(t);
    const double phi_dot = profile.roll_rate(t);
    const double g = profile.gravity;
    return {g * std::sin(phi), -g * std::cos(phi), g * std::cos(phi) * phi_dot,
            g * std::sin(phi) * phi_dot};
}

NoiseTrack::NoiseTrack(const NoiseConfig& config, std::uint64_t seed, double horizon)
    : v_inf_(config.v_inf) {
    if (!(config.v_inf >= 0.0)) throw DomainError("NoiseTrack: v_inf must be >= 0");
    if (!(config.sample_rate > 0.0)) throw DomainError("NoiseTrack: sample_rate must be positive");
    if (!(config.cutoff_hz > 0.0)) throw DomainError("NoiseTrack: cutoff must be positive");
    if (!(horizon >= 0.0)) throw DomainError("NoiseTrack: negative horizon");

    sample_period_ = 1.0 / config.sample_rate;
    const auto n = static_cast<std::size_t>(std::ceil(horizon * config.sample_rate)) + 2;
    y_.resize(n);
    z_.resize(n);
    if (v_inf_ == 0.0) return;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-v_inf_, v_inf_);
    const double gain = 1.0 - std::exp(-2.0 * kPi * config.cutoff_hz * sample_period_);
    double fy = uni(rng);
    double fz = uni(rng);
    for (std::size_t k = 0; k < n; ++k) {
        fy += gain * (uni(rng) - fy);
        fz += gain * (uni(rng) - fz);
        y_[k] = std::clamp(fy, -v_inf_, v_inf_);
        z_[k] = std::clamp(fz, -v_inf_, v_inf_);
    }
}

NoiseTrack::Sample NoiseTrack::at(double t) const {
    if (y_.empty()) return {};
    const double pos = std::max(t, 0.0) / sample_period_;
    const auto last = y_.size() - 1;
    const auto k = std::min(static_cast<std::size_t>(pos), last);
    if (k == last) return {y_[last], z_[last]};
    const double f = pos - static_cast<double>(k);
    const double s = f * f * (3.0 - 2.0 * f);
    return {y_[k] + s * (y_[k + 1] - y_[k]), z_[k] + s * (z_[k + 1] - z_[k])};
}

double NoiseTrack::realized_sup() const {
    double m = 0.0;
    for (std::size_t k = 0; k < y_.size(); ++k) m = std::max({m, std::abs(y_[k]), std::abs(z_[k])});
    return m;
}

GravityMeasurement gravity_at(double t, const TerrainProfile& profile, const NoiseTrack& noise) {
    const auto g = gravity_truth(t, profile);
    const auto n = noise.at(t);
    return {g.g_y + n.v_y, g.g_z + n.v_z, g.g_y, g.g_z};
}

void DisturbanceChannel::validate() const {
    if (!(sign == -1.0 || sign == 0.0 || sign == 1.0)) {
        throw DomainError("DisturbanceChannel: sign must be -1, 0 or +1");
    }
    if (!(a >= 0.0 && b >= 0.0 && c >= 0.0)) {
        throw DomainError("DisturbanceChannel: a, b, c must be >= 0");
    }
    if (!(ripple >= 0.0 && ripple <= 1.0)) throw DomainError("DisturbanceChannel: ripple in [0,1]");
    if (!(frequency >= 0.0)) throw DomainError("DisturbanceChannel: negative frequency");
}

double DisturbanceChannel::envelope(double t) const {
    if (sign == 0.0) return 0.0;
    return a * std::exp(-c * t) + b;
}

double DisturbanceChannel::value(double t) const {
    if (sign == 0.0) return 0.0;
    const double shape = 1.0 - ripple + ripple * std::sin(2.0 * kPi * frequency * t);
    return sign * envelope(t) * shape;
}

}  // namespace rollsafe
