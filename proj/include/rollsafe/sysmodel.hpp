#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rollsafe/errors.hpp"

namespace rollsafe {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

// Planar unicycle with first-order actuator lags on speed and yaw rate.
struct RobotState {
    double x = 0.0;      // m, inertial
    double y = 0.0;      // m, inertial
    double theta = 0.0;  // rad, yaw
    double omega = 0.0;  // rad/s
    double v = 0.0;      // m/s

    bool finite() const;
};

struct ControlInput {
    double u_v = 0.0;      // commanded speed, m/s
    double u_omega = 0.0;  // commanded yaw rate, rad/s
};

struct InputBox {
    double v_min = -3.0;
    double v_max = 3.0;
    double omega_min = -2.0;
    double omega_max = 2.0;

    void validate() const;
    ControlInput clamp(const ControlInput& u) const;
    bool contains(const ControlInput& u, double tol = 0.0) const;
};

// Inverse actuator time constants (1/s).
struct ActuatorParams {
    double tau_v = 5.0;
    double tau_omega = 5.0;

    void validate() const;
};

// Additive disturbance on the omega-dot and v-dot channels only.
struct DisturbanceSample {
    double d_omega = 0.0;  // rad/s^2
    double d_v = 0.0;      // m/s^2
};

using StateDerivative = std::array<double, 5>;

// x' = f(x) + g(x) u + d for the five-state model.
StateDerivative eval_dynamics(const RobotState& state, const ControlInput& u,
                              const ActuatorParams& params,
                              const DisturbanceSample& d = {});

// Body roll imposed by the terrain. A cosine-blended ramp from roll_start to
// roll_end over [ramp_start, ramp_start + ramp_duration], plus an optional
// sinusoid. C1 everywhere, smooth inside each piece.
struct TerrainProfile {
    double roll_start = 0.0;  // rad
    double roll_end = 0.0;    // rad
    double ramp_start = 0.0;  // s
    double ramp_duration = 0.0;
    double sine_amplitude = 0.0;  // rad
    double sine_frequency = 0.0;  // Hz
    double sine_phase = 0.0;      // rad
    double gravity = 9.81;        // m/s^2

    void validate() const;
    double roll(double t) const;
    double roll_rate(double t) const;
    double roll_accel(double t) const;
};

// Body-frame gravity components. Body z points up, so upright g_z < 0.
struct GravityTruth {
    double g_y = 0.0;
    double g_z = 0.0;
    double g_y_rate = 0.0;
    double g_z_rate = 0.0;
};

GravityTruth gravity_truth(double t, const TerrainProfile& profile);

// Seeded measurement noise, one track per gravity channel. Uniform samples in
// [-v_inf, v_inf] pass through a first-order low-pass and are joined with a
// smoothstep blend, so every value is a convex combination of samples and the
// sup-norm bound holds exactly.
struct NoiseConfig {
    double v_inf = 0.0;           // m/s^2
    double sample_rate = 1000.0;  // Hz
    double cutoff_hz = 50.0;
};

class NoiseTrack {
public:
    NoiseTrack() = default;
    NoiseTrack(const NoiseConfig& config, std::uint64_t seed, double horizon);

    struct Sample {
        double v_y = 0.0;
        double v_z = 0.0;
    };

    Sample at(double t) const;
    double bound() const { return v_inf_; }
    // Largest magnitude actually stored; always <= bound().
    double realized_sup() const;

private:
    double v_inf_ = 0.0;
    double sample_period_ = 1.0;
    std::vector<double> y_;
    std::vector<double> z_;
};

struct GravityMeasurement {
    double p_y = 0.0;  // noisy, what the controller sees
    double p_z = 0.0;
    double g_y0 = 0.0;  // truth, for post-hoc evaluation only
    double g_z0 = 0.0;
};

GravityMeasurement gravity_at(double t, const TerrainProfile& profile,
                              const NoiseTrack& noise);

// One disturbance channel: sign * (a e^{-c t} + b) * (1 - r + r sin(2 pi f t)).
// Magnitude never exceeds the envelope a e^{-c t} + b.
struct DisturbanceChannel {
    double sign = 0.0;  // -1, 0 or +1
    double a = 0.0;
    double c = 0.0;
    double b = 0.0;
    double ripple = 0.0;  // in [0, 1]
    double frequency = 0.0;

    void validate() const;
    double value(double t) const;
    double envelope(double t) const;
};

struct DisturbanceModel {
    DisturbanceChannel omega;
    DisturbanceChannel v;

    DisturbanceSample at(double t) const { return {omega.value(t), v.value(t)}; }
};

// Classical RK4 step for an autonomous-in-form system rhs(t, x).
template <std::size_t N, typename Rhs>
std::array<double, N> step_rk4(const std::array<double, N>& x, double t, double dt,
                               Rhs&& rhs) {
    if (!(dt > 0.0)) throw DomainError("step_rk4: dt must be positive");
    auto axpy = [](const std::array<double, N>& a, double s, const std::array<double, N>& b) {
        std::array<double, N> out;
        for (std::size_t i = 0; i < N; ++i) out[i] = a[i] + s * b[i];
        return out;
    };
    const auto k1 = rhs(t, x);
    const auto k2 = rhs(t + 0.5 * dt, axpy(x, 0.5 * dt, k1));
    const auto k3 = rhs(t + 0.5 * dt, axpy(x, 0.5 * dt, k2));
    const auto k4 = rhs(t + dt, axpy(x, dt, k3));
    std::array<double, N> out;
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!std::isfinite(out[i])) {
            throw NumericalError("step_rk4: non-finite state component " + std::to_string(i) +
                                 " at t=" + std::to_string(t + dt));
        }
    }
    return out;
}

}  // namespace rollsafe
