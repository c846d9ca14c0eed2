#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <limits>
#include <random>

#include "rollsafe/sysmodel.hpp"

using namespace rollsafe;

TEST_CASE("eval_dynamics examples") {
    ActuatorParams p;
    auto d0 = eval_dynamics({}, {}, p);
    for (double x : d0) CHECK(x == 0.0);

    p.tau_v = 2.0;
    RobotState s{0, 0, 0, 0, 1};
    auto d1 = eval_dynamics(s, {1.0, 0.0}, p);
    CHECK(d1[4] == doctest::Approx(0.0));
    CHECK(d1[0] == doctest::Approx(1.0));

    ActuatorParams q;
    q.tau_omega = 1.0;
    RobotState s2{0, 0, kPi / 2, 0.5, 2};
    auto d2 = eval_dynamics(s2, {0, 0}, q);
    CHECK(d2[1] == doctest::Approx(2.0));
    CHECK(d2[3] == doctest::Approx(-0.5));
}

TEST_CASE("eval_dynamics rejects non-finite input") {
    RobotState s;
    s.v = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(eval_dynamics(s, {}, {}), DomainError);
    CHECK_THROWS_AS(eval_dynamics({}, {INFINITY, 0.0}, {}), DomainError);
}

TEST_CASE("dynamics are affine in u") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2, 2);
    ActuatorParams p{3.0, 4.0};
    for (int i = 0; i < 200; ++i) {
        RobotState s{u(rng), u(rng), u(rng), u(rng), u(rng)};
        ControlInput a{u(rng), u(rng)}, b{u(rng), u(rng)};
        const double k = u(rng);
        ControlInput ab{a.u_v + k * b.u_v, a.u_omega + k * b.u_omega};
        const auto f0 = eval_dynamics(s, {}, p);
        const auto fa = eval_dynamics(s, a, p);
        const auto fb = eval_dynamics(s, b, p);
        const auto fab = eval_dynamics(s, ab, p);
        for (int j = 0; j < 5; ++j) {
            CHECK(fab[j] - f0[j] == doctest::Approx((fa[j] - f0[j]) + k * (fb[j] - f0[j])).epsilon(1e-12));
        }
    }
}

TEST_CASE("actuator lag converges geometrically") {
    ActuatorParams p{5.0, 5.0};
    std::array<double, 5> x{0, 0, 0, -1.0, 2.0};
    const ControlInput u{-1.5, 0.7};
    const double dt = 0.005;
    const int n = static_cast<int>(std::round((10.0 / 5.0) / dt));
    auto rhs = [&](double, const std::array<double, 5>& y) {
        return eval_dynamics({y[0], y[1], y[2], y[3], y[4]}, u, p);
    };
    for (int i = 0; i < n; ++i) x = step_rk4<5>(x, i * dt, dt, rhs);
    CHECK(std::abs(x[4] - u.u_v) <= 1e-3 * std::abs(2.0 - u.u_v) + 1e-9);
    CHECK(std::abs(x[3] - u.u_omega) <= 1e-3 * std::abs(-1.0 - u.u_omega) + 1e-9);
}

TEST_CASE("step_rk4 basics") {
    auto zero = [](double, const std::array<double, 2>&) { return std::array<double, 2>{0, 0}; };
    const std::array<double, 2> x0{1.5, -2.0};
    CHECK(step_rk4<2>(x0, 0.0, 0.1, zero) == x0);

    auto decay = [](double, const std::array<double, 1>& y) { return std::array<double, 1>{-y[0]}; };
    const auto x1 = step_rk4<1>({1.0}, 0.0, 0.02, decay);
    CHECK(std::abs(x1[0] - 0.980198673) < 1e-9);

    CHECK_THROWS_AS(step_rk4<1>({1.0}, 0.0, 0.0, decay), DomainError);
    auto blow = [](double, const std::array<double, 1>&) {
        return std::array<double, 1>{std::numeric_limits<double>::infinity()};
    };
    CHECK_THROWS_AS(step_rk4<1>({1.0}, 0.0, 0.1, blow), NumericalError);
}

TEST_CASE("step_rk4 matches the matrix exponential") {
    Eigen::Matrix2d A;
    A << -0.4, 1.3, -2.1, -0.2;
    auto rhs = [&](double, const std::array<double, 2>& y) {
        return std::array<double, 2>{A(0, 0) * y[0] + A(0, 1) * y[1], A(1, 0) * y[0] + A(1, 1) * y[1]};
    };
    std::array<double, 2> x{1.0, 0.5};
    for (int i = 0; i < 50; ++i) x = step_rk4<2>(x, i * 0.02, 0.02, rhs);
    const Eigen::Vector2d ref = (A * 1.0).exp() * Eigen::Vector2d(1.0, 0.5);
    CHECK(std::abs(x[0] - ref(0)) <= 1e-7 * ref.norm());
    CHECK(std::abs(x[1] - ref(1)) <= 1e-7 * ref.norm());
}

TEST_CASE("rk4 is fourth order") {
    // y' = y cos t, y(1) = exp(sin 1)
    auto rhs = [](double t, const std::array<double, 1>& y) {
        return std::array<double, 1>{y[0] * std::cos(t)};
    };
    auto err = [&](double dt) {
        std::array<double, 1> y{1.0};
        const int n = static_cast<int>(std::round(1.0 / dt));
        for (int i = 0; i < n; ++i) y = step_rk4<1>(y, i * dt, dt, rhs);
        return std::abs(y[0] - std::exp(std::sin(1.0)));
    };
    CHECK(err(0.1) / err(0.05) >= 12.0);
    CHECK(err(0.05) / err(0.025) >= 12.0);
}

TEST_CASE("gravity signals") {
    TerrainProfile flat;
    NoiseTrack quiet(NoiseConfig{}, 1, 1.0);
    auto g = gravity_at(0.3, flat, quiet);
    CHECK(g.p_y == 0.0);
    CHECK(g.p_z == doctest::Approx(-9.81));
    CHECK(g.g_z0 == doctest::Approx(-9.81));

    TerrainProfile slope;
    slope.roll_start = slope.roll_end = deg_to_rad(27.0);
    auto s = gravity_at(1.0, slope, quiet);
    CHECK(s.g_y0 == doctest::Approx(4.454).epsilon(1e-3));
    CHECK(s.g_z0 == doctest::Approx(-8.741).epsilon(1e-3));

    NoiseConfig nc;
    nc.v_inf = 0.1;
    NoiseTrack noisy(nc, 9, 2.0);
    auto m = gravity_at(0.5, flat, noisy);
    CHECK(m.g_y0 == 0.0);
    CHECK(m.p_y == doctest::Approx(noisy.at(0.5).v_y));
    CHECK(m.p_z - m.g_z0 == doctest::Approx(noisy.at(0.5).v_z));
}

TEST_CASE("gravity magnitude is preserved and g_z stays negative") {
    TerrainProfile p;
    p.roll_end = deg_to_rad(27.0);
    p.ramp_start = 0.5;
    p.ramp_duration = 2.0;
    p.sine_amplitude = deg_to_rad(5.0);
    p.sine_frequency = 0.7;
    for (int i = 0; i <= 1000; ++i) {
        const auto g = gravity_truth(i * 0.005, p);
        CHECK(std::abs(g.g_y * g.g_y + g.g_z * g.g_z - 9.81 * 9.81) < 1e-12 * 9.81 * 9.81 * 10);
        CHECK(g.g_z < 0.0);
    }
}

TEST_CASE("terrain rates match finite differences") {
    TerrainProfile p;
    p.roll_end = deg_to_rad(20.0);
    p.ramp_start = 0.3;
    p.ramp_duration = 1.5;
    p.sine_amplitude = 0.05;
    p.sine_frequency = 1.3;
    const double eps = 1e-6;
    for (double t : {0.1, 0.5, 1.0, 1.7, 2.5}) {
        CHECK(p.roll_rate(t) == doctest::Approx((p.roll(t + eps) - p.roll(t - eps)) / (2 * eps)).epsilon(1e-6));
        CHECK(p.roll_accel(t) ==
              doctest::Approx((p.roll_rate(t + eps) - p.roll_rate(t - eps)) / (2 * eps)).epsilon(1e-5));
        const auto g = gravity_truth(t, p);
        const double fy = (gravity_truth(t + eps, p).g_y - gravity_truth(t - eps, p).g_y) / (2 * eps);
        CHECK(g.g_y_rate == doctest::Approx(fy).epsilon(1e-6));
    }
}

TEST_CASE("noise respects its bound and is reproducible") {
    NoiseConfig nc;
    nc.v_inf = 0.03;
    NoiseTrack a(nc, 42, 5.0), b(nc, 42, 5.0), c(nc, 43, 5.0);
    CHECK(a.realized_sup() <= 0.03);
    bool differs = false;
    for (int i = 0; i < 5000; ++i) {
        const double t = i * 0.001 + 0.0003;
        const auto sa = a.at(t);
        CHECK(std::abs(sa.v_y) <= 0.03);
        CHECK(std::abs(sa.v_z) <= 0.03);
        CHECK(sa.v_y == b.at(t).v_y);
        if (sa.v_y != c.at(t).v_y) differs = true;
    }
    CHECK(differs);
}

TEST_CASE("disturbance stays within its envelope") {
    DisturbanceChannel ch{-1.0, 0.4, 0.5, 0.1, 0.3, 0.8};
    for (int i = 0; i < 2000; ++i) {
        const double t = i * 0.01;
        CHECK(std::abs(ch.value(t)) <= ch.envelope(t) + 1e-15);
    }
    DisturbanceChannel off;
    CHECK(off.value(1.0) == 0.0);
    CHECK(off.envelope(1.0) == 0.0);
}

TEST_CASE("wrap_angle and input box") {
    CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
    InputBox box;
    const auto c = box.clamp({5.0, -7.0});
    CHECK(c.u_v == 3.0);
    CHECK(c.u_omega == -2.0);
    InputBox bad{1.0, -1.0, 0.0, 0.0};
    CHECK_THROWS(bad.validate());
}
