#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rollsafe/errors.hpp"
#include "rollsafe/qp.hpp"

using namespace rollsafe;

namespace {

ConstraintRow row(double a0, double a1, double beta) {
    ConstraintRow r;
    r.a_row = {a0, a1};
    r.beta = beta;
    return r;
}

QpProblem random_problem(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    QpProblem p;
    p.u_nom = {4 * u(rng), 3 * u(rng)};
    const int n = static_cast<int>(rng() % 3);
    for (int i = 0; i < n; ++i) p.rows.push_back(row(u(rng), u(rng), 0.8 * u(rng)));
    return p;
}

}  // namespace

TEST_CASE("feasible nominal passes through") {
    QpProblem p;
    p.u_nom = {0.5, -0.25};
    p.rows.push_back(row(1, 0, 0));
    const auto s = solve(p);
    CHECK(s.u_star == p.u_nom);
    CHECK(s.active_set.empty());
    CHECK(s.active_set_string() == "-");
    CHECK(s.status == QpStatus::optimal);
    CHECK(s.objective == 0.0);
}

TEST_CASE("half-plane projection") {
    QpProblem p;
    p.lower = {-2, -2};
    p.upper = {2, 2};
    p.rows.push_back(row(0, 1, 1));
    const auto s = solve(p);
    CHECK(s.u_star[0] == doctest::Approx(0.0));
    CHECK(s.u_star[1] == doctest::Approx(1.0));
    CHECK(s.active_set == std::vector<int>{0});
    CHECK(s.multipliers[0] == doctest::Approx(2.0));
}

TEST_CASE("box face and row corner") {
    QpProblem p;
    p.u_nom = {5.0, 0.0};
    p.rows.push_back(row(0, 1, 0.5));
    const auto s = solve(p);
    CHECK(s.u_star[0] == doctest::Approx(3.0));
    CHECK(s.u_star[1] == doctest::Approx(0.5));
    CHECK(s.active_set_string() == "row0+v_hi");
    CHECK(constraint_id_name(kBoxFaceBase + 2) == "w_lo");
}

TEST_CASE("validation and degenerate rows") {
    QpProblem bad;
    bad.lower = {1, 0};
    bad.upper = {0, 0};
    CHECK_THROWS_AS(solve(bad), DomainError);
    QpProblem many;
    for (int i = 0; i < 3; ++i) many.rows.push_back(row(1, 0, 0));
    CHECK_THROWS_AS(solve(many), DomainError);

    QpProblem vac;
    vac.u_nom = {0.3, 0.1};
    vac.rows.push_back(row(0, 0, -1.0));
    const auto s = solve(vac);
    CHECK(s.u_star == vac.u_nom);
    CHECK(s.warnings.size() == 1);

    QpProblem imp;
    imp.rows.push_back(row(0, 0, 1.0));
    const auto r = solve(imp);
    CHECK(r.status == QpStatus::infeasible_relaxed);
    CHECK(r.slack_used == doctest::Approx(1.0));
}

TEST_CASE("relaxation examples") {
    QpProblem p;
    p.rows.push_back(row(1, 1, 10.0));
    const auto s = solve(p);
    CHECK(s.status == QpStatus::infeasible_relaxed);
    CHECK(s.u_star[0] == doctest::Approx(3.0));
    CHECK(s.u_star[1] == doctest::Approx(2.0));
    CHECK(s.slack_used == doctest::Approx(5.0));

    // u_v >= 4 and u_v <= -4 cannot both hold; equal violations at u_v = 0
    QpProblem q;
    q.u_nom = {1.0, 0.7};
    q.rows.push_back(row(1, 0, 4.0));
    q.rows.push_back(row(-1, 0, 4.0));
    const auto r = solve(q);
    CHECK(r.status == QpStatus::infeasible_relaxed);
    CHECK(std::abs(r.u_star[0]) <= 1e-9);
    CHECK(r.u_star[1] == doctest::Approx(0.7));
    CHECK(r.slack_used == doctest::Approx(4.0));
    // grid minimax oracle
    double best = -1e300;
    for (int i = 0; i <= 600; ++i) {
        const double uv = -3.0 + i * 0.01;
        best = std::max(best, std::min(uv - 4.0, -uv - 4.0));
    }
    CHECK(-r.slack_used == doctest::Approx(best).epsilon(1e-9));

    std::mt19937_64 rng(2);
    for (int i = 0; i < 300; ++i) {
        const auto f = random_problem(rng);
        const auto a = solve(f);
        if (a.status != QpStatus::optimal) continue;
        const auto b = relax_infeasible(f);
        CHECK(b.slack_used == 0.0);
        CHECK(b.u_star[0] == doctest::Approx(a.u_star[0]).epsilon(1e-9));
        CHECK(b.u_star[1] == doctest::Approx(a.u_star[1]).epsilon(1e-9));
    }
}

TEST_CASE("kkt and feasibility on random problems") {
    std::mt19937_64 rng(99);
    int optimal = 0;
    for (int i = 0; i < 5000; ++i) {
        const auto p = random_problem(rng);
        const auto s = solve(p);
        if (s.status != QpStatus::optimal) continue;
        ++optimal;
        const auto k = kkt_report(p, s);
        CHECK(k.primal_violation <= 1e-9);
        CHECK(k.stationarity <= 1e-8);
        CHECK(k.min_multiplier >= -1e-8);
        CHECK(k.complementarity <= 1e-8);
    }
    CHECK(optimal > 4000);
}

TEST_CASE("idempotence and nonexpansiveness") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 2000; ++i) {
        auto p = random_problem(rng);
        const auto s = solve(p);
        if (s.status != QpStatus::optimal) continue;
        QpProblem again = p;
        again.u_nom = s.u_star;
        const auto s2 = solve(again);
        CHECK(std::abs(s2.u_star[0] - s.u_star[0]) <= 1e-12);
        CHECK(std::abs(s2.u_star[1] - s.u_star[1]) <= 1e-12);

        QpProblem moved = p;
        const double e0 = 1e-3 * u(rng), e1 = 1e-3 * u(rng);
        moved.u_nom = {p.u_nom[0] + e0, p.u_nom[1] + e1};
        const auto s3 = solve(moved);
        if (s3.status == QpStatus::optimal) {
            CHECK(std::hypot(s3.u_star[0] - s.u_star[0], s3.u_star[1] - s.u_star[1]) <=
                  std::hypot(e0, e1) + 1e-12);
        }
    }
}
