// Serial vs OpenMP timings for the batch kernels.
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "rollsafe/batch.hpp"

using namespace rollsafe;
using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
double time_ms(F&& f, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        f();
        const auto t1 = Clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

std::vector<QpProblem> random_problems(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<QpProblem> out(n);
    for (auto& p : out) {
        p.u_nom = {4.0 * u(rng), 3.0 * u(rng)};
        for (int i = 0; i < 2; ++i) {
            ConstraintRow r;
            r.a_row = {u(rng), u(rng)};
            r.beta = u(rng);
            p.rows.push_back(r);
        }
    }
    return out;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-18s serial %9.2f ms   parallel %9.2f ms   speedup %.2fx\n", name, serial, parallel,
                serial / parallel);
}

}  // namespace

int main() {
    std::printf("threads: %d\n", max_threads());

    const auto problems = random_problems(200000, 7);
    report("qp_batch", time_ms([&] { solve_batch_serial(problems); }, 3),
           time_ms([&] { solve_batch(problems); }, 3));

    CbfAuditGrid grid;
    grid.v_points = 241;
    grid.omega_points = 161;
    grid.roll_points = 55;
    const InputBox box;
    const AlphaLinear alpha{2.0};
    const GeometryParams geom;
    const ActuatorParams act;
    report("cbf_audit",
           time_ms([&] { verify_cbf_candidate(Barrier::h1, grid, box, alpha, geom, act); }, 3),
           time_ms([&] { verify_cbf_candidate_parallel(Barrier::h1, grid, box, alpha, geom, act); }, 3));

    const Scenario sc = default_scenario();
    std::vector<std::uint64_t> seeds(8);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = 100 + i;
    report("seed_sweep", time_ms([&] { run_seeds_serial(sc, seeds); }, 1),
           time_ms([&] { run_seeds(sc, seeds); }, 1));

    const auto variants = parse_variant_list("none,cbf_qp_bd,pssf_const:0.5,dacbf_def4,dacbf_cor1");
    report("compare", time_ms([&] { compare(sc, variants); }, 1),
           time_ms([&] { compare_parallel(sc, variants); }, 1));
    return 0;
}
