#include "rollsafe/batch.hpp"

#include <algorithm>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rollsafe {

namespace {

Scenario with_seed(const Scenario& base, std::uint64_t seed) {
    Scenario s = base;
    s.seed = seed;
    return s;
}

// Runs body(i) for i in [0, n) across threads and rethrows the first failure.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
    std::exception_ptr err;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(rollsafe_batch_error)
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

std::vector<RunSummary> run_seeds(const Scenario& base, std::span<const std::uint64_t> seeds) {
    std::vector<RunSummary> out(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) { out[i] = run(with_seed(base, seeds[i])).summary; });
    return out;
}

std::vector<RunSummary> run_seeds_serial(const Scenario& base, std::span<const std::uint64_t> seeds) {
    std::vector<RunSummary> out;
    out.reserve(seeds.size());
    for (auto seed : seeds) out.push_back(run(with_seed(base, seed)).summary);
    return out;
}

std::vector<ComparisonRow> compare_parallel(const Scenario& base, const std::vector<Variant>& variants,
                                            std::vector<RunResult>* results) {
    std::vector<Variant> list = variants;
    if (list.empty()) list.push_back(base.variant);
    std::vector<RunResult> runs(list.size());
    parallel_for(list.size(), [&](std::size_t i) { runs[i] = run(with_variant(base, list[i])); });
    std::vector<ComparisonRow> rows;
    rows.reserve(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) rows.push_back({list[i], runs[i].summary});
    if (results) *results = std::move(runs);
    return rows;
}

std::vector<QpSolution> solve_batch(std::span<const QpProblem> problems) {
    std::vector<QpSolution> out(problems.size());
    parallel_for(problems.size(), [&](std::size_t i) { out[i] = solve(problems[i]); });
    return out;
}

std::vector<QpSolution> solve_batch_serial(std::span<const QpProblem> problems) {
    std::vector<QpSolution> out;
    out.reserve(problems.size());
    for (const auto& p : problems) out.push_back(solve(p));
    return out;
}

CbfAuditReport verify_cbf_candidate_parallel(Barrier which, const CbfAuditGrid& grid,
                                             const InputBox& box, const AlphaLinear& alpha,
                                             const GeometryParams& geom,
                                             const ActuatorParams& actuator) {
    grid.validate();
    box.validate();
    alpha.validate();
    std::vector<CbfAuditReport> slices(grid.roll_points);
    parallel_for(grid.roll_points, [&](std::size_t k) {
        auto& rep = slices[k];
        const double r = grid.roll_at(k);
        for (std::size_t i = 0; i < grid.v_points; ++i) {
            for (std::size_t j = 0; j < grid.omega_points; ++j) {
                const double v = grid.v_at(i);
                const double w = grid.omega_at(j);
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
    });
    CbfAuditReport out;
    out.barrier = barrier_name(which);
    for (const auto& s : slices) {
        out.points_checked += s.points_checked;
        out.degenerate_points += s.degenerate_points;
        out.necessary_violations += s.necessary_violations;
        out.bounded_input_violations += s.bounded_input_violations;
        if (!out.first_violation) out.first_violation = s.first_violation;
    }
    return out;
}

bool VerifyReport::pass() const {
    return std::all_of(schedules.begin(), schedules.end(), [](const auto& r) { return r.pass; }) &&
           std::all_of(audits.begin(), audits.end(), [](const auto& r) { return r.pass(); });
}

VerifyReport verify_scenario(const Scenario& sc) {
    sc.validate();
    VerifyReport rep;
    rep.schedules = schedule_reports(sc);
    const AlphaLinear alpha{sc.alpha_c};
    for (auto which : {Barrier::h1, Barrier::h2}) {
        rep.audits.push_back(
            verify_cbf_candidate_parallel(which, sc.audit, sc.box, alpha, sc.geometry, sc.actuator));
    }
    return rep;
}

}  // namespace rollsafe
