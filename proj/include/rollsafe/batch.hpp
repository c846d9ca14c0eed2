#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rollsafe/barrier.hpp"
#include "rollsafe/harness.hpp"
#include "rollsafe/qp.hpp"

namespace rollsafe {

// Data-parallel drivers. Each *_serial function is the plain loop the
// parallel version must reproduce exactly; results are ordered like the input.

std::vector<RunSummary> run_seeds(const Scenario& base, std::span<const std::uint64_t> seeds);
std::vector<RunSummary> run_seeds_serial(const Scenario& base, std::span<const std::uint64_t> seeds);

std::vector<ComparisonRow> compare_parallel(const Scenario& base, const std::vector<Variant>& variants,
                                            std::vector<RunResult>* results = nullptr);

std::vector<QpSolution> solve_batch(std::span<const QpProblem> problems);
std::vector<QpSolution> solve_batch_serial(std::span<const QpProblem> problems);

// Same report as verify_cbf_candidate, split over roll slices.
CbfAuditReport verify_cbf_candidate_parallel(Barrier which, const CbfAuditGrid& grid,
                                             const InputBox& box, const AlphaLinear& alpha,
                                             const GeometryParams& geom,
                                             const ActuatorParams& actuator);

struct VerifyReport {
    std::vector<ScheduleReport> schedules;
    std::vector<CbfAuditReport> audits;
    bool pass() const;
};

// Schedule checks for the configured filter plus the CBF audit of h1 and h2.
VerifyReport verify_scenario(const Scenario& scenario);

int max_threads();

}  // namespace rollsafe
