#pragma once

#include <array>
#include <string>
#include <vector>

#include "rollsafe/constraint.hpp"

namespace rollsafe {

// min ||u - u_nom||^2  s.t.  rows (at most two) and lower <= u <= upper.
struct QpProblem {
    std::array<double, 2> u_nom{0.0, 0.0};
    std::vector<ConstraintRow> rows;
    std::array<double, 2> lower{-3.0, -2.0};
    std::array<double, 2> upper{3.0, 2.0};

    void validate() const;
};

enum class QpStatus { optimal, infeasible_relaxed };

const char* qp_status_name(QpStatus status);

// Constraint ids used in active sets: rows keep their index (0, 1); box faces
// are kBoxFaceBase + {0: u_v >= lo, 1: u_v <= hi, 2: u_w >= lo, 3: u_w <= hi}.
inline constexpr int kMaxRows = 2;
inline constexpr int kBoxFaceBase = kMaxRows;

std::string constraint_id_name(int id);

struct QpSolution {
    std::array<double, 2> u_star{0.0, 0.0};
    QpStatus status = QpStatus::optimal;
    std::vector<int> active_set;       // sorted ids
    std::vector<double> multipliers;   // aligned with active_set
    double slack_used = 0.0;
    double objective = 0.0;
    std::vector<std::string> warnings;

    std::string active_set_string() const;
};

// Exact active-set enumeration over every subset of {rows, box faces} with at
// most two members. Falls back to relax_infeasible when nothing is feasible.
QpSolution solve(const QpProblem& problem);

// Max-min slack relaxation: find s* = max over the box of min_i (a_i.u - beta_i),
// then project u_nom onto the rows shifted by s*. A feasible problem gets the
// same answer as solve() with zero slack.
QpSolution relax_infeasible(const QpProblem& problem);

struct KktReport {
    double stationarity = 0.0;       // ||2(u - u_nom) - sum lambda_i a_i||
    double min_multiplier = 0.0;
    double complementarity = 0.0;    // max |lambda_i * slack_i|
    double primal_violation = 0.0;   // max(0, -(a.u - beta)) over rows and box
};

KktReport kkt_report(const QpProblem& problem, const QpSolution& solution);

}  // namespace rollsafe
