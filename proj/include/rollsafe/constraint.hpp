#pragma once

#include <array>
#include <string>

namespace rollsafe {

// a_row . u >= beta over u = (u_v, u_omega).
struct ConstraintRow {
    std::array<double, 2> a_row{0.0, 0.0};
    double beta = 0.0;
    std::string label;

    double residual(const std::array<double, 2>& u) const {
        return a_row[0] * u[0] + a_row[1] * u[1] - beta;
    }
};

}  // namespace rollsafe
