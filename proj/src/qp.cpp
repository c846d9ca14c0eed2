#include "rollsafe/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "rollsafe/errors.hpp"

namespace rollsafe {

namespace {

constexpr double kDegenerateNorm = 1e-12;

struct Lin {
    double a0 = 0.0;
    double a1 = 0.0;
    double b = 0.0;
    int id = 0;

    double residual(double u0, double u1) const { return a0 * u0 + a1 * u1 - b; }
    double norm() const { return std::hypot(a0, a1); }
};

struct Prepared {
    std::vector<Lin> lins;  // usable rows followed by the four box faces
    bool degenerate_infeasible = false;
    std::vector<std::string> warnings;
};

std::array<Lin, 4> box_faces(const QpProblem& p) {
    return {Lin{1.0, 0.0, p.lower[0], kBoxFaceBase + 0}, Lin{-1.0, 0.0, -p.upper[0], kBoxFaceBase + 1},
            Lin{0.0, 1.0, p.lower[1], kBoxFaceBase + 2}, Lin{0.0, -1.0, -p.upper[1], kBoxFaceBase + 3}};
}

Prepared prepare(const QpProblem& p) {
    Prepared out;
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        const auto& r = p.rows[i];
        Lin l{r.a_row[0], r.a_row[1], r.beta, static_cast<int>(i)};
        if (l.norm() < kDegenerateNorm) {
            if (r.beta <= 0.0) {
                out.warnings.push_back("dropped vacuous degenerate row " + r.label);
            } else {
                out.degenerate_infeasible = true;
                out.warnings.push_back("degenerate row " + r.label + " demands beta > 0");
            }
            continue;
        }
        out.lins.push_back(l);
    }
    for (const auto& f : box_faces(p)) out.lins.push_back(f);
    return out;
}

double feas_tol(const Lin& l, double u0, double u1) {
    return 1e-10 * (1.0 + std::abs(l.b) + l.norm() * std::hypot(u0, u1));
}

struct Candidate {
    double u0 = 0.0;
    double u1 = 0.0;
    double objective = 0.0;
    std::vector<int> active;
    std::vector<double> multipliers;
    bool kkt_valid = true;
};

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool better(const Candidate& c, const Candidate& best) {
    const double tie = 1e-12 * (1.0 + best.objective);
    if (c.objective < best.objective - tie) return true;
    if (c.objective > best.objective + tie) return false;
    if (c.kkt_valid != best.kkt_valid) return c.kkt_valid;
    return lex_less(c.active, best.active);
}

std::optional<Candidate> enumerate(const QpProblem& p, const std::vector<Lin>& lins) {
    const double n0 = p.u_nom[0];
    const double n1 = p.u_nom[1];
    std::optional<Candidate> best;

    auto consider = [&](double u0, double u1, std::vector<const Lin*> act) {
        for (const auto& l : lins) {
            if (l.residual(u0, u1) < -feas_tol(l, u0, u1)) return;
        }
        Candidate c;
        c.u0 = u0;
        c.u1 = u1;
        c.objective = (u0 - n0) * (u0 - n0) + (u1 - n1) * (u1 - n1);
        const double g0 = 2.0 * (u0 - n0);
        const double g1 = 2.0 * (u1 - n1);
        if (act.size() == 1) {
            const Lin& a = *act[0];
            c.multipliers = {(a.a0 * g0 + a.a1 * g1) / (a.a0 * a.a0 + a.a1 * a.a1)};
        } else if (act.size() == 2) {
            // Solve A^T lambda = g with A rows = active normals.
            const Lin& a = *act[0];
            const Lin& b = *act[1];
            const double det = a.a0 * b.a1 - b.a0 * a.a1;
            c.multipliers = {(g0 * b.a1 - b.a0 * g1) / det, (a.a0 * g1 - g0 * a.a1) / det};
        }
        for (const auto* l : act) c.active.push_back(l->id);
        if (c.active.size() == 2 && c.active[0] > c.active[1]) {
            std::swap(c.active[0], c.active[1]);
            std::swap(c.multipliers[0], c.multipliers[1]);
        }
        for (double m : c.multipliers) {
            if (m < -1e-9 * (1.0 + std::abs(m))) c.kkt_valid = false;
        }
        if (!best || better(c, *best)) best = std::move(c);
    };

    consider(n0, n1, {});
    for (std::size_t i = 0; i < lins.size(); ++i) {
        const Lin& a = lins[i];
        const double step = (a.b - (a.a0 * n0 + a.a1 * n1)) / (a.a0 * a.a0 + a.a1 * a.a1);
        consider(n0 + step * a.a0, n1 + step * a.a1, {&a});
    }
    for (std::size_t i = 0; i < lins.size(); ++i) {
        for (std::size_t j = i + 1; j < lins.size(); ++j) {
            const Lin& a = lins[i];
            const Lin& b = lins[j];
            const double det = a.a0 * b.a1 - b.a0 * a.a1;
            if (std::abs(det) <= 1e-12 * a.norm() * b.norm()) continue;
            const double u0 = (a.b * b.a1 - b.b * a.a1) / det;
            const double u1 = (a.a0 * b.b - b.a0 * a.b) / det;
            consider(u0, u1, {&a, &b});
        }
    }
    return best;
}

QpSolution to_solution(const QpProblem& p, const Candidate& c, std::vector<std::string> warnings) {
    QpSolution s;
    s.u_star = {std::clamp(c.u0, p.lower[0], p.upper[0]), std::clamp(c.u1, p.lower[1], p.upper[1])};
    s.status = QpStatus::optimal;
    s.active_set = c.active;
    s.multipliers = c.multipliers;
    s.objective = c.objective;
    s.warnings = std::move(warnings);
    return s;
}

// max s  s.t.  a_i.u - s >= beta_i (rows),  u in box.  Vertex enumeration in
// (u0, u1, s); returns -inf when there are no rows.
struct LpResult {
    double s = -std::numeric_limits<double>::infinity();
    double u0 = 0.0;
    double u1 = 0.0;
};

LpResult max_min_slack(const QpProblem& p) {
    struct Lin3 {
        double c0, c1, cs, b;
    };
    std::vector<Lin3> cons;
    for (const auto& r : p.rows) cons.push_back({r.a_row[0], r.a_row[1], -1.0, r.beta});
    if (cons.empty()) return {};
    for (const auto& f : box_faces(p)) cons.push_back({f.a0, f.a1, 0.0, f.b});

    LpResult best;
    const std::size_t n = cons.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                const Lin3& a = cons[i];
                const Lin3& b = cons[j];
                const Lin3& c = cons[k];
                const double det = a.c0 * (b.c1 * c.cs - b.cs * c.c1) -
                                   a.c1 * (b.c0 * c.cs - b.cs * c.c0) +
                                   a.cs * (b.c0 * c.c1 - b.c1 * c.c0);
                if (std::abs(det) < 1e-12) continue;
                const double x0 = (a.b * (b.c1 * c.cs - b.cs * c.c1) - a.c1 * (b.b * c.cs - b.cs * c.b) +
                                   a.cs * (b.b * c.c1 - b.c1 * c.b)) / det;
                const double x1 = (a.c0 * (b.b * c.cs - b.cs * c.b) - a.b * (b.c0 * c.cs - b.cs * c.c0) +
                                   a.cs * (b.c0 * c.b - b.b * c.c0)) / det;
                const double xs = (a.c0 * (b.c1 * c.b - b.b * c.c1) - a.c1 * (b.c0 * c.b - b.b * c.c0) +
                                   a.b * (b.c0 * c.c1 - b.c1 * c.c0)) / det;
                bool ok = true;
                for (const auto& l : cons) {
                    const double r = l.c0 * x0 + l.c1 * x1 + l.cs * xs - l.b;
                    if (r < -1e-10 * (1.0 + std::abs(l.b) + std::abs(xs))) {
                        ok = false;
                        break;
                    }
                }
                if (ok && xs > best.s) best = {xs, x0, x1};
            }
        }
    }
    return best;
}

QpSolution relax_impl(const QpProblem& p, std::vector<std::string> warnings) {
    const auto lp = max_min_slack(p);
    if (!std::isfinite(lp.s)) throw DomainError("relax_infeasible: no vertex found");

    if (lp.s >= 0.0) {
        const auto prep = prepare(p);
        if (!prep.degenerate_infeasible) {
            if (auto c = enumerate(p, prep.lins)) return to_solution(p, *c, prep.warnings);
        }
    }

    // Loosen every row by the best achievable slack, then project u_nom.
    QpProblem shifted = p;
    for (auto& r : shifted.rows) r.beta += lp.s - 1e-12 * (1.0 + std::abs(r.beta));
    const auto prep = prepare(shifted);
    QpSolution sol;
    if (auto c = enumerate(shifted, prep.lins)) {
        sol = to_solution(shifted, *c, {});
    } else {
        sol.u_star = {lp.u0, lp.u1};
        sol.objective = (lp.u0 - p.u_nom[0]) * (lp.u0 - p.u_nom[0]) +
                        (lp.u1 - p.u_nom[1]) * (lp.u1 - p.u_nom[1]);
        sol.warnings.push_back("relaxed projection failed; using max-min vertex");
    }
    sol.status = QpStatus::infeasible_relaxed;
    sol.slack_used = std::max(0.0, -lp.s);
    for (auto& w : warnings) sol.warnings.push_back(std::move(w));
    sol.warnings.push_back("infeasible: relaxed by " + std::to_string(sol.slack_used));
    return sol;
}

}  // namespace

void QpProblem::validate() const {
    if (rows.size() > static_cast<std::size_t>(kMaxRows)) throw DomainError("QpProblem: more than two rows");
    for (int i = 0; i < 2; ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !std::isfinite(u_nom[i])) {
            throw DomainError("QpProblem: non-finite box or nominal input");
        }
        if (!(lower[i] <= upper[i])) throw DomainError("QpProblem: empty box");
    }
    for (const auto& r : rows) {
        if (!std::isfinite(r.a_row[0]) || !std::isfinite(r.a_row[1]) || !std::isfinite(r.beta)) {
            throw DomainError("QpProblem: non-finite constraint row " + r.label);
        }
    }
}

const char* qp_status_name(QpStatus status) {
    return status == QpStatus::optimal ? "optimal" : "infeasible_relaxed";
}

std::string constraint_id_name(int id) {
    static const char* faces[] = {"v_lo", "v_hi", "w_lo", "w_hi"};
    if (id >= 0 && id < kBoxFaceBase) return "row" + std::to_string(id);
    if (id >= kBoxFaceBase && id < kBoxFaceBase + 4) return faces[id - kBoxFaceBase];
    return "?";
}

std::string QpSolution::active_set_string() const {
    std::string out;
    for (std::size_t i = 0; i < active_set.size(); ++i) {
        if (i) out += '+';
        out += constraint_id_name(active_set[i]);
    }
    return out.empty() ? "-" : out;
}

QpSolution solve(const QpProblem& problem) {
    problem.validate();
    auto prep = prepare(problem);
    if (!prep.degenerate_infeasible) {
        if (auto c = enumerate(problem, prep.lins)) return to_solution(problem, *c, std::move(prep.warnings));
    }
    return relax_impl(problem, std::move(prep.warnings));
}

QpSolution relax_infeasible(const QpProblem& problem) {
    problem.validate();
    if (problem.rows.empty()) return solve(problem);
    return relax_impl(problem, {});
}

KktReport kkt_report(const QpProblem& p, const QpSolution& s) {
    KktReport rep;
    double g0 = 2.0 * (s.u_star[0] - p.u_nom[0]);
    double g1 = 2.0 * (s.u_star[1] - p.u_nom[1]);
    const auto faces = box_faces(p);
    auto lin_for = [&](int id) -> Lin {
        if (id < kBoxFaceBase) {
            const auto& r = p.rows.at(static_cast<std::size_t>(id));
            return {r.a_row[0], r.a_row[1], r.beta, id};
        }
        return faces.at(static_cast<std::size_t>(id - kBoxFaceBase));
    };
    rep.min_multiplier = s.multipliers.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.active_set.size(); ++i) {
        const Lin l = lin_for(s.active_set[i]);
        const double lam = s.multipliers.at(i);
        g0 -= lam * l.a0;
        g1 -= lam * l.a1;
        rep.min_multiplier = std::min(rep.min_multiplier, lam);
        rep.complementarity = std::max(rep.complementarity, std::abs(lam * l.residual(s.u_star[0], s.u_star[1])));
    }
    rep.stationarity = std::hypot(g0, g1);
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        rep.primal_violation = std::max(rep.primal_violation, -p.rows[i].residual(s.u_star));
    }
    for (const auto& f : faces) rep.primal_violation = std::max(rep.primal_violation, -f.residual(s.u_star[0], s.u_star[1]));
    return rep;
}

}  // namespace rollsafe
