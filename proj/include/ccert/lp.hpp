#pragma once

#include <Eigen/Dense>
#include <string>

namespace ccert {

enum class LpStatus { Optimal, Infeasible, Unbounded };

// maximize c'x  subject to  a_eq x = b_eq,  a_ub x <= b_ub,  lo <= x <= hi.
// Empty matrices/vectors stand for "no such constraints"; lo/hi may be empty
// (free variables) or contain +-infinity entries.
struct LpProblem {
    Eigen::VectorXd c;
    Eigen::MatrixXd a_eq;
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd a_ub;
    Eigen::VectorXd b_ub;
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
};

// Duals follow the sensitivity convention: y = d(optimum)/d(b), so that at
// optimality c = a_eq' y_eq + a_ub' y_ub + bound multipliers, with y_ub >= 0.
struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd x;
    double objective = 0;
    Eigen::VectorXd y_eq;
    Eigen::VectorXd y_ub;
    double residual = 0;  // max violation of the original constraints at x
};

// Dense two-phase primal simplex with Bland's rule (no cycling). Intended for
// problems with few rows and possibly many columns; the optimal basis is
// re-verified by a residual check.
LpResult lp_solve(const LpProblem& p);

std::string to_string(LpStatus s);

}  // namespace ccert
