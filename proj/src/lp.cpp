#include "ccert/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ccert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-9;

// Internal standard form: maximize c'u s.t. T u = b, u >= 0, after variable
// shifting/splitting and slack insertion. Column layout:
//   [structural columns | slacks | artificials]
struct Tableau {
    Eigen::MatrixXd t;       // rows x (cols + 1), last column is rhs
    Eigen::VectorXd cost;    // phase-2 objective per column
    std::vector<int> basis;  // basic column per row
    int rows = 0, cols = 0, art_begin = 0;

    double rhs(int i) const { return t(i, cols); }

    void pivot(int row, int col) {
        t.row(row) /= t(row, col);
        for (int i = 0; i < rows; ++i) {
            if (i == row) continue;
            double f = t(i, col);
            if (f != 0.0) t.row(i) -= f * t.row(row);
        }
        basis[row] = col;
    }

    // Bland's rule over an explicit reduced-cost vector; artificial columns
    // may be excluded (phase 2).
    bool simplex(const Eigen::VectorXd& obj, bool allow_artificial, bool* unbounded) {
        *unbounded = false;
        for (long iter = 0;; ++iter) {
            if (iter > 200000) throw std::runtime_error("lp_solve: iteration limit reached");
            // reduced costs r_j = obj_j - obj_B' B^{-1} A_j, computed via the
            // current tableau: r = obj - t' obj_B restricted to rows.
            Eigen::VectorXd obj_b(rows);
            for (int i = 0; i < rows; ++i) obj_b[i] = obj[basis[i]];
            int enter = -1;
            int limit = allow_artificial ? cols : art_begin;
            for (int j = 0; j < limit; ++j) {
                double r = obj[j] - obj_b.dot(t.col(j).head(rows));
                if (r > kCostTol) {
                    enter = j;
                    break;  // Bland: smallest improving index
                }
            }
            if (enter < 0) return true;
            int leave = -1;
            double best = kInf;
            for (int i = 0; i < rows; ++i) {
                double a = t(i, enter);
                if (a > kPivotTol) {
                    double ratio = rhs(i) / a;
                    if (ratio < best - 1e-12 ||
                        (ratio < best + 1e-12 &&
                         (leave < 0 || basis[i] < basis[leave]))) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) {
                *unbounded = true;
                return false;
            }
            pivot(leave, enter);
        }
    }
};

}  // namespace

std::string to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "?";
}

LpResult lp_solve(const LpProblem& p) {
    const int n = static_cast<int>(p.c.size());
    const int m_eq = static_cast<int>(p.b_eq.size());
    const int m_ub = static_cast<int>(p.b_ub.size());
    if ((m_eq && p.a_eq.cols() != n) || (m_ub && p.a_ub.cols() != n) ||
        (m_eq && p.a_eq.rows() != m_eq) || (m_ub && p.a_ub.rows() != m_ub))
        throw std::invalid_argument("lp_solve: dimension mismatch");
    Eigen::VectorXd lo = p.lo.size() ? p.lo : Eigen::VectorXd::Constant(n, -kInf);
    Eigen::VectorXd hi = p.hi.size() ? p.hi : Eigen::VectorXd::Constant(n, kInf);
    if (lo.size() != n || hi.size() != n)
        throw std::invalid_argument("lp_solve: bounds dimension mismatch");

    // Variable transform x_j = shift_j + sign_j * u_a (+ optionally - u_b for
    // free variables). Finite opposite bound becomes an extra <= row.
    struct Var {
        double shift;
        double sign;
        int col_a;
        int col_b;  // -1 unless free split
    };
    std::vector<Var> vars(n);
    int ncols = 0;
    struct BoundRow {
        int var;
        double rhs;
    };
    std::vector<BoundRow> bound_rows;
    for (int j = 0; j < n; ++j) {
        if (lo[j] > hi[j]) return {};  // infeasible box
        if (std::isfinite(lo[j])) {
            vars[j] = {lo[j], +1.0, ncols++, -1};
            if (std::isfinite(hi[j])) bound_rows.push_back({j, hi[j] - lo[j]});
        } else if (std::isfinite(hi[j])) {
            vars[j] = {hi[j], -1.0, ncols++, -1};
        } else {
            vars[j] = {0.0, +1.0, ncols, ncols + 1};
            ncols += 2;
        }
    }

    const int rows = m_eq + m_ub + static_cast<int>(bound_rows.size());
    const int n_slack = m_ub + static_cast<int>(bound_rows.size());
    const int total = ncols + n_slack + rows;  // + artificials

    Tableau tb;
    tb.rows = rows;
    tb.cols = total;
    tb.art_begin = ncols + n_slack;
    tb.t = Eigen::MatrixXd::Zero(rows, total + 1);
    tb.cost = Eigen::VectorXd::Zero(total);
    tb.basis.resize(rows);

    // structural part of a row: row += coeff * x_j expanded in u-columns;
    // returns the constant contribution coeff * shift_j.
    auto add_term = [&](int row, int j, double coeff) -> double {
        const Var& v = vars[j];
        tb.t(row, v.col_a) += coeff * v.sign;
        if (v.col_b >= 0) tb.t(row, v.col_b) -= coeff;
        return coeff * v.shift;
    };

    int r = 0;
    for (int i = 0; i < m_eq; ++i, ++r) {
        double rhs = p.b_eq[i];
        for (int j = 0; j < n; ++j)
            if (p.a_eq(i, j) != 0.0) rhs -= add_term(r, j, p.a_eq(i, j));
        tb.t(r, total) = rhs;
    }
    for (int i = 0; i < m_ub; ++i, ++r) {
        double rhs = p.b_ub[i];
        for (int j = 0; j < n; ++j)
            if (p.a_ub(i, j) != 0.0) rhs -= add_term(r, j, p.a_ub(i, j));
        tb.t(r, ncols + i) = 1.0;  // slack
        tb.t(r, total) = rhs;
    }
    for (std::size_t i = 0; i < bound_rows.size(); ++i, ++r) {
        tb.t(r, vars[bound_rows[i].var].col_a) = 1.0;
        tb.t(r, ncols + m_ub + static_cast<int>(i)) = 1.0;
        tb.t(r, total) = bound_rows[i].rhs;
    }

    // objective in u-columns
    double obj_shift = 0;
    for (int j = 0; j < n; ++j) {
        if (p.c[j] == 0.0) continue;
        const Var& v = vars[j];
        tb.cost[v.col_a] += p.c[j] * v.sign;
        if (v.col_b >= 0) tb.cost[v.col_b] -= p.c[j];
        obj_shift += p.c[j] * v.shift;
    }

    // normalize rhs >= 0 and install artificial basis; remember row signs so
    // duals can be mapped back.
    std::vector<double> row_sign(rows, 1.0);
    for (int i = 0; i < rows; ++i) {
        if (tb.t(i, total) < 0) {
            tb.t.row(i) *= -1.0;
            row_sign[i] = -1.0;
        }
        tb.t(i, tb.art_begin + i) = 1.0;
        tb.basis[i] = tb.art_begin + i;
    }
    // keep the normalized standard-form data for a final basis
    // refactorization (pivoting accumulates roundoff over many iterations)
    Eigen::MatrixXd a_orig = tb.t.leftCols(total);
    Eigen::VectorXd b_orig = tb.t.col(total).head(rows);

    LpResult res;

    // Phase 1: maximize -sum(artificials).
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total);
    for (int i = 0; i < rows; ++i) phase1[tb.art_begin + i] = -1.0;
    bool unbounded = false;
    tb.simplex(phase1, true, &unbounded);
    double art_sum = 0;
    for (int i = 0; i < rows; ++i)
        if (tb.basis[i] >= tb.art_begin) art_sum += tb.rhs(i);
    if (art_sum > 1e-7) {
        res.status = LpStatus::Infeasible;
        return res;
    }
    // Drive basic artificials (at zero) out of the basis where possible.
    for (int i = 0; i < rows; ++i) {
        if (tb.basis[i] < tb.art_begin) continue;
        for (int j = 0; j < tb.art_begin; ++j) {
            if (std::fabs(tb.t(i, j)) > 1e-8) {
                tb.pivot(i, j);
                break;
            }
        }
    }

    // Phase 2.
    if (!tb.simplex(tb.cost, false, &unbounded)) {
        if (unbounded) {
            res.status = LpStatus::Unbounded;
            return res;
        }
    }

    // Recover x and duals from a fresh factorization of the final basis.
    Eigen::MatrixXd basis_mat(rows, rows);
    Eigen::VectorXd cost_b(rows);
    for (int i = 0; i < rows; ++i) {
        basis_mat.col(i) = a_orig.col(tb.basis[i]);
        cost_b[i] = tb.cost[tb.basis[i]];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_mat);
    Eigen::VectorXd xb = lu.solve(b_orig);
    Eigen::VectorXd y_std = lu.transpose().solve(cost_b);
    double scale = std::max(1.0, b_orig.lpNorm<Eigen::Infinity>());
    bool refac_ok = xb.allFinite() && y_std.allFinite() &&
                    (basis_mat * xb - b_orig).lpNorm<Eigen::Infinity>() <= 1e-7 * scale;
    if (!refac_ok) {
        // singular refactorization (degenerate redundant rows): fall back to
        // the accumulated tableau values
        xb.resize(rows);
        for (int i = 0; i < rows; ++i) xb[i] = tb.rhs(i);
        y_std.resize(rows);
        for (int i = 0; i < rows; ++i)
            y_std[i] = cost_b.dot(tb.t.col(tb.art_begin + i).head(rows));
    }
    Eigen::VectorXd u = Eigen::VectorXd::Zero(total);
    for (int i = 0; i < rows; ++i) u[tb.basis[i]] = xb[i];
    res.x.resize(n);
    for (int j = 0; j < n; ++j) {
        const Var& v = vars[j];
        double val = v.shift + v.sign * u[v.col_a];
        if (v.col_b >= 0) val -= u[v.col_b];
        res.x[j] = val;
    }
    res.objective = tb.cost.dot(u) + obj_shift;

    Eigen::VectorXd y(rows);
    for (int i = 0; i < rows; ++i) y[i] = row_sign[i] * y_std[i];
    res.y_eq = y.head(m_eq);
    res.y_ub = y.segment(m_eq, m_ub);

    // Residual re-verification against the original data.
    double resid = 0;
    for (int i = 0; i < m_eq; ++i)
        resid = std::max(resid, std::fabs(p.a_eq.row(i).dot(res.x) - p.b_eq[i]));
    for (int i = 0; i < m_ub; ++i)
        resid = std::max(resid, p.a_ub.row(i).dot(res.x) - p.b_ub[i]);
    for (int j = 0; j < n; ++j) {
        if (std::isfinite(lo[j])) resid = std::max(resid, lo[j] - res.x[j]);
        if (std::isfinite(hi[j])) resid = std::max(resid, res.x[j] - hi[j]);
    }
    res.residual = resid;
    res.status = LpStatus::Optimal;
    return res;
}

}  // namespace ccert
