#include "ccert/cones.hpp"

#include <cmath>
#include <stdexcept>

namespace ccert {

namespace {

constexpr double kZeroGen = 1e-12;

std::vector<int> keep_nonzero(const std::vector<Eigen::VectorXd>& g) {
    std::vector<int> kept;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g[i].norm() >= kZeroGen) kept.push_back(static_cast<int>(i));
    return kept;
}

}  // namespace

SpanRankResult span_rank(const std::vector<Eigen::VectorXd>& generators, double tol) {
    SpanRankResult out;
    if (generators.empty()) return out;
    const int n = static_cast<int>(generators.front().size());
    Eigen::MatrixXd m(n, static_cast<int>(generators.size()));
    for (std::size_t i = 0; i < generators.size(); ++i) m.col(static_cast<int>(i)) = generators[i];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
    out.singular_values = svd.singularValues();
    double smax = out.singular_values.size() ? out.singular_values[0] : 0.0;
    if (smax <= 0) return out;
    int r = 0;
    for (int i = 0; i < out.singular_values.size(); ++i)
        if (out.singular_values[i] >= tol * smax) ++r;
    out.rank = r;
    out.basis = svd.matrixU().leftCols(r);
    return out;
}

PolarInterior polar_interior(const std::vector<Eigen::VectorXd>& generators, double margin_req) {
    if (generators.empty()) throw std::invalid_argument("polar_interior: empty generator list");
    std::vector<int> kept = keep_nonzero(generators);
    const int n = static_cast<int>(generators.front().size());
    PolarInterior out;
    if (kept.empty()) {
        // only the zero vector: every covector is in the polar
        out.kind = PolarInterior::Kind::Nonempty;
        out.p = -Eigen::VectorXd::Ones(n);
        out.margin = 1.0;
        return out;
    }
    const int N = static_cast<int>(kept.size());

    // Solve the dual of [max delta : G p <= -delta w, |p|_inf <= 1, delta >= 0]
    // to keep the row count at n+1 regardless of N:
    //   max -sum(r_j + s_j)
    //   s.t. sum_i y_i g_ij + r_j - s_j = 0   (j = 1..n)
    //        -sum_i y_i w_i <= -1
    //        y, r, s >= 0
    // The primal witness is read off the duals: p = -y_eq, delta = y_ub.
    const int nv = N + 2 * n;
    LpProblem lp;
    lp.c = Eigen::VectorXd::Zero(nv);
    for (int j = 0; j < 2 * n; ++j) lp.c[N + j] = -1.0;
    lp.a_eq = Eigen::MatrixXd::Zero(n, nv);
    lp.b_eq = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < N; ++i) lp.a_eq.col(i) = generators[kept[i]];
    for (int j = 0; j < n; ++j) {
        lp.a_eq(j, N + j) = 1.0;       // r_j
        lp.a_eq(j, N + n + j) = -1.0;  // s_j
    }
    lp.a_ub = Eigen::MatrixXd::Zero(1, nv);
    for (int i = 0; i < N; ++i) lp.a_ub(0, i) = -generators[kept[i]].norm();
    lp.b_ub = Eigen::VectorXd::Constant(1, -1.0);
    lp.lo = Eigen::VectorXd::Zero(nv);
    lp.hi = Eigen::VectorXd::Constant(nv, std::numeric_limits<double>::infinity());

    LpResult r = lp_solve(lp);
    if (r.status == LpStatus::Infeasible) {
        // dual infeasible <=> primal unbounded; cannot happen since delta is
        // bounded by sqrt(n) — treat as empty interior
        out.kind = PolarInterior::Kind::Empty;
        return out;
    }
    double delta = r.status == LpStatus::Optimal ? r.y_ub[0] : 0.0;
    Eigen::VectorXd p = -r.y_eq;
    double pinf = p.lpNorm<Eigen::Infinity>();
    if (pinf > 1.0) p /= pinf;
    out.p = p;
    out.margin = delta;

    // re-verify the witness in plain arithmetic
    if (delta > std::max(margin_req, 1e-9)) {
        double worst = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < N; ++i) {
            const Eigen::VectorXd& g = generators[kept[i]];
            worst = std::max(worst, p.dot(g) + delta * g.norm());
        }
        if (worst <= 1e-7) {
            out.kind = PolarInterior::Kind::Nonempty;
            return out;
        }
    }
    out.kind = PolarInterior::Kind::Empty;
    return out;
}

ConeVerdict cone_full(const std::vector<Eigen::VectorXd>& generators, double delta_min) {
    if (generators.empty()) throw std::invalid_argument("cone_full: empty generator list");
    const int n = static_cast<int>(generators.front().size());
    ConeVerdict v;
    v.kept = keep_nonzero(generators);
    if (static_cast<int>(v.kept.size()) < static_cast<int>(generators.size()))
        v.note = "dropped " + std::to_string(generators.size() - v.kept.size()) +
                 " zero generator(s)";
    if (v.kept.empty()) {
        v.status = ConeStatus::NotFull;
        v.p = -Eigen::VectorXd::Ones(n);
        v.rank = 0;
        v.polar = polar_interior(generators, 0);
        return v;
    }

    std::vector<Eigen::VectorXd> g;
    g.reserve(v.kept.size());
    for (int idx : v.kept) g.push_back(generators[static_cast<std::size_t>(idx)]);
    const int N = static_cast<int>(g.size());

    SpanRankResult sr = span_rank(g, 1e-10);
    v.rank = sr.rank;
    if (sr.rank < n) {
        // an orthonormal complement direction annihilates every generator
        Eigen::MatrixXd m(n, N);
        for (int i = 0; i < N; ++i) m.col(i) = g[static_cast<std::size_t>(i)];
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU);
        Eigen::VectorXd p = svd.matrixU().col(n - 1);
        p /= p.lpNorm<Eigen::Infinity>();
        v.status = ConeStatus::NotFull;
        v.p = -p;
        v.note += (v.note.empty() ? "" : "; ");
        v.note += "rank deficient: span dimension " + std::to_string(sr.rank);
        v.polar = polar_interior(generators, 0);
        return v;
    }

    // max delta s.t. sum lambda_i g_i = 0, sum lambda_i = 1, lambda_i >= delta,
    // via mu_i = lambda_i - delta >= 0.
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    for (const auto& gi : g) s += gi;
    const int nv = N + 1;  // mu, delta
    LpProblem lp;
    lp.c = Eigen::VectorXd::Zero(nv);
    lp.c[N] = 1.0;
    lp.a_eq = Eigen::MatrixXd::Zero(n + 1, nv);
    lp.b_eq = Eigen::VectorXd::Zero(n + 1);
    for (int i = 0; i < N; ++i) {
        lp.a_eq.col(i).head(n) = g[static_cast<std::size_t>(i)];
        lp.a_eq(n, i) = 1.0;
    }
    lp.a_eq.col(N).head(n) = s;
    lp.a_eq(n, N) = static_cast<double>(N);
    lp.b_eq[n] = 1.0;
    lp.lo = Eigen::VectorXd::Zero(nv);
    lp.hi = Eigen::VectorXd::Constant(nv, std::numeric_limits<double>::infinity());

    LpResult r = lp_solve(lp);
    if (r.status == LpStatus::Optimal && r.x[N] > delta_min) {
        double delta = r.x[N];
        Eigen::VectorXd lambda = r.x.head(N).array() + delta;
        // direct witness re-check
        Eigen::VectorXd resid = Eigen::VectorXd::Zero(n);
        double lsum = 0;
        for (int i = 0; i < N; ++i) {
            resid += lambda[i] * g[static_cast<std::size_t>(i)];
            lsum += lambda[i];
        }
        if (resid.lpNorm<Eigen::Infinity>() <= 1e-8 && std::fabs(lsum - 1.0) <= 1e-8 &&
            lambda.minCoeff() >= delta - 1e-10) {
            v.status = ConeStatus::Full;
            v.lambda = lambda;
            v.margin = delta;
            return v;
        }
        v.note += (v.note.empty() ? "" : "; ");
        v.note += "LP witness failed re-verification";
    }

    // Not full with margin, or degenerate (half-space-like): decide via the
    // polar cone.
    if (r.status == LpStatus::Optimal) {
        // dual of the positive-combination LP provides a separating covector
        Eigen::VectorXd q = r.y_eq.head(n);
        if (q.lpNorm<Eigen::Infinity>() > kZeroGen) {
            Eigen::VectorXd p = -q / q.lpNorm<Eigen::Infinity>();
            v.p = p;
        }
        v.margin = std::max(0.0, r.x[N]);
    }
    v.polar = polar_interior(generators, 0);
    if (v.polar.kind == PolarInterior::Kind::Nonempty) {
        v.status = ConeStatus::NotFull;
        v.p = v.polar.p;
        if (v.p.lpNorm<Eigen::Infinity>() > 0) v.p /= v.p.lpNorm<Eigen::Infinity>();
    } else {
        v.status = ConeStatus::Degenerate;
        v.note += (v.note.empty() ? "" : "; ");
        v.note += "cone is neither full with margin nor robustly separated";
    }
    return v;
}

}  // namespace ccert
