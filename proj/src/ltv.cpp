#include "ccert/ltv.hpp"

#include <cmath>
#include <memory>

namespace ccert {

namespace {

Eigen::MatrixXd unvec(const Eigen::VectorXd& v, int r, int c) {
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), r, c);
}

Eigen::VectorXd vec(const Eigen::MatrixXd& m) {
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

ExprMatrix mat_mul(const ExprMatrix& a, const ExprMatrix& b) {
    std::size_t r = a.size(), inner = b.size(), c = b.empty() ? 0 : b[0].size();
    ExprMatrix out(r, std::vector<Expr>(c, Expr::constant(0.0)));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            Expr acc = Expr::constant(0.0);
            for (std::size_t k = 0; k < inner; ++k) acc = acc + a[i][k] * b[k][j];
            out[i][j] = acc;
        }
    return out;
}

ExprMatrix mat_sub(const ExprMatrix& a, const ExprMatrix& b) {
    ExprMatrix out = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) out[i][j] = a[i][j] - b[i][j];
    return out;
}

// phi(tf, s) for all s via one forward transition and one backward transport:
// phi(tf,s) = phi(tf,t0) * phi(t0,s).
struct Transport {
    int d;
    Eigen::MatrixXd phi_tf_t0;
    Trajectory psi;  // vec(phi(t0,s)) over s in [t0,tf]
    bool trivial = false;

    Transport(const LtvSystem& sys, double tol = 1e-10) : d(sys.d) {
        if (sys.t0 == sys.tf) {
            trivial = true;
            phi_tf_t0 = Eigen::MatrixXd::Identity(d, d);
            return;
        }
        OdeOptions opt;
        opt.rtol = tol;
        opt.atol = tol;
        auto rhs_fwd = [&](double s, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
            dy = vec(sys.A(s) * unvec(y, d, d));
        };
        Trajectory fwd = integrate(rhs_fwd, vec(Eigen::MatrixXd::Identity(d, d)), sys.t0, sys.tf, opt);
        phi_tf_t0 = unvec(fwd.end(), d, d);
        auto rhs_bwd = [&](double s, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
            dy = vec(-unvec(y, d, d) * sys.A(s));
        };
        psi = integrate(rhs_bwd, vec(Eigen::MatrixXd::Identity(d, d)), sys.t0, sys.tf, opt);
    }

    Eigen::MatrixXd phi_t0_s(double s) const {
        if (trivial) return Eigen::MatrixXd::Identity(d, d);
        return unvec(psi.at(s), d, d);
    }
    Eigen::MatrixXd phi_tf_s(double s) const { return phi_tf_t0 * phi_t0_s(s); }
};

}  // namespace

LtvSystem LtvSystem::from_expressions(const ExprMatrix& a, const ExprMatrix& b,
                                      const ControlSet& v, double t0, double tf) {
    LtvSystem s;
    s.d = static_cast<int>(a.size());
    s.m = b.empty() ? 0 : static_cast<int>(b[0].size());
    if (b.size() != a.size()) throw std::invalid_argument("A and B must have matching row counts");
    s.a_sym = a;
    s.b_sym = b;
    s.A = [a](double t) {
        Eigen::VectorXd x(1);
        x << t;
        return eval_matrix(a, x);
    };
    s.B = [b](double t) {
        Eigen::VectorXd x(1);
        x << t;
        return eval_matrix(b, x);
    };
    s.V = v;
    s.t0 = t0;
    s.tf = tf;
    return s;
}

LtvSystem linearize(const SystemDef& sys, const Trajectory& traj, const ControlSet& v, double t0,
                    double tf, const Eigen::VectorXd* u_ref) {
    LtvSystem out;
    out.d = sys.d();
    out.m = sys.m();
    out.V = v;
    out.t0 = t0;
    out.tf = tf;

    // combined Jacobian field with the constant reference control folded in
    Eigen::VectorXd u = u_ref ? *u_ref : Eigen::VectorXd::Zero(sys.m());
    VectorField combined = sys.drift;
    for (int k = 0; k < sys.m(); ++k) {
        if (u[k] == 0.0) continue;
        std::vector<Expr> comps;
        for (int i = 0; i < sys.d(); ++i)
            comps.push_back(combined.components[static_cast<std::size_t>(i)] +
                            Expr::constant(u[k]) *
                                sys.controls[static_cast<std::size_t>(k)]
                                    .components[static_cast<std::size_t>(i)]);
        combined = VectorField(combined.coords, std::move(comps));
    }
    auto jac = std::make_shared<ExprMatrix>(jacobian(combined));
    auto controls = std::make_shared<std::vector<VectorField>>(sys.controls);
    auto base = std::make_shared<Trajectory>(traj);
    out.A = [jac, base](double t) { return eval_matrix(*jac, base->at(t)); };
    out.B = [controls, base](double t) {
        Eigen::VectorXd x = base->at(t);
        Eigen::MatrixXd b(x.size(), static_cast<Eigen::Index>(controls->size()));
        for (std::size_t k = 0; k < controls->size(); ++k)
            b.col(static_cast<Eigen::Index>(k)) = (*controls)[k].eval(x);
        return b;
    };
    return out;
}

ConeVerdict cone_condition(const LtvSystem& sys, LtvConeMode mode, int steps,
                           const Eigen::MatrixXd* proj) {
    if (steps < 2) throw std::invalid_argument("cone_condition: steps must be >= 2");
    Transport tr(sys);
    auto gens = sys.V.generators();
    std::vector<Eigen::VectorXd> cone_gens;
    cone_gens.reserve(static_cast<std::size_t>(steps) * gens.size());
    for (int j = 0; j < steps; ++j) {
        double s = sys.t0 + (sys.tf - sys.t0) * j / (steps - 1);
        Eigen::MatrixXd w;
        if (mode == LtvConeMode::AtStart) {
            w = tr.phi_t0_s(s) * sys.B(s);
        } else {
            w = tr.phi_tf_s(s) * sys.B(s);
            if (proj) w = (*proj) * w;
        }
        for (const auto& g : gens) cone_gens.push_back(w * g);
    }
    return cone_full(cone_gens);
}

int silverman_meadows(const LtvSystem& sys, double t, int depth) {
    std::vector<Eigen::MatrixXd> stacked;
    if (sys.a_sym && sys.b_sym) {
        ExprMatrix mk = *sys.b_sym;
        Eigen::VectorXd x(1);
        x << t;
        stacked.push_back(eval_matrix(mk, x));
        for (int k = 0; k < depth; ++k) {
            mk = mat_sub(diff_matrix(mk, 0), mat_mul(*sys.a_sym, mk));
            stacked.push_back(eval_matrix(mk, x));
        }
    } else {
        // nested central differences, step 1e-4 (documented trade-off between
        // truncation and roundoff for depth <= 3); the stencil spreads over
        // t +- depth*h, so the query point is nudged inside [t0, tf]
        const double h = 1e-4;
        double lo = std::min(sys.t0, sys.tf) + depth * h;
        double hi = std::max(sys.t0, sys.tf) - depth * h;
        double tq = std::clamp(t, lo, hi);
        std::function<Eigen::MatrixXd(int, double)> mk = [&](int k, double s) -> Eigen::MatrixXd {
            if (k == 0) return sys.B(s);
            Eigen::MatrixXd dm = (mk(k - 1, s + h) - mk(k - 1, s - h)) / (2 * h);
            return dm - sys.A(s) * mk(k - 1, s);
        };
        for (int k = 0; k <= depth; ++k) stacked.push_back(mk(k, tq));
    }
    std::vector<Eigen::VectorXd> cols;
    for (const auto& m : stacked)
        for (int j = 0; j < m.cols(); ++j) cols.push_back(m.col(j));
    return span_rank(cols).rank;
}

ReachOracle::ReachOracle(const LtvSystem& sys, int steps) : d_(sys.d), m_(sys.m), v_(sys.V) {
    if (steps < 3) steps = 3;
    if (steps % 2 == 0) ++steps;  // composite Simpson needs an odd point count
    Transport tr(sys);
    s_.resize(static_cast<std::size_t>(steps));
    simpson_w_.resize(static_cast<std::size_t>(steps));
    bt_phit_.reserve(static_cast<std::size_t>(steps));
    double h = (sys.tf - sys.t0) / (steps - 1);
    for (int j = 0; j < steps; ++j) {
        double s = sys.t0 + h * j;
        s_[static_cast<std::size_t>(j)] = s;
        double w = (j == 0 || j == steps - 1) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        simpson_w_[static_cast<std::size_t>(j)] = w * h / 3.0;
        bt_phit_.push_back(sys.B(s).transpose() * tr.phi_tf_s(s).transpose());
    }
}

double ReachOracle::support(const Eigen::VectorXd& p) const {
    double acc = 0;
    for (std::size_t j = 0; j < s_.size(); ++j)
        acc += simpson_w_[j] * v_.support(bt_phit_[j] * p);
    return acc;
}

double reach_support(const LtvSystem& sys, const Eigen::VectorXd& p, int steps) {
    return ReachOracle(sys, steps).support(p);
}

namespace {

double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}

}  // namespace

std::vector<Eigen::VectorXd> sphere_directions(int n, int count) {
    std::vector<Eigen::VectorXd> out;
    if (n == 1) {
        out.push_back(Eigen::VectorXd::Constant(1, 1.0));
        out.push_back(Eigen::VectorXd::Constant(1, -1.0));
        return out;
    }
    if (n == 2) {
        for (int i = 0; i < count; ++i) {
            double a = 2 * 3.14159265358979323846 * i / count;
            Eigen::VectorXd v(2);
            v << std::cos(a), std::sin(a);
            out.push_back(std::move(v));
        }
        return out;
    }
    // Halton points mapped to Gaussians (Box-Muller pairs), then normalized.
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
    int pairs = (n + 1) / 2;
    for (int i = 0; i < count; ++i) {
        Eigen::VectorXd v(n);
        for (int q = 0; q < pairs; ++q) {
            double u1 = halton(i + 1, primes[2 * q]);
            double u2 = halton(i + 1, primes[2 * q + 1]);
            u1 = std::max(u1, 1e-12);
            double r = std::sqrt(-2.0 * std::log(u1));
            double z0 = r * std::cos(2 * 3.14159265358979323846 * u2);
            double z1 = r * std::sin(2 * 3.14159265358979323846 * u2);
            v[2 * q] = z0;
            if (2 * q + 1 < n) v[2 * q + 1] = z1;
        }
        double nv = v.norm();
        if (nv < 1e-9) continue;
        out.push_back(v / nv);
    }
    return out;
}

double zero_interior_margin(const LtvSystem& sys, int directions, const Eigen::MatrixXd* proj,
                            int steps) {
    ReachOracle oracle(sys, steps);
    int n = proj ? static_cast<int>(proj->rows()) : sys.d;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& p : sphere_directions(n, directions)) {
        Eigen::VectorXd q = proj ? Eigen::VectorXd(proj->transpose() * p) : p;
        worst = std::min(worst, oracle.support(q));
    }
    return worst;
}

bool zero_interior(const LtvSystem& sys, int directions, const Eigen::MatrixXd* proj, double eta,
                   int steps) {
    return zero_interior_margin(sys, directions, proj, steps) > eta;
}

}  // namespace ccert
