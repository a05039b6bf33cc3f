#include "ccert/flows.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ccert {

namespace {

// drift + constant reference control as a compiled right-hand side
struct CombinedField {
    CompiledField drift;
    std::vector<CompiledField> controls;
    Eigen::VectorXd u;
    mutable Eigen::VectorXd tmp;

    CombinedField(const SystemDef& sys, const Eigen::VectorXd* u_const)
        : drift(sys.drift), u(u_const ? *u_const : Eigen::VectorXd::Zero(sys.m())) {
        if (u_const && u_const->size() != sys.m())
            throw std::invalid_argument("reference control dimension mismatch");
        for (int k = 0; k < sys.m(); ++k)
            if (u[k] != 0.0) controls.emplace_back(sys.controls[static_cast<std::size_t>(k)]);
            else controls.emplace_back();
    }

    void operator()(double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) const {
        drift.eval(x, dx);
        for (int k = 0; k < static_cast<int>(controls.size()); ++k) {
            if (u[k] == 0.0) continue;
            controls[static_cast<std::size_t>(k)].eval(x, tmp);
            dx += u[k] * tmp;
        }
    }
};

// compiled Jacobian of drift + sum u_k X^k
struct CompiledJacobian {
    int d;
    std::vector<ExprProgram> entries;
    mutable std::vector<double> stack;

    CompiledJacobian(const SystemDef& sys, const Eigen::VectorXd* u_const) : d(sys.d()) {
        Eigen::VectorXd u = u_const ? *u_const : Eigen::VectorXd::Zero(sys.m());
        VectorField combined = sys.drift;
        for (int k = 0; k < sys.m(); ++k) {
            if (u[k] == 0.0) continue;
            std::vector<Expr> comps;
            comps.reserve(combined.components.size());
            for (int i = 0; i < sys.d(); ++i)
                comps.push_back(combined.components[static_cast<std::size_t>(i)] +
                                Expr::constant(u[k]) *
                                    sys.controls[static_cast<std::size_t>(k)]
                                        .components[static_cast<std::size_t>(i)]);
            combined = VectorField(combined.coords, std::move(comps));
        }
        ExprMatrix jac = jacobian(combined);
        entries.reserve(static_cast<std::size_t>(d) * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) entries.emplace_back(jac[i][j]);
    }

    void eval(const Eigen::VectorXd& x, Eigen::MatrixXd& a) const {
        std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
        a.resize(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                a(i, j) = entries[static_cast<std::size_t>(i * d + j)].eval(xs, stack);
    }
};

Eigen::MatrixXd unvec(const Eigen::VectorXd& v, int d) {
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), d, d);
}

Eigen::VectorXd vec(const Eigen::MatrixXd& m) {
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

}  // namespace

Trajectory flow(const SystemDef& sys, const Eigen::VectorXd& x0, double t, double tol,
                const Eigen::VectorXd* u_const) {
    if (x0.size() != sys.d()) throw std::invalid_argument("flow: state dimension mismatch");
    CombinedField f(sys, u_const);
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol;
    return integrate([&f](double s, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { f(s, y, dy); },
                     x0, 0.0, t, opt);
}

TransitionMatrix transition(const SystemDef& sys, const Trajectory& traj, double t1, double t2,
                            double tol, const Eigen::VectorXd* u_const) {
    if (!traj.covers(t1) || !traj.covers(t2))
        throw std::invalid_argument("transition: [t1,t2] outside the trajectory span");
    const int d = sys.d();
    TransitionMatrix out;
    out.t_from = t1;
    out.t_to = t2;
    if (t1 == t2) {
        out.mat = Eigen::MatrixXd::Identity(d, d);
        return out;
    }
    CompiledJacobian jac(sys, u_const);
    Eigen::MatrixXd a(d, d);
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol;
    auto rhs = [&](double s, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        jac.eval(traj.at(s), a);
        dy = vec(a * unvec(y, d));
    };
    Trajectory sol = integrate(rhs, vec(Eigen::MatrixXd::Identity(d, d)), t1, t2, opt);
    out.mat = unvec(sol.end(), d);
    return out;
}

TransportGrid::TransportGrid(const SystemDef& sys, const Eigen::VectorXd& x, double t1, double t2,
                             double tol)
    : d_(sys.d()), t1_(t1), t2_(t2) {
    if (t1 > t2) std::swap(t1, t2);
    CompiledJacobian jac(sys, nullptr);
    Eigen::MatrixXd a(d_, d_);
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol;
    auto make_psi = [&](const Trajectory& base, double tend) {
        // d Psi / d tau = -Psi A(tau), Psi(0) = I  =>  Psi(tau) = phi(0,tau)
        auto rhs = [&](double s, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
            jac.eval(base.at(s), a);
            dy = vec(-unvec(y, d_) * a);
        };
        return integrate(rhs, vec(Eigen::MatrixXd::Identity(d_, d_)), 0.0, tend, opt);
    };
    if (t2 > 0) {
        base_fwd_ = flow(sys, x, t2, tol);
        psi_fwd_ = make_psi(*base_fwd_, t2);
    }
    if (t1 < 0) {
        base_bwd_ = flow(sys, x, t1, tol);
        psi_bwd_ = make_psi(*base_bwd_, t1);
    }
    if (t1 == 0 && t2 == 0) {
        base_fwd_ = flow(sys, x, 0.0, tol);
    }
}

Eigen::VectorXd TransportGrid::state_at(double tau) const {
    if (tau >= 0 && base_fwd_) return base_fwd_->at(tau);
    if (tau <= 0 && base_bwd_) return base_bwd_->at(tau);
    if (base_fwd_) return base_fwd_->at(tau);
    return base_bwd_->at(tau);
}

Eigen::MatrixXd TransportGrid::psi_at(double tau) const {
    if (tau == 0 || (!psi_fwd_ && !psi_bwd_)) return Eigen::MatrixXd::Identity(d_, d_);
    if (tau > 0 && psi_fwd_) return unvec(psi_fwd_->at(tau), d_);
    if (tau < 0 && psi_bwd_) return unvec(psi_bwd_->at(tau), d_);
    return Eigen::MatrixXd::Identity(d_, d_);
}

std::vector<Eigen::VectorXd> TangentSample::vectors() const {
    std::vector<Eigen::VectorXd> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.v);
    return out;
}

std::string TangentSample::to_csv() const {
    std::ostringstream os;
    os << "tau,generator";
    int dim = entries.empty() ? 0 : static_cast<int>(entries.front().v.size());
    for (int i = 0; i < dim; ++i) os << ",v" << i;
    os << "\n";
    char buf[40];
    for (const auto& e : entries) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.tau);
        os << buf << "," << e.generator;
        for (int i = 0; i < e.v.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", e.v[i]);
            os << "," << buf;
        }
        os << "\n";
    }
    return os.str();
}

TangentSample sample_E(const SystemDef& sys, const ControlSet& u, const Eigen::VectorXd& x,
                       double t1, double t2, int steps, const std::optional<ProjectionSpec>& proj,
                       bool project_through_tf, double tf, double tol) {
    if (steps < 2 && t1 != t2) throw std::invalid_argument("sample_E: steps must be >= 2");
    if (u.dim() != sys.m()) throw std::invalid_argument("sample_E: control set dimension mismatch");
    const int d = sys.d();

    TangentSample out;
    out.base = x;
    out.t1 = t1;
    out.t2 = t2;
    out.steps = (t1 == t2) ? 1 : steps;
    out.generators = u.generators();
    out.through_tf = project_through_tf;
    out.tf = tf;

    TransportGrid grid(sys, x, std::min(t1, t2), std::max({t2, t1, project_through_tf ? tf : t2}),
                       tol);

    Eigen::MatrixXd head;  // applied after transport
    bool use_head = false;
    if (project_through_tf) {
        // (pi o exp(tf X0))'(x) = P phi(tf, 0)
        Trajectory base = flow(sys, x, tf, tol);
        Eigen::MatrixXd m = transition(sys, base, 0.0, tf, tol).mat;
        head = proj ? proj->matrix(d) * m : m;
        use_head = true;
        out.projected = proj ? std::optional<std::vector<int>>(proj->kept) : std::nullopt;
    } else if (proj) {
        head = proj->matrix(d);
        use_head = true;
        out.projected = proj->kept;
    }

    std::vector<CompiledField> fields;
    fields.reserve(sys.controls.size());
    for (const auto& c : sys.controls) fields.emplace_back(c);

    Eigen::VectorXd fx(d);
    for (int j = 0; j < out.steps; ++j) {
        double tau = (out.steps == 1) ? t1 : t1 + (t2 - t1) * j / (steps - 1);
        Eigen::VectorXd xbar = grid.state_at(tau);
        Eigen::MatrixXd psi = grid.psi_at(tau);
        Eigen::MatrixXd b(d, sys.m());
        for (int k = 0; k < sys.m(); ++k) {
            fields[static_cast<std::size_t>(k)].eval(xbar, fx);
            b.col(k) = fx;
        }
        Eigen::MatrixXd transported = psi * b;
        if (use_head) transported = head * transported;
        for (std::size_t gi = 0; gi < out.generators.size(); ++gi) {
            TangentSample::Entry e;
            e.tau = tau;
            e.generator = static_cast<int>(gi);
            e.v = transported * out.generators[gi];
            out.entries.push_back(std::move(e));
        }
    }
    return out;
}

Eigen::VectorXd pushforward(const SystemDef& sys, const Eigen::VectorXd& x, double tau, int k,
                            double tol) {
    if (k < 0 || k >= sys.m()) throw std::invalid_argument("pushforward: control index out of range");
    TransportGrid grid(sys, x, std::min(0.0, tau), std::max(0.0, tau), tol);
    Eigen::VectorXd xbar = grid.state_at(tau);
    return grid.psi_at(tau) * sys.controls[static_cast<std::size_t>(k)].eval(xbar);
}

double period(const SystemDef& sys, const Eigen::VectorXd& x) {
    if (sys.product_form) {
        if (!sys.omega) throw std::invalid_argument("period: product form without omega");
        std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
        double w = sys.omega->eval(xs);
        if (std::fabs(w) < 1e-12)
            throw std::domain_error("period: omega vanishes at the query point (equilibrium)");
        return 2.0 * 3.14159265358979323846 / std::fabs(w);
    }
    if (sys.declared_period) {
        if (!(*sys.declared_period > 0))
            throw std::domain_error("period: declared period must be positive");
        return *sys.declared_period;
    }
    throw std::domain_error("period: non-product system without a declared period");
}

}  // namespace ccert
