#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ccert/ode.hpp"
#include "ccert/system.hpp"

namespace ccert {

// phi(t_to, t_from) of the linearized dynamics along a reference trajectory.
struct TransitionMatrix {
    double t_from = 0, t_to = 0;
    Eigen::MatrixXd mat;
};

// Flow of xdot = X0(x) (+ sum u_k X^k(x) when a constant reference control is
// supplied) from x0 over [0,t]; t < 0 integrates backward.
Trajectory flow(const SystemDef& sys, const Eigen::VectorXd& x0, double t, double tol = 1e-10,
                const Eigen::VectorXd* u_const = nullptr);

// Transition matrix of A(t) = d(X0 + sum u X)(xbar(t)); [t1,t2] must lie in
// the trajectory span.
TransitionMatrix transition(const SystemDef& sys, const Trajectory& traj, double t1, double t2,
                            double tol = 1e-10, const Eigen::VectorXd* u_const = nullptr);

// (exp(-tau X0)_* X^k)(x): evaluate X^k at the flowed point and transport the
// vector back to x with phi(0,tau).
Eigen::VectorXd pushforward(const SystemDef& sys, const Eigen::VectorXd& x, double tau, int k,
                            double tol = 1e-10);

// Backward transports Psi(tau) = phi(0,tau) along the drift trajectory from x,
// shared by every tau on a grid (one matrix ODE per base trajectory).
class TransportGrid {
public:
    TransportGrid(const SystemDef& sys, const Eigen::VectorXd& x, double t1, double t2,
                  double tol = 1e-10);

    Eigen::VectorXd state_at(double tau) const;
    Eigen::MatrixXd psi_at(double tau) const;

    double t1() const { return t1_; }
    double t2() const { return t2_; }

private:
    int d_;
    double t1_, t2_;
    std::optional<Trajectory> base_fwd_, base_bwd_;
    std::optional<Trajectory> psi_fwd_, psi_bwd_;
};

// Finite sample of E^U_{[t1,t2]}(x): transported control directions applied to
// each generator of U over a uniform tau grid. Optionally projected by a
// coordinate truncation, either at the base point or through phi(tf,0) (the
// composed map of the prescribed-time projected test).
struct TangentSample {
    struct Entry {
        double tau;
        int generator;
        Eigen::VectorXd v;
    };
    Eigen::VectorXd base;
    std::vector<Entry> entries;
    std::vector<Eigen::VectorXd> generators;
    double t1 = 0, t2 = 0;
    int steps = 0;
    std::optional<std::vector<int>> projected;
    bool through_tf = false;
    double tf = 0;

    std::vector<Eigen::VectorXd> vectors() const;
    std::string to_csv() const;
};

TangentSample sample_E(const SystemDef& sys, const ControlSet& u, const Eigen::VectorXd& x,
                       double t1, double t2, int steps,
                       const std::optional<ProjectionSpec>& proj = {},
                       bool project_through_tf = false, double tf = 0, double tol = 1e-10);

// Minimal period of the drift orbit through x. Product form: 2*pi/omega(I);
// otherwise requires a declared period.
double period(const SystemDef& sys, const Eigen::VectorXd& x);

}  // namespace ccert
