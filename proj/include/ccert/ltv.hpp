#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "ccert/cones.hpp"
#include "ccert/flows.hpp"
#include "ccert/system.hpp"

namespace ccert {

// Constrained time-varying linear system  zdot = A(t) z + B(t) v,  v in V,
// on [t0, tf]. A and B may additionally be given symbolically in the time
// variable (index 0) so that d/dt is exact in the Silverman-Meadows test.
struct LtvSystem {
    int d = 0, m = 0;
    std::function<Eigen::MatrixXd(double)> A;
    std::function<Eigen::MatrixXd(double)> B;
    std::optional<ExprMatrix> a_sym, b_sym;
    ControlSet V = ControlSet::interval(-1, 1);
    double t0 = 0, tf = 1;

    static LtvSystem from_expressions(const ExprMatrix& a, const ExprMatrix& b,
                                      const ControlSet& v, double t0, double tf);
};

// Linearization of the affine system along a trajectory of the drift (or of
// drift + constant reference control): A(t) = dX0/dx (xbar(t)) (+ sum u_k
// dX^k/dx), B(t) columns = X^k(xbar(t)). The admissible variation set is the
// caller's business (shift V by the reference control where applicable).
LtvSystem linearize(const SystemDef& sys, const Trajectory& traj, const ControlSet& v,
                    double t0, double tf, const Eigen::VectorXd* u_ref = nullptr);

enum class LtvConeMode { AtStart, ProjectedAtEnd };

// Conic-hull criterion on {phi(t0,s) B(s) v} (or {P phi(tf,s) B(s) v}).
ConeVerdict cone_condition(const LtvSystem& sys, LtvConeMode mode, int steps,
                           const Eigen::MatrixXd* proj = nullptr);

// Rank of [B, (d/dt - A)B, ..., (d/dt - A)^depth B] at time t. Symbolic when
// expression matrices are available; otherwise central finite differences
// with step 1e-4.
int silverman_meadows(const LtvSystem& sys, double t, int depth);

// Support function of the convex reachable set at tf from z(t0) = 0; shares
// the transition transport over all directions.
class ReachOracle {
public:
    ReachOracle(const LtvSystem& sys, int steps);
    double support(const Eigen::VectorXd& p) const;
    int dim() const { return d_; }

private:
    int d_, m_;
    const ControlSet v_;
    std::vector<double> s_, simpson_w_;
    std::vector<Eigen::MatrixXd> bt_phit_;  // B(s)' phi(tf,s)'
};

double reach_support(const LtvSystem& sys, const Eigen::VectorXd& p, int steps);

// Brute-force counterpart of cone_condition: min over low-discrepancy unit
// directions of the reachable-set support exceeds eta.
bool zero_interior(const LtvSystem& sys, int directions, const Eigen::MatrixXd* proj = nullptr,
                   double eta = 1e-8, int steps = 129);

// min over the sampled directions (the decision value behind zero_interior)
double zero_interior_margin(const LtvSystem& sys, int directions,
                            const Eigen::MatrixXd* proj = nullptr, int steps = 129);

// Deterministic low-discrepancy unit directions in R^n.
std::vector<Eigen::VectorXd> sphere_directions(int n, int count);

}  // namespace ccert
