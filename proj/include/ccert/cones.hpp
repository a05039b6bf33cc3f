#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ccert/lp.hpp"

namespace ccert {

enum class ConeStatus { Full, NotFull, Degenerate };

struct PolarInterior {
    enum class Kind { Nonempty, Empty, Unknown };
    Kind kind = Kind::Unknown;
    Eigen::VectorXd p;   // ||p||_inf <= 1, <p, g_i> <= -margin ||g_i|| when Nonempty
    double margin = 0;   // best delta of the polar LP
};

// Verdict of the conic-hull tests on a finite generator list.
//   Full      : positive-combination witness lambda (per kept generator),
//               sum lambda = 1, lambda_i >= margin > 0, rank = n.
//   NotFull   : covector p with max_i <p, g_i> <= 0, ||p||_inf = 1, and the
//               polar cone has interior (robustly separated).
//   Degenerate: neither test fires with margin (e.g. a closed half-space).
struct ConeVerdict {
    ConeStatus status = ConeStatus::Degenerate;
    Eigen::VectorXd lambda;
    Eigen::VectorXd p;
    double margin = 0;
    PolarInterior polar;
    std::vector<int> kept;  // indices of generators that survived zero filtering
    int rank = 0;
    std::string note;
};

struct SpanRankResult {
    int rank = 0;
    Eigen::MatrixXd basis;  // n x rank, orthonormal
    Eigen::VectorXd singular_values;
};

// cone(G) == R^n test via one positive-combination LP plus a rank check.
// Generators of norm < 1e-12 are dropped (noted); delta_min separates Full
// from Degenerate.
ConeVerdict cone_full(const std::vector<Eigen::VectorXd>& generators,
                      double delta_min = 1e-9);

// max delta s.t. <p, g_i> <= -delta ||g_i||, ||p||_inf <= 1; Nonempty iff the
// optimum exceeds margin_req (a rigor margin covering grid discretization).
PolarInterior polar_interior(const std::vector<Eigen::VectorXd>& generators,
                             double margin_req = 0);

SpanRankResult span_rank(const std::vector<Eigen::VectorXd>& generators,
                         double tol = 1e-8);

}  // namespace ccert
