#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ccert/cones.hpp"
#include "ccert/flows.hpp"
#include "ccert/ltv.hpp"
#include "ccert/system.hpp"

namespace ccert {

enum class TheoremTag {
    Thm21Global,
    Thm23LocalI,
    Thm23LocalII,
    Thm26OnePeriodI,
    Thm26OnePeriodII,
    Obstruction25I,
    Obstruction25II,
    Obstruction26Orbital,
    Bonnard18,
};

enum class CertStatus { SufficientMet, Obstructed, Inconclusive, AssumptionFailed };

std::string to_string(TheoremTag t);
std::string to_string(CertStatus s);

// One refinement stage of the dyadic tau-grid loop.
struct GridTrace {
    int steps = 0;
    ConeStatus cone_status = ConeStatus::Degenerate;
    double margin = 0;        // cone delta (sufficiency) or polar delta (obstruction)
    double rigor_req = 0;     // required margin at this grid (obstructions)
    bool candidate = false;   // verdict this stage votes for
};

// Structured verdict for one theorem test at one point/orbit, with enough
// evidence to re-check the claim by direct arithmetic.
struct Certificate {
    std::string scenario;
    TheoremTag theorem = TheoremTag::Thm26OnePeriodII;
    CertStatus status = CertStatus::Inconclusive;
    Eigen::VectorXd point;
    double tf = 0;

    ConeVerdict cone;           // sufficiency evidence
    PolarInterior polar;        // obstruction evidence
    double lipschitz = 0;       // estimated bound on tau -> transported directions
    double rigor_required = 0;  // margin demanded of the polar certificate
    double independence_min_sigma = 0;
    std::vector<GridTrace> grids;
    int final_steps = 0;
    std::vector<std::string> notes;
    std::vector<Diagnostic> assumption_failures;
    std::optional<double> timing_seconds;  // filled only when timing is enabled

    nlohmann::json to_json() const;
};

enum class SufficientMode {
    GlobalOrbitwise,       // cone breve-E = tangent space, quantified per point
    LocalFixedTime,        // cone Ebar full at xbar(0)
    LocalFixedTimeProj,    // projected through phi(tf, 0)
    OnePeriod,             // full-state cone over one period
    OnePeriodProj,         // projected cone over one period
};

enum class ObstructionMode { AlongTrajectory, Orbital };

struct RefineOptions {
    int initial_steps = 33;
    int max_steps = 1025;
    double tol = 1e-10;
    double delta_min = 1e-9;
};

Certificate check_sufficient(const SystemDef& sys, const ControlSet& u, const Eigen::VectorXd& x,
                             SufficientMode mode, double tf = 0,
                             std::optional<ProjectionSpec> proj = {},
                             const RefineOptions& opt = {});

Certificate check_obstruction(const SystemDef& sys, const ControlSet& u, const Eigen::VectorXd& x,
                              ObstructionMode mode, double tf = 0,
                              std::optional<ProjectionSpec> proj = {},
                              const RefineOptions& opt = {});

enum class BracketFamily { F0, Larc };

struct BracketFamilyReport {
    BracketFamily family = BracketFamily::F0;
    int depth = 0;
    int rank = 0;
    std::vector<std::string> basis_labels;  // greedy independent subset
    std::vector<std::string> labels;        // every family member tried
};

// F0 = { ad_{X0}^j X^k, j <= depth } evaluated at x; Larc = all right-nested
// bracket words over {X0..Xm} up to the given word length (deduplicated).
BracketFamilyReport bracket_family(const SystemDef& sys, BracketFamily family, int depth,
                                   const Eigen::VectorXd& x);

struct SpanConsistencyReport {
    int rank_sampled = 0;
    int rank_f0 = 0;
    bool agree = false;
    std::vector<std::string> f0_basis;
    std::string note;
};

// Self-test of span E^U_{[t1,t2]}(x) = span F0(x) for analytic fields;
// disagreement flags a defect, not a theorem refutation.
SpanConsistencyReport span_consistency(const SystemDef& sys, const ControlSet& u,
                                       const Eigen::VectorXd& x, double t1, double t2, int depth,
                                       int steps = 129);

// Classical global-controllability test: Poisson-stable drift (asserted),
// bracket-generating family, 0 interior to conv U.
Certificate bonnard_check(const SystemDef& sys, const ControlSet& u, int depth,
                          const std::vector<Eigen::VectorXd>& points);

}  // namespace ccert
