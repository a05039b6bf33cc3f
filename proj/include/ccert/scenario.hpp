#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "ccert/certify.hpp"

namespace ccert {

// Counter-based RNG: every (seed, stream, counter) triple maps to an
// independent deterministic value, so parallel sample order cannot change
// the output.
struct CounterRng {
    std::uint64_t seed;
    std::uint64_t stream;
    std::uint64_t counter = 0;
    double uniform();  // in [0,1)
};

struct McSettings {
    int samples = 0;
    double periods = 1.0;
    std::uint64_t seed = 1;
    int intervals_per_period = 16;
};

struct CheckRequest {
    std::string name;  // global | one_period | one_period_proj | local | local_proj |
                       // obstruction_orbital | obstruction_along | obstruction_along_proj |
                       // bonnard | span_consistency
    double tf = 0;
};

struct Scenario {
    std::string name;
    SystemDef sys;
    ControlSet u = ControlSet::interval(-1, 1);
    std::optional<ProjectionSpec> projection;
    std::vector<Eigen::VectorXd> points;
    std::vector<CheckRequest> checks;
    int bracket_depth = 3;
    McSettings mc;
    std::string output_dir = ".";
    bool timings = false;
    RefineOptions refine;
};

// Monte-Carlo reachable cloud: endpoints of the controlled system under
// piecewise-constant admissible controls (random convex combinations of the
// generators of U, hence exactly admissible).
struct ReachCloud {
    Eigen::VectorXd start;                       // full state
    std::vector<Eigen::VectorXd> endpoints;      // projected when requested
    std::vector<Eigen::VectorXd> full_endpoints; // full state
    std::vector<Eigen::MatrixXd> controls;       // per sample: intervals x m
    double horizon = 0;
    double dt = 0;
    int skipped = 0;
    // start strictly inside conv(endpoints)? via the positive-combination LP
    enum class Hull { Inside, Outside, Boundary } hull = Hull::Boundary;
    double hull_margin = 0;

    std::string to_csv() const;
};

ReachCloud mc_reach(const SystemDef& sys, const ControlSet& u, const Eigen::VectorXd& x0,
                    double horizon, int samples, std::uint64_t seed, int intervals_per_period = 16,
                    const std::optional<ProjectionSpec>& proj = {}, double tol = 1e-10);

// Integrate the affine system under a piecewise-constant control schedule
// given as (duration, control value) pairs.
Eigen::VectorXd integrate_piecewise(const SystemDef& sys, const Eigen::VectorXd& x0,
                                    const std::vector<std::pair<double, Eigen::VectorXd>>& schedule,
                                    double tol = 1e-10);

std::vector<std::string> builtin_names();
Scenario make_builtin(const std::string& name, const nlohmann::json& params);
Scenario scenario_from_json(const nlohmann::json& config);
ControlSet control_set_from_json(const nlohmann::json& spec);

// Runs the requested checks (and MC validation when configured), writes
// certificates.json and cloud CSVs under the output directory, and prints a
// summary. Returns a process exit status.
int run_scenario(const Scenario& s, std::ostream& out);

// -- Closed-loop reproduction of the scalar-control example ----------------

// Piecewise-constant control schedule whose (I1,I2) curve closes after
// 10pi/3 with zero net swept area. The breakpoints are derived from the two
// closure identities; with them both hold exactly and the plateau ratios
// eps3/eps2 and eps1/eps2 come out in closed form.
struct GoldfishSchedule {
    double eps1, eps2, eps3;
    // (t_start, t_end, level)
    std::vector<std::array<double, 3>> segments;
};

GoldfishSchedule goldfish_schedule(double eps2);

struct GoldfishReport {
    double eps;
    double eps1, eps2, eps3;
    double closure_closed_form = 0;  // |(I1,I2,I3)(10pi/3) - (I1,I2,I3)(0)| exact path
    double closure_numeric = 0;      // same via ODE integration
    double max_checkpoint_gap = 0;   // exact vs numeric state gap over 16 checkpoints
    struct AuxLoop {
        double level;
        double i3_gain;  // one-period closed loop: must be >= 0
    };
    std::vector<AuxLoop> aux_loops;
    nlohmann::json to_json() const;
};

// Evaluates the closed-form solution by exact piecewise integration and by
// numerical integration, and reports closure and area-property evidence.
// Requires 0 < eps2 < eps <= 1 (plateau ordering 0 < eps1 < eps3 < eps2 < eps).
GoldfishReport goldfish(double eps2, double eps);

// Exact state of the closed-form solution at time t under a piecewise
// schedule, starting from (i1,i2,i3,phi0).
Eigen::Vector4d goldfish_exact_state(const GoldfishSchedule& s, double t, double i1, double i2,
                                     double i3, double phi0);

struct AreaTestStats {
    int trials = 0;
    int closed = 0;
    int violations = 0;
    double min_gain = 0;       // most negative I3 gain over closed trials
    double max_residual = 0;   // worst closure residual among accepted trials
};

// Random nonnegative piecewise-constant controls on [0,2pi], projected onto
// the closure constraint; checks the one-period area property I3(2pi) >= I3(0).
AreaTestStats area_property_test(int trials, std::uint64_t seed);

}  // namespace ccert
