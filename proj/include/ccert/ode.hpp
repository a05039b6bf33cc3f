#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

namespace ccert {

struct IntegrationError : std::runtime_error {
    IntegrationError(const std::string& msg, double t)
        : std::runtime_error(msg + " at t = " + std::to_string(t)), time(t) {}
    double time;
};

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    double h_init = 0;  // 0: choose automatically
    long max_steps = 4000000;
};

using OdeRhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Dense ODE solution from an embedded Dormand-Prince 5(4) integrator.
// Works forward or backward in time ([0,t] read as [t,0] for t < 0).
class Trajectory {
public:
    struct Step {
        double t, h;
        Eigen::VectorXd c1, c2, c3, c4, c5;  // quartic interpolant coefficients
    };

    double t_begin() const { return t_begin_; }
    double t_end() const { return t_end_; }
    int dim() const { return static_cast<int>(y_end_.size()); }
    bool forward() const { return t_end_ >= t_begin_; }

    Eigen::VectorXd at(double t) const;
    const Eigen::VectorXd& start() const { return y_begin_; }
    const Eigen::VectorXd& end() const { return y_end_; }
    const std::vector<Step>& steps() const { return steps_; }

    // spans [min,max] regardless of direction, with slack for roundoff
    bool covers(double t) const;

private:
    friend Trajectory integrate(const OdeRhs&, Eigen::VectorXd, double, double,
                                const OdeOptions&);
    std::vector<Step> steps_;
    double t_begin_ = 0, t_end_ = 0;
    Eigen::VectorXd y_begin_, y_end_;
};

Trajectory integrate(const OdeRhs& f, Eigen::VectorXd y0, double t0, double t1,
                     const OdeOptions& opt = {});

}  // namespace ccert
