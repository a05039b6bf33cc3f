#include "ccert/ode.hpp"

#include <algorithm>
#include <cmath>

namespace ccert {

namespace {

// Dormand-Prince 5(4) tableau and the order-4 dense-output weights.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

}  // namespace

Eigen::VectorXd Trajectory::at(double t) const {
    if (steps_.empty()) {
        double slack = 1e-9 * (1 + std::fabs(t_begin_));
        if (std::fabs(t - t_begin_) > slack)
            throw std::out_of_range("trajectory evaluated outside its span");
        return y_begin_;
    }
    if (!covers(t)) throw std::out_of_range("trajectory evaluated outside its span");
    // binary search for the step whose [t, t+h] interval contains t
    std::size_t lo = 0, hi = steps_.size() - 1;
    if (forward()) {
        while (lo < hi) {
            std::size_t mid = (lo + hi + 1) / 2;
            if (steps_[mid].t <= t) lo = mid;
            else hi = mid - 1;
        }
    } else {
        while (lo < hi) {
            std::size_t mid = (lo + hi + 1) / 2;
            if (steps_[mid].t >= t) lo = mid;
            else hi = mid - 1;
        }
    }
    const Step& s = steps_[lo];
    double theta = (t - s.t) / s.h;
    theta = std::clamp(theta, 0.0, 1.0);
    double th1 = 1.0 - theta;
    return s.c1 + theta * (s.c2 + th1 * (s.c3 + theta * (s.c4 + th1 * s.c5)));
}

bool Trajectory::covers(double t) const {
    double lo = std::min(t_begin_, t_end_), hi = std::max(t_begin_, t_end_);
    double slack = 1e-9 * (1 + std::max(std::fabs(lo), std::fabs(hi)));
    return t >= lo - slack && t <= hi + slack;
}

Trajectory integrate(const OdeRhs& f, Eigen::VectorXd y0, double t0, double t1,
                     const OdeOptions& opt) {
    Trajectory traj;
    traj.t_begin_ = t0;
    traj.t_end_ = t1;
    traj.y_begin_ = y0;
    traj.y_end_ = y0;
    if (t0 == t1) return traj;

    const double dir = t1 > t0 ? 1.0 : -1.0;
    const int n = static_cast<int>(y0.size());
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y1(n), err(n);

    double t = t0;
    Eigen::VectorXd y = std::move(y0);
    f(t, y, k1);

    double h = opt.h_init != 0 ? std::fabs(opt.h_init) : std::min(0.1, std::fabs(t1 - t0));
    h *= dir;

    for (long step = 0; step < opt.max_steps; ++step) {
        if ((t - t1) * dir >= 0) break;
        if ((t + h - t1) * dir > 0) h = t1 - t;
        if (std::fabs(h) < 1e-14 * std::max(1.0, std::fabs(t)))
            throw IntegrationError("step size underflow (possible blow-up)", t);

        ytmp = y + h * (a21 * k1);
        f(t + h / 5, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        f(t + 3 * h / 10, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + 4 * h / 5, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + 8 * h / 9, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, ytmp, k6);
        y1 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(t + h, y1, k7);

        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double nrm = 0;
        for (int i = 0; i < n; ++i) {
            double sc = opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs(y1[i]));
            double q = err[i] / sc;
            nrm += q * q;
        }
        nrm = std::sqrt(nrm / n);

        if (nrm <= 1.0) {
            Trajectory::Step s;
            s.t = t;
            s.h = h;
            s.c1 = y;
            s.c2 = y1 - y;
            s.c3 = h * k1 - s.c2;
            s.c4 = s.c2 - h * k7 - s.c3;
            s.c5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            traj.steps_.push_back(std::move(s));
            t += h;
            y.swap(y1);
            k1.swap(k7);  // FSAL
        }
        double factor = nrm > 0 ? 0.9 * std::pow(nrm, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
    }
    if ((t - t1) * dir < 0) throw IntegrationError("step budget exhausted", t);
    traj.y_end_ = y;
    return traj;
}

}  // namespace ccert
