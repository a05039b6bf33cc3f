#include <cmath>
#include <complex>

#include "ccert/scenario.hpp"

namespace ccert {

namespace {

constexpr double kPi = 3.14159265358979323846;

// iint over {a1 <= r <= b1} x {a2 <= s <= b2} of sin(s - r), r-segment before
// s-segment
double cross_area(double a1, double b1, double a2, double b2) {
    return std::sin(b2 - b1) - std::sin(a2 - b1) - std::sin(b2 - a1) + std::sin(a2 - a1);
}

SystemDef ex52_system() {
    std::vector<std::string> coords = {"I1", "I2", "I3", "phi"};
    VectorField x1 = VectorField::parse(
        coords, {"cos(phi)", "sin(phi)", "-cos(phi)*I2/2 + sin(phi)*I1/2", "0"});
    return SystemDef::product(coords, Expr::constant(1.0), {x1});
}

}  // namespace

GoldfishSchedule goldfish_schedule(double eps2) {
    const double s3 = std::sqrt(3.0);
    GoldfishSchedule s;
    s.eps2 = eps2;
    s.eps1 = std::sqrt(((2 * kPi + 3) * s3 - 5 * kPi) / (2 * kPi - 3 * s3)) * eps2;
    s.eps3 = (s3 - 1) * eps2;
    // Palindromic about t = 5pi/3: the two eps1 arcs sit 3pi apart, so their
    // displacement contributions cancel identically; the eps2 pair and the
    // centered eps3 arc close the (I1,I2) curve exactly when
    // eps3 = 4 sin(pi/12) sin(pi/4) eps2 = (sqrt(3)-1) eps2, and the swept
    // area vanishes exactly at the eps1 ratio above.
    s.segments = {
        {0.0, kPi / 3, s.eps1},
        {kPi / 3, kPi / 2, s.eps2},
        {3 * kPi / 2, 11 * kPi / 6, s.eps3},
        {17 * kPi / 6, 3 * kPi, s.eps2},
        {3 * kPi, 10 * kPi / 3, s.eps1},
    };
    return s;
}

Eigen::Vector4d goldfish_exact_state(const GoldfishSchedule& s, double t, double i1, double i2,
                                     double i3, double phi0) {
    std::complex<double> z0(i1, i2);
    const std::complex<double> iu(0.0, 1.0);

    // z(t) = z0 + e^{i phi0} sum_j l_j (e^{i min(b,t)} - e^{i a}) / i
    std::complex<double> dz(0.0, 0.0);
    for (const auto& [a, b, lvl] : s.segments) {
        if (t <= a) break;
        double bt = std::min(b, t);
        dz += lvl * (std::exp(iu * bt) - std::exp(iu * a)) / iu;
    }
    dz *= std::exp(iu * phi0);
    std::complex<double> z = z0 + dz;

    // swept-area double integral with segments clipped at t
    double acc = 0;
    for (std::size_t j = 0; j < s.segments.size(); ++j) {
        auto [aj, bj, lj] = s.segments[j];
        if (t <= aj) break;
        double bjt = std::min(bj, t);
        double len = bjt - aj;
        acc += lj * lj * (len - std::sin(len));
        for (std::size_t k = j + 1; k < s.segments.size(); ++k) {
            auto [ak, bk, lk] = s.segments[k];
            if (t <= ak) break;
            double bkt = std::min(bk, t);
            acc += lj * lk * cross_area(aj, bjt, ak, bkt);
        }
    }
    double i3t = i3 + acc / 2 +
                 0.5 * std::imag(std::complex<double>(i1, -i2) * dz);

    return Eigen::Vector4d(z.real(), z.imag(), i3t, phi0 + t);
}

nlohmann::json GoldfishReport::to_json() const {
    nlohmann::json j;
    j["eps"] = eps;
    j["eps1"] = eps1;
    j["eps2"] = eps2;
    j["eps3"] = eps3;
    j["eps1_over_eps2"] = eps1 / eps2;
    j["closure_closed_form"] = closure_closed_form;
    j["closure_numeric"] = closure_numeric;
    j["max_checkpoint_gap"] = max_checkpoint_gap;
    nlohmann::json loops = nlohmann::json::array();
    for (const auto& l : aux_loops) loops.push_back({{"level", l.level}, {"i3_gain", l.i3_gain}});
    j["aux_loops"] = loops;
    return j;
}

GoldfishReport goldfish(double eps2, double eps) {
    // eps2 = eps is tolerated so the canonical eps2 = 1 drawing can be
    // reproduced at the control bound
    if (!(0 < eps2) || !(eps2 <= eps) || !(eps <= 1.0))
        throw std::invalid_argument("goldfish: need 0 < eps2 <= eps <= 1");
    GoldfishSchedule sched = goldfish_schedule(eps2);
    if (!(0 < sched.eps1 && sched.eps1 < sched.eps3 && sched.eps3 < sched.eps2 &&
          sched.eps2 <= eps))
        throw std::domain_error("goldfish: plateau ordering 0 < eps1 < eps3 < eps2 <= eps violated");

    GoldfishReport rep;
    rep.eps = eps;
    rep.eps1 = sched.eps1;
    rep.eps2 = sched.eps2;
    rep.eps3 = sched.eps3;

    const double tf = 10 * kPi / 3;
    const double i1 = 0.35, i2 = -0.2, i3 = 0.1, phi0 = 0.0;  // arbitrary start

    // closed-form closure
    Eigen::Vector4d xe = goldfish_exact_state(sched, tf, i1, i2, i3, phi0);
    rep.closure_closed_form =
        (xe.head<3>() - Eigen::Vector3d(i1, i2, i3)).lpNorm<Eigen::Infinity>();

    // numeric closure and checkpoint agreement
    SystemDef sys = ex52_system();
    std::vector<double> checkpoints;
    for (int k = 1; k <= 16; ++k) checkpoints.push_back(tf * k / 16);

    Eigen::VectorXd x(4);
    x << i1, i2, i3, phi0;
    std::size_t next_cp = 0;
    double max_gap = 0;
    // walk the schedule including the zero gaps between segments
    std::vector<std::array<double, 3>> pieces;
    double cursor = 0;
    for (const auto& seg : sched.segments) {
        if (seg[0] > cursor) pieces.push_back({cursor, seg[0], 0.0});
        pieces.push_back(seg);
        cursor = seg[1];
    }
    if (cursor < tf) pieces.push_back({cursor, tf, 0.0});

    for (const auto& [a, b, lvl] : pieces) {
        Eigen::VectorXd u = Eigen::VectorXd::Constant(1, lvl);
        Trajectory traj = flow(sys, x, b - a, 1e-11, &u);
        while (next_cp < checkpoints.size() && checkpoints[next_cp] <= b + 1e-12) {
            Eigen::VectorXd xc = traj.at(checkpoints[next_cp] - a);
            Eigen::Vector4d exact =
                goldfish_exact_state(sched, checkpoints[next_cp], i1, i2, i3, phi0);
            max_gap = std::max(max_gap, (xc - exact).lpNorm<Eigen::Infinity>());
            ++next_cp;
        }
        x = traj.end();
    }
    rep.max_checkpoint_gap = max_gap;
    rep.closure_numeric =
        (x.head<3>() - Eigen::Vector3d(i1, i2, i3)).lpNorm<Eigen::Infinity>();

    // auxiliary one-period closed loops: constant nonnegative control over
    // [0, 2pi] closes (I1,I2) and must not lose swept area
    for (double lvl : {sched.eps1, sched.eps3, sched.eps2}) {
        GoldfishSchedule loop;
        loop.eps1 = loop.eps2 = loop.eps3 = lvl;
        loop.segments = {{0.0, 2 * kPi, lvl}};
        Eigen::Vector4d end = goldfish_exact_state(loop, 2 * kPi, i1, i2, i3, phi0);
        rep.aux_loops.push_back({lvl, end[2] - i3});
    }
    return rep;
}

}  // namespace ccert
