#include <cmath>

#include "ccert/cones.hpp"
#include "ccert/control_set.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ccert;
using testutil::Rng;

TEST_CASE("generator counts per variant") {
    CHECK(ControlSet::box({{-1, 1}, {-1, 1}}).generators().size() == 4);
    auto ivl = ControlSet::interval(0, 1).generators();
    REQUIRE(ivl.size() == 2);
    CHECK(ivl[0][0] == 0.0);
    CHECK(ivl[1][0] == 1.0);

    auto ds = ControlSet::disk_sector(0.5, 9);
    auto g = ds.generators();
    REQUIRE(g.size() == 10);  // 9 arc points + origin
    CHECK(g.front()[0] == doctest::Approx(std::cos(0.5)));
    CHECK(g.front()[1] == doctest::Approx(std::sin(-0.5)));
    CHECK(g[8][1] == doctest::Approx(std::sin(0.5)));
    CHECK(g.back().norm() == 0.0);
    // every arc point satisfies the defining inequalities exactly
    double tana = std::tan(0.5);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        CHECK(g[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::fabs(g[i][1]) <= g[i][0] * tana + 1e-12);
    }
}

TEST_CASE("support function examples") {
    Eigen::Vector2d p11(1, 1);
    CHECK(ControlSet::box({{-1, 1}, {-1, 1}}).support(p11) == doctest::Approx(2.0));
    CHECK(ControlSet::interval(0, 1).support(Eigen::VectorXd::Constant(1, -1.0)) ==
          doctest::Approx(0.0));
    Eigen::Vector2d e2(0, 1);
    CHECK(ControlSet::disk_sector(3.14159265358979323846 / 4).support(e2) ==
          doctest::Approx(std::sin(3.14159265358979323846 / 4)));
    // direction inside the sector attains the full radius
    Eigen::Vector2d mid(std::cos(0.1), std::sin(0.1));
    CHECK(ControlSet::disk_sector(0.5).support(mid) == doctest::Approx(1.0));
}

TEST_CASE("scale keeps shape, scales support") {
    auto s = ControlSet::interval(0, 1).scale(0.5);
    auto g = s.generators();
    CHECK(g[1][0] == doctest::Approx(0.5));
    CHECK_THROWS_AS(ControlSet::interval(0, 1).scale(0.0), std::invalid_argument);
    CHECK_THROWS_AS(ControlSet::interval(0, 1).scale(-1.0), std::invalid_argument);

    auto ds = ControlSet::disk_sector(0.4, 17).scale(0.25);
    CHECK(ds.disk_half_angle() == doctest::Approx(0.4));
    CHECK(ds.radius_bound() == doctest::Approx(0.25));

    Rng rng(31415);
    auto u = ControlSet::disk_sector(0.6, 21);
    auto ue = u.scale(0.37);
    for (int i = 0; i < 100; ++i) {
        Eigen::VectorXd p = rng.vector(2, -2, 2);
        CHECK(ue.support(p) == doctest::Approx(0.37 * u.support(p)).epsilon(1e-12));
    }
}

TEST_CASE("support dominates generators") {
    Rng rng(999);
    std::vector<ControlSet> sets = {
        ControlSet::interval(-0.3, 1.2),
        ControlSet::box({{-1, 0.5}, {-0.25, 2}}),
        ControlSet::disk_sector(0.8, 33),
        ControlSet::product({ControlSet::interval(-1, 1), ControlSet::interval(0, 2)}),
        ControlSet::polytope({Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0.2),
                              Eigen::Vector2d(-0.5, 1)}),
    };
    for (const auto& u : sets) {
        auto gens = u.generators();
        for (int i = 0; i < 200; ++i) {
            Eigen::VectorXd p = rng.vector(u.dim(), -1, 1);
            double h = u.support(p);
            for (const auto& g : gens) CHECK(p.dot(g) <= h + 1e-12);
        }
    }
}

TEST_CASE("origin membership and generator hull") {
    CHECK(ControlSet::interval(0, 1).contains_zero());
    CHECK_FALSE(ControlSet::interval(0.5, 1).contains_zero());
    CHECK(ControlSet::disk_sector(0.3).contains_zero());
    CHECK(ControlSet::polytope({Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 1),
                                Eigen::Vector2d(0, -1)})
              .contains_zero());
    CHECK_FALSE(ControlSet::polytope({Eigen::Vector2d(1, 0)}).contains_zero());

    // whenever 0 is a member, 0 lies in conv(generators): reuse the cone LP
    std::vector<ControlSet> with_zero = {
        ControlSet::interval(-1, 2), ControlSet::box({{0, 1}, {-1, 0}}),
        ControlSet::disk_sector(0.5, 9),
        ControlSet::product({ControlSet::interval(0, 1), ControlSet::interval(-2, 0)})};
    for (const auto& u : with_zero) {
        REQUIRE(u.contains_zero());
        auto gens = u.generators();
        // 0 in conv(G): the positive-combination LP must be feasible
        LpProblem lp;
        int nv = static_cast<int>(gens.size());
        int m = u.dim();
        lp.c = Eigen::VectorXd::Zero(nv);
        lp.a_eq = Eigen::MatrixXd::Zero(m + 1, nv);
        lp.b_eq = Eigen::VectorXd::Zero(m + 1);
        for (int i = 0; i < nv; ++i) {
            lp.a_eq.col(i).head(m) = gens[static_cast<std::size_t>(i)];
            lp.a_eq(m, i) = 1.0;
        }
        lp.b_eq[m] = 1.0;
        lp.lo = Eigen::VectorXd::Zero(nv);
        lp.hi = Eigen::VectorXd::Constant(nv, std::numeric_limits<double>::infinity());
        CHECK(lp_solve(lp).status == LpStatus::Optimal);
    }
}

TEST_CASE("invalid constructions") {
    CHECK_THROWS_AS(ControlSet::interval(2, 1), std::invalid_argument);
    CHECK_THROWS_AS(ControlSet::disk_sector(0.0), std::invalid_argument);
    CHECK_THROWS_AS(ControlSet::disk_sector(2.0), std::invalid_argument);
    CHECK_THROWS_AS(ControlSet::polytope({}), std::invalid_argument);
}
