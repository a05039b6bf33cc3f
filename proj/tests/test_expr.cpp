#include <cmath>

#include "ccert/expr.hpp"
#include "ccert/vector_field.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ccert;
using testutil::Rng;

namespace {

const std::vector<std::string> kIPhi = {"I1", "phi"};
const std::vector<std::string> kEx52 = {"I1", "I2", "I3", "phi"};

// Fields of the academic scalar-control system: X0 = d/dphi,
// X1 = cos(phi)(d/dI1 - I2/2 d/dI3) + sin(phi)(d/dI2 + I1/2 d/dI3).
VectorField ex52_drift() { return VectorField::parse(kEx52, {"0", "0", "0", "1"}); }
VectorField ex52_control() {
    return VectorField::parse(
        kEx52, {"cos(phi)", "sin(phi)", "-cos(phi)*I2/2 + sin(phi)*I1/2", "0"});
}

// Random expression generator for the finite-difference oracle. Stays clear
// of division/sqrt domain trouble by construction.
Expr random_expr(Rng& rng, int vars, int depth) {
    if (depth == 0 || rng.below(4) == 0) {
        if (rng.below(3) == 0) return Expr::constant(rng.uniform(-2, 2));
        return Expr::variable(rng.below(vars));
    }
    switch (rng.below(7)) {
        case 0: return random_expr(rng, vars, depth - 1) + random_expr(rng, vars, depth - 1);
        case 1: return random_expr(rng, vars, depth - 1) - random_expr(rng, vars, depth - 1);
        case 2: return random_expr(rng, vars, depth - 1) * random_expr(rng, vars, depth - 1);
        case 3: return Expr::unary(Expr::UnaryOp::Sin, random_expr(rng, vars, depth - 1));
        case 4: return Expr::unary(Expr::UnaryOp::Cos, random_expr(rng, vars, depth - 1));
        case 5: return Expr::int_pow(random_expr(rng, vars, depth - 1), 1 + rng.below(3));
        default:
            return Expr::unary(Expr::UnaryOp::Exp,
                               Expr::constant(0.3) * random_expr(rng, vars, depth - 1));
    }
}

}  // namespace

TEST_CASE("parse basics") {
    Expr e = parse_expr("sin(phi)", kIPhi);
    CHECK(e.kind() == Expr::Kind::Unary);
    CHECK(e.unary_op() == Expr::UnaryOp::Sin);
    CHECK(e.child_a().kind() == Expr::Kind::Variable);
    CHECK(e.child_a().variable_index() == 1);

    CHECK_THROWS_AS(parse_expr("u undefined", kIPhi), ParseError);
    CHECK_THROWS_AS(parse_expr("", kIPhi), ParseError);
    CHECK_THROWS_AS(parse_expr("sin(phi", kIPhi), ParseError);
    CHECK_THROWS_AS(parse_expr("I1^phi", kIPhi), ParseError);
    CHECK_THROWS_AS(parse_expr("sin(I1, phi)", kIPhi), ParseError);

    // precedence: ^ over unary minus over * over +
    std::vector<std::string> xy = {"x", "y"};
    double pt[] = {2.0, 3.0};
    CHECK(parse_expr("-x^2", xy).eval(pt) == doctest::Approx(-4.0));
    CHECK(parse_expr("x+y*x", xy).eval(pt) == doctest::Approx(8.0));
    CHECK(parse_expr("(x+y)*x", xy).eval(pt) == doctest::Approx(10.0));
    CHECK(parse_expr("x^-1", xy).eval(pt) == doctest::Approx(0.5));
    CHECK(parse_expr("2*pi", xy).eval(pt) == doctest::Approx(6.2831853071795864));
}

TEST_CASE("parse error reports position") {
    try {
        parse_expr("I1 + undefined_name", kIPhi);
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.position == 5);
    }
}

TEST_CASE("parse preserves the component structure as written") {
    // an I3-type component written in source form: cos(phi)*(1 - I2/2)
    std::vector<std::string> coords = {"I2", "phi"};
    Expr e = parse_expr("cos(phi)*(1 - I2/2)", coords);
    CHECK(e.kind() == Expr::Kind::Binary);
    CHECK(e.binary_op() == Expr::BinaryOp::Mul);
    CHECK(e.child_a().unary_op() == Expr::UnaryOp::Cos);
    CHECK(e.child_b().binary_op() == Expr::BinaryOp::Sub);
    double pt[] = {1.0, 0.5};
    CHECK(e.eval(pt) == doctest::Approx(std::cos(0.5) * 0.5));
}

TEST_CASE("eval examples and error paths") {
    double p1[] = {0.0, 1.5707963267948966};
    CHECK(parse_expr("sin(phi)", kIPhi).eval(p1) == doctest::Approx(1.0));

    std::vector<std::string> c2 = {"I1", "I2"};
    double p2[] = {2.0, 3.0};
    CHECK(parse_expr("I1*I2", c2).eval(p2) == doctest::Approx(6.0));

    double p0[] = {0.0, 0.0};
    CHECK_THROWS_AS(parse_expr("1/I1", c2).eval(p0), EvalError);
    CHECK_THROWS_AS(parse_expr("sqrt(0-I2)", c2).eval(p2), EvalError);
    try {
        parse_expr("1 + 1/I1", c2).eval(p0);
        CHECK(false);
    } catch (const EvalError& e) {
        CHECK(e.subexpr == "1/x0");  // offending subexpression is reported
    }
}

TEST_CASE("diff basics") {
    Expr s = parse_expr("sin(phi)", kIPhi);
    Expr ds = s.diff(1);
    CHECK(ds.kind() == Expr::Kind::Unary);
    CHECK(ds.unary_op() == Expr::UnaryOp::Cos);

    std::vector<std::string> c2 = {"I1", "I2"};
    Expr e = parse_expr("I1^2*I2", c2);
    double pt[] = {1.3, -0.7};
    CHECK(e.diff(0).eval(pt) == doctest::Approx(2 * 1.3 * -0.7));

    Expr dd = s.diff(1).diff(1);
    double q[] = {0.0, 0.3};
    CHECK(dd.eval(q) == doctest::Approx(-std::sin(0.3)));
    Expr c = parse_expr("cos(phi)", kIPhi);
    CHECK(c.diff(1).diff(1).eval(q) == doctest::Approx(-std::cos(0.3)));

    // abs' = sign with sign(0) = 0
    Expr a = parse_expr("abs(I1)", c2);
    double neg[] = {-2.0, 0.0};
    double zero[] = {0.0, 0.0};
    CHECK(a.diff(0).eval(pt) == doctest::Approx(1.0));
    CHECK(a.diff(0).eval(neg) == doctest::Approx(-1.0));
    CHECK(a.diff(0).eval(zero) == doctest::Approx(0.0));
}

TEST_CASE("directional derivative agrees with central differences") {
    Rng rng(20240817);
    int checked = 0;
    while (checked < 1000) {
        int vars = 1 + rng.below(3);
        Expr e = random_expr(rng, vars, 3);
        std::vector<double> x(static_cast<std::size_t>(vars));
        for (auto& v : x) v = rng.uniform(-1.5, 1.5);
        std::vector<double> dir(static_cast<std::size_t>(vars));
        double nrm = 0;
        for (auto& v : dir) {
            v = rng.uniform(-1, 1);
            nrm += v * v;
        }
        if (nrm < 1e-6) continue;

        double analytic = 0;
        for (int j = 0; j < vars; ++j) analytic += e.diff(j).eval(x) * dir[static_cast<std::size_t>(j)];

        const double h = 1e-5;
        std::vector<double> xp = x, xm = x;
        for (int j = 0; j < vars; ++j) {
            xp[static_cast<std::size_t>(j)] += h * dir[static_cast<std::size_t>(j)];
            xm[static_cast<std::size_t>(j)] -= h * dir[static_cast<std::size_t>(j)];
        }
        double fd = (e.eval(xp) - e.eval(xm)) / (2 * h);
        double scale = std::max({1.0, std::fabs(analytic), std::fabs(fd)});
        if (!std::isfinite(fd) || scale > 1e3) continue;  // extreme exp growth: skip
        CHECK(std::fabs(analytic - fd) / scale <= 1e-6);
        ++checked;
    }
}

TEST_CASE("print/parse round-trip evaluates identically") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        int vars = 1 + rng.below(4);
        Expr e = random_expr(rng, vars, 4);
        std::vector<std::string> coords;
        for (int i = 0; i < vars; ++i) coords.push_back("x" + std::to_string(i));
        Expr round = parse_expr(e.str(), coords);
        for (int k = 0; k < 5; ++k) {
            std::vector<double> x(static_cast<std::size_t>(vars));
            for (auto& v : x) v = rng.uniform(-2, 2);
            double a = e.eval(x), b = round.eval(x);
            CHECK(std::fabs(a - b) <= 1e-15 * std::max(1.0, std::fabs(a)));
        }
    }
}

TEST_CASE("jacobian examples") {
    std::vector<std::string> c2 = {"I1", "I2"};
    VectorField v(c2, {parse_expr("I2", c2), Expr::constant(0.0)});
    ExprMatrix j = jacobian(v);
    Eigen::Vector2d x(0.3, -1.1);
    Eigen::MatrixXd jm = eval_matrix(j, x);
    CHECK(jm(0, 0) == 0.0);
    CHECK(jm(0, 1) == 1.0);
    CHECK(jm(1, 0) == 0.0);
    CHECK(jm(1, 1) == 0.0);

    // constant drift field: zero matrix
    ExprMatrix j0 = jacobian(ex52_drift());
    Eigen::Vector4d p(0.2, -0.4, 1.0, 2.2);
    CHECK(eval_matrix(j0, p).norm() == 0.0);

    // jacobian of the control field against finite differences
    VectorField x1 = ex52_control();
    Eigen::MatrixXd ja = eval_matrix(jacobian(x1), p);
    const double h = 1e-6;
    for (int col = 0; col < 4; ++col) {
        Eigen::Vector4d pp = p, pm = p;
        pp[col] += h;
        pm[col] -= h;
        Eigen::VectorXd fd = (x1.eval(pp) - x1.eval(pm)) / (2 * h);
        CHECK((ja.col(col) - fd).norm() <= 1e-8);
    }
    CHECK(ja(2, 3) != 0.0);  // row 3 / column 4 carries the +-I/2 terms
    CHECK(ja(0, 3) == doctest::Approx(-std::sin(p[3])));
    CHECK(ja(1, 3) == doctest::Approx(std::cos(p[3])));
}

TEST_CASE("lie bracket examples") {
    std::vector<std::string> xy = {"x", "y"};
    VectorField ddx(xy, {Expr::constant(1.0), Expr::constant(0.0)});
    VectorField x_ddy(xy, {Expr::constant(0.0), parse_expr("x", xy)});
    VectorField b = lie_bracket(ddx, x_ddy);
    Eigen::Vector2d q(0.7, -0.3);
    Eigen::VectorXd bv = b.eval(q);
    CHECK(bv[0] == doctest::Approx(0.0));
    CHECK(bv[1] == doctest::Approx(1.0));

    // [X0, X1] = -sin(phi)(dI1 - I2/2 dI3) + cos(phi)(dI2 + I1/2 dI3)
    VectorField x0 = ex52_drift(), x1 = ex52_control();
    VectorField b01 = lie_bracket(x0, x1);
    Rng rng(99);
    for (int t = 0; t < 20; ++t) {
        Eigen::Vector4d p = rng.vector(4, -2, 2);
        Eigen::VectorXd v = b01.eval(p);
        double c = std::cos(p[3]), s = std::sin(p[3]);
        CHECK(v[0] == doctest::Approx(-s).epsilon(1e-12));
        CHECK(v[1] == doctest::Approx(c).epsilon(1e-12));
        CHECK(v[2] == doctest::Approx(s * p[1] / 2 + c * p[0] / 2).epsilon(1e-12));
        CHECK(v[3] == doctest::Approx(0.0));
    }

    // [X1,[X0,X1]] = d/dI3, cross-checked against finite differences of the
    // bracket definition
    VectorField b101 = lie_bracket(x1, b01);
    for (int t = 0; t < 10; ++t) {
        Eigen::Vector4d p = rng.vector(4, -2, 2);
        Eigen::VectorXd v = b101.eval(p);
        CHECK((v - Eigen::Vector4d(0, 0, 1, 0)).norm() <= 1e-12);

        const double h = 1e-5;
        Eigen::VectorXd fd = Eigen::VectorXd::Zero(4);
        // (D[X0,X1]) X1 - (DX1) [X0,X1] by central differences
        for (int j = 0; j < 4; ++j) {
            Eigen::Vector4d pp = p, pm = p;
            pp[j] += h;
            pm[j] -= h;
            fd += (b01.eval(pp) - b01.eval(pm)) / (2 * h) * x1.eval(p)[j];
            fd -= (x1.eval(pp) - x1.eval(pm)) / (2 * h) * b01.eval(p)[j];
        }
        CHECK((v - fd).norm() <= 1e-6);
    }
}

TEST_CASE("bracket antisymmetry at random points") {
    Rng rng(4242);
    std::vector<std::string> coords = {"x", "y", "z"};
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Expr> xc, yc;
        for (int i = 0; i < 3; ++i) {
            xc.push_back(random_expr(rng, 3, 2));
            yc.push_back(random_expr(rng, 3, 2));
        }
        VectorField x(coords, xc), y(coords, yc);
        VectorField xy = lie_bracket(x, y), yx = lie_bracket(y, x);
        for (int k = 0; k < 10; ++k) {
            Eigen::Vector3d p = rng.vector(3, -1, 1);
            Eigen::VectorXd a = xy.eval(p), b = yx.eval(p);
            CHECK((a + b).lpNorm<Eigen::Infinity>() <=
                  1e-12 * std::max(1.0, a.lpNorm<Eigen::Infinity>()));
        }
    }
}

TEST_CASE("compiled program matches tree evaluation") {
    Rng rng(321);
    for (int trial = 0; trial < 50; ++trial) {
        Expr e = random_expr(rng, 3, 4);
        ExprProgram prog(e);
        std::vector<double> stack;
        for (int k = 0; k < 5; ++k) {
            std::vector<double> x = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
            CHECK(prog.eval(x, stack) == doctest::Approx(e.eval(x)).epsilon(1e-14));
        }
    }
}
