#include "ccert/system.hpp"
#include "doctest.h"

using namespace ccert;

namespace {

// scalar-control academic system in product form (I1,I2,I3,phi)
SystemDef ex52_system() {
    std::vector<std::string> coords = {"I1", "I2", "I3", "phi"};
    VectorField x1 = VectorField::parse(
        coords, {"cos(phi)", "sin(phi)", "-cos(phi)*I2/2 + sin(phi)*I1/2", "0"});
    return SystemDef::product(coords, Expr::constant(1.0), {x1});
}

}  // namespace

TEST_CASE("validate admissible product-form system") {
    SystemDef sys = ex52_system();
    auto diags = validate(sys, ControlSet::interval(0, 1));
    CHECK(diags.empty());
    auto diags2 = validate(sys, ControlSet::interval(-1, 1));
    CHECK(diags2.empty());
}

TEST_CASE("validate flags span violation") {
    std::vector<std::string> xy = {"x", "y"};
    SystemDef sys = SystemDef::general(
        xy, VectorField::zero(xy),
        {VectorField::parse(xy, {"1", "0"}), VectorField::parse(xy, {"0", "1"})});
    auto diags = validate(sys, ControlSet::polytope({Eigen::Vector2d(1, 0)}));
    bool span = false;
    for (auto& d : diags) span |= d.code == "assumption_span_U";
    CHECK(span);
}

TEST_CASE("validate flags 0 not in U") {
    SystemDef sys = ex52_system();
    auto diags = validate(sys, ControlSet::interval(0.5, 1));
    REQUIRE(!diags.empty());
    bool zero = false;
    for (auto& d : diags) zero |= d.code == "assumption_0_in_U";
    CHECK(zero);
}

TEST_CASE("validate flags product-form drift shape") {
    std::vector<std::string> coords = {"I", "phi"};
    SystemDef sys;
    sys.coords = coords;
    sys.product_form = true;
    sys.omega = Expr::constant(1.0);
    sys.drift = VectorField::parse(coords, {"I", "1"});  // nonzero I-component
    sys.controls = {VectorField::parse(coords, {"1", "0"})};
    auto diags = validate(sys, ControlSet::interval(-1, 1));
    bool shape = false;
    for (auto& d : diags) shape |= d.code == "product_form";
    CHECK(shape);

    // omega referencing the angle is also rejected
    SystemDef sys2 = SystemDef::product(coords, parse_expr("sin(phi)", coords),
                                        {VectorField::parse(coords, {"1", "0"})});
    auto diags2 = validate(sys2, ControlSet::interval(-1, 1));
    bool omega_bad = false;
    for (auto& d : diags2) omega_bad |= d.code == "product_form";
    CHECK(omega_bad);
}

TEST_CASE("validate flags dimension mismatches") {
    SystemDef sys = ex52_system();
    auto diags = validate(sys, ControlSet::box({{-1, 1}, {-1, 1}}));  // m=1 but dim U = 2
    bool dim = false;
    for (auto& d : diags) dim |= d.code == "control_set";
    CHECK(dim);
}

TEST_CASE("projection specs") {
    ProjectionSpec p = ProjectionSpec::drop_angle(4);
    CHECK(p.kept == std::vector<int>({0, 1, 2}));
    Eigen::MatrixXd m = p.matrix(4);
    CHECK(m.rows() == 3);
    CHECK(m.cols() == 4);
    Eigen::Vector4d x(1, 2, 3, 4);
    Eigen::VectorXd px = p.apply(x);
    CHECK(px.size() == 3);
    CHECK(px[2] == 3.0);

    ProjectionSpec bad;
    bad.kept = {0, 0};
    CHECK_THROWS_AS(bad.check(3), std::invalid_argument);
    ProjectionSpec oob;
    oob.kept = {5};
    CHECK_THROWS_AS(oob.check(3), std::invalid_argument);
}
