#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ccert/control_set.hpp"
#include "ccert/vector_field.hpp"

namespace ccert {

// Coordinate projection pi: R^d -> R^n given by the kept coordinate indices.
struct ProjectionSpec {
    std::vector<int> kept;

    int n() const { return static_cast<int>(kept.size()); }
    Eigen::MatrixXd matrix(int d) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    void check(int d) const;

    // Product-form default: drop the angle (last coordinate).
    static ProjectionSpec drop_angle(int d);
};

// Affine control system  xdot = X0(x) + sum_k u_k X^k(x), u in U.
// In product form the last coordinate is the angle phi, the drift is
// (0,...,0, omega(I)) and omega may only reference the I coordinates.
struct SystemDef {
    std::vector<std::string> coords;
    VectorField drift;
    std::vector<VectorField> controls;
    bool product_form = false;
    std::optional<Expr> omega;
    std::optional<double> declared_period;
    bool poisson_stable = false;  // user assertion; product form implies it

    int d() const { return static_cast<int>(coords.size()); }
    int m() const { return static_cast<int>(controls.size()); }

    // General-form constructor.
    static SystemDef general(std::vector<std::string> coords, VectorField drift,
                             std::vector<VectorField> controls);
    // Product-form constructor: drift is built as (0,...,0, omega).
    static SystemDef product(std::vector<std::string> coords, Expr omega,
                             std::vector<VectorField> controls);

    bool poisson_stable_asserted() const { return poisson_stable || product_form; }
};

struct Diagnostic {
    std::string code;
    std::string message;
};

// Admissibility diagnostics: control-set assumptions (0 in U, span U = R^m),
// dimension agreement, product-form drift shape. Empty list means admissible.
std::vector<Diagnostic> validate(const SystemDef& sys, const ControlSet& u);

}  // namespace ccert
