#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ccert/expr.hpp"

namespace ccert {

using ExprMatrix = std::vector<std::vector<Expr>>;

// A vector field on R^d given componentwise by expressions over the chart
// coordinates.
struct VectorField {
    std::vector<std::string> coords;
    std::vector<Expr> components;

    VectorField() = default;
    VectorField(std::vector<std::string> coords, std::vector<Expr> components);

    int dim() const { return static_cast<int>(coords.size()); }

    Eigen::VectorXd eval(const Eigen::VectorXd& x) const;

    static VectorField parse(const std::vector<std::string>& coords,
                             const std::vector<std::string>& component_sources);
    static VectorField zero(const std::vector<std::string>& coords);
};

// Entry (i,j) = d component_i / d x_j.
ExprMatrix jacobian(const VectorField& v);

// [X,Y] = (DY)X - (DX)Y, simplified componentwise.
VectorField lie_bracket(const VectorField& x, const VectorField& y);

// ad_X^j Y with ad^0 = Y.
VectorField ad(const VectorField& x, const VectorField& y, int j);

Eigen::MatrixXd eval_matrix(const ExprMatrix& m, const Eigen::VectorXd& x);
ExprMatrix diff_matrix(const ExprMatrix& m, int var);

// Compiled form of a vector field for tight integration loops.
class CompiledField {
public:
    CompiledField() = default;
    explicit CompiledField(const VectorField& v);
    int dim() const { return static_cast<int>(programs_.size()); }
    void eval(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;

private:
    std::vector<ExprProgram> programs_;
    mutable std::vector<double> stack_;
};

}  // namespace ccert
