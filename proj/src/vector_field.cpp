#include "ccert/vector_field.hpp"

namespace ccert {

VectorField::VectorField(std::vector<std::string> coords_, std::vector<Expr> components_)
    : coords(std::move(coords_)), components(std::move(components_)) {
    if (coords.size() != components.size())
        throw std::invalid_argument("vector field needs one component per coordinate");
    for (const Expr& c : components)
        if (c.max_variable() >= dim())
            throw std::invalid_argument("component references coordinate index beyond dimension");
}

Eigen::VectorXd VectorField::eval(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) throw std::invalid_argument("point dimension mismatch");
    Eigen::VectorXd out(dim());
    std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    for (int i = 0; i < dim(); ++i) out[i] = components[i].eval(xs);
    return out;
}

VectorField VectorField::parse(const std::vector<std::string>& coords,
                               const std::vector<std::string>& component_sources) {
    std::vector<Expr> comps;
    comps.reserve(component_sources.size());
    for (const std::string& s : component_sources) comps.push_back(parse_expr(s, coords));
    return VectorField(coords, std::move(comps));
}

VectorField VectorField::zero(const std::vector<std::string>& coords) {
    return VectorField(coords, std::vector<Expr>(coords.size(), Expr::constant(0.0)));
}

ExprMatrix jacobian(const VectorField& v) {
    int d = v.dim();
    ExprMatrix m(d, std::vector<Expr>(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m[i][j] = v.components[i].diff(j);
    return m;
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
    if (x.dim() != y.dim()) throw std::invalid_argument("lie_bracket: dimension mismatch");
    int d = x.dim();
    std::vector<Expr> comps(d, Expr::constant(0.0));
    for (int i = 0; i < d; ++i) {
        Expr acc = Expr::constant(0.0);
        for (int j = 0; j < d; ++j) {
            acc = acc + y.components[i].diff(j) * x.components[j];
            acc = acc - x.components[i].diff(j) * y.components[j];
        }
        comps[i] = acc;
    }
    return VectorField(x.coords, std::move(comps));
}

VectorField ad(const VectorField& x, const VectorField& y, int j) {
    VectorField out = y;
    for (int k = 0; k < j; ++k) out = lie_bracket(x, out);
    return out;
}

Eigen::MatrixXd eval_matrix(const ExprMatrix& m, const Eigen::VectorXd& x) {
    Eigen::MatrixXd out(m.size(), m.empty() ? 0 : m[0].size());
    std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j].eval(xs);
    return out;
}

ExprMatrix diff_matrix(const ExprMatrix& m, int var) {
    ExprMatrix out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        out[i].reserve(m[i].size());
        for (const Expr& e : m[i]) out[i].push_back(e.diff(var));
    }
    return out;
}

CompiledField::CompiledField(const VectorField& v) {
    programs_.reserve(v.components.size());
    for (const Expr& c : v.components) programs_.emplace_back(c);
}

void CompiledField::eval(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    out.resize(static_cast<Eigen::Index>(programs_.size()));
    for (std::size_t i = 0; i < programs_.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = programs_[i].eval(xs, stack_);
}

}  // namespace ccert
