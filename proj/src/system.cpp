#include "ccert/system.hpp"

#include <algorithm>

#include "ccert/cones.hpp"

namespace ccert {

Eigen::MatrixXd ProjectionSpec::matrix(int d) const {
    check(d);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n(), d);
    for (int i = 0; i < n(); ++i) p(i, kept[static_cast<std::size_t>(i)]) = 1.0;
    return p;
}

Eigen::VectorXd ProjectionSpec::apply(const Eigen::VectorXd& x) const {
    check(static_cast<int>(x.size()));
    Eigen::VectorXd out(n());
    for (int i = 0; i < n(); ++i) out[i] = x[kept[static_cast<std::size_t>(i)]];
    return out;
}

void ProjectionSpec::check(int d) const {
    if (kept.empty()) throw std::invalid_argument("projection: no coordinates kept");
    std::vector<int> sorted = kept;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("projection: duplicate coordinate index");
    if (sorted.front() < 0 || sorted.back() >= d)
        throw std::invalid_argument("projection: coordinate index out of range");
}

ProjectionSpec ProjectionSpec::drop_angle(int d) {
    ProjectionSpec p;
    for (int i = 0; i + 1 < d; ++i) p.kept.push_back(i);
    return p;
}

SystemDef SystemDef::general(std::vector<std::string> coords, VectorField drift,
                             std::vector<VectorField> controls) {
    SystemDef s;
    s.coords = std::move(coords);
    s.drift = std::move(drift);
    s.controls = std::move(controls);
    return s;
}

SystemDef SystemDef::product(std::vector<std::string> coords, Expr omega,
                             std::vector<VectorField> controls) {
    SystemDef s;
    s.coords = coords;
    s.product_form = true;
    s.omega = omega;
    std::vector<Expr> comps(coords.size(), Expr::constant(0.0));
    if (!coords.empty()) comps.back() = omega;
    s.drift = VectorField(std::move(coords), std::move(comps));
    s.controls = std::move(controls);
    return s;
}

std::vector<Diagnostic> validate(const SystemDef& sys, const ControlSet& u) {
    std::vector<Diagnostic> diags;
    const int d = sys.d();
    const int m = sys.m();

    if (d < 1) diags.push_back({"dimension", "state dimension must be >= 1"});
    if (m < 1) diags.push_back({"controls", "at least one control vector field is required"});

    if (sys.drift.dim() != d)
        diags.push_back({"dimension", "drift has " + std::to_string(sys.drift.dim()) +
                                          " components, expected " + std::to_string(d)});
    for (int k = 0; k < m; ++k)
        if (sys.controls[static_cast<std::size_t>(k)].dim() != d)
            diags.push_back({"dimension", "control field " + std::to_string(k + 1) +
                                              " has wrong dimension"});

    if (u.dim() != m)
        diags.push_back({"control_set", "control set lives in R^" + std::to_string(u.dim()) +
                                            " but the system has m = " + std::to_string(m)});

    if (sys.product_form) {
        // X0 = omega d/dphi: the first d-1 drift components must simplify to
        // the zero constant (structural check; the DSL folds constants).
        for (int i = 0; i + 1 < d; ++i)
            if (!sys.drift.components[static_cast<std::size_t>(i)].is_zero())
                diags.push_back({"product_form",
                                 "drift component " + std::to_string(i) +
                                     " is not identically zero in product form"});
        if (sys.omega && sys.omega->max_variable() >= d - 1)
            diags.push_back({"product_form", "omega must depend on the I coordinates only"});
        if (!sys.omega)
            diags.push_back({"product_form", "product form requires omega"});
    }

    if (u.dim() == m && m >= 1) {
        if (!u.contains_zero())
            diags.push_back({"assumption_0_in_U", "0 is not a member of the control set"});

        auto gens = u.generators();
        SpanRankResult sr = span_rank(gens, 1e-10);
        if (sr.rank < m)
            diags.push_back(
                {"assumption_span_U",
                 "generators of U span a subspace of dimension " + std::to_string(sr.rank) +
                     " < m = " + std::to_string(m) +
                     "; reduce to that many control fields (constant combinations of the X^k)"});

        double bound = u.radius_bound() * (1 + 1e-12) + 1e-12;
        for (const auto& g : gens)
            if (g.norm() > bound) {
                diags.push_back({"compactness", "a generator exceeds the declared radius bound"});
                break;
            }
    }
    return diags;
}

}  // namespace ccert
