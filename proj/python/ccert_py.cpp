#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ccert/scenario.hpp"

namespace py = pybind11;
using namespace ccert;

namespace {

py::object json_to_py(const nlohmann::json& j) {
    py::module_ pyjson = py::module_::import("json");
    return pyjson.attr("loads")(j.dump());
}

SufficientMode sufficient_mode(const std::string& name) {
    if (name == "global") return SufficientMode::GlobalOrbitwise;
    if (name == "local") return SufficientMode::LocalFixedTime;
    if (name == "local_proj") return SufficientMode::LocalFixedTimeProj;
    if (name == "one_period") return SufficientMode::OnePeriod;
    if (name == "one_period_proj") return SufficientMode::OnePeriodProj;
    throw std::invalid_argument("unknown sufficiency mode '" + name + "'");
}

std::optional<ProjectionSpec> proj_of(const std::vector<int>& kept) {
    if (kept.empty()) return std::nullopt;
    ProjectionSpec p;
    p.kept = kept;
    return p;
}

}  // namespace

PYBIND11_MODULE(_ccert, m) {
    m.doc() = "controllability certification toolkit (C++ core)";

    py::class_<ControlSet>(m, "ControlSet")
        .def_static("interval", &ControlSet::interval, py::arg("lo"), py::arg("hi"))
        .def_static("box",
                    [](const std::vector<std::pair<double, double>>& b) { return ControlSet::box(b); })
        .def_static("polytope",
                    [](const std::vector<Eigen::VectorXd>& v) { return ControlSet::polytope(v); })
        .def_static("disk_sector", &ControlSet::disk_sector, py::arg("half_angle"),
                    py::arg("generator_count") = 64)
        .def_static("product",
                    [](const std::vector<ControlSet>& f) { return ControlSet::product(f); })
        .def("scale", &ControlSet::scale)
        .def("dim", &ControlSet::dim)
        .def("generators", &ControlSet::generators)
        .def("support", &ControlSet::support)
        .def("contains_zero", &ControlSet::contains_zero)
        .def("__repr__", &ControlSet::describe);

    py::class_<SystemDef>(m, "System")
        .def_static(
            "product",
            [](const std::vector<std::string>& coords, const std::string& omega,
               const std::vector<std::vector<std::string>>& controls) {
                std::vector<VectorField> fields;
                for (const auto& c : controls) fields.push_back(VectorField::parse(coords, c));
                return SystemDef::product(coords, parse_expr(omega, coords), std::move(fields));
            },
            py::arg("coords"), py::arg("omega"), py::arg("controls"))
        .def_static(
            "general",
            [](const std::vector<std::string>& coords, const std::vector<std::string>& drift,
               const std::vector<std::vector<std::string>>& controls, bool poisson_stable) {
                std::vector<VectorField> fields;
                for (const auto& c : controls) fields.push_back(VectorField::parse(coords, c));
                SystemDef s = SystemDef::general(coords, VectorField::parse(coords, drift),
                                                 std::move(fields));
                s.poisson_stable = poisson_stable;
                return s;
            },
            py::arg("coords"), py::arg("drift"), py::arg("controls"),
            py::arg("poisson_stable") = false)
        .def_readonly("coords", &SystemDef::coords)
        .def_property_readonly("d", &SystemDef::d)
        .def_property_readonly("m", &SystemDef::m)
        .def("__repr__", [](const SystemDef& s) {
            return "<System d=" + std::to_string(s.d()) + " m=" + std::to_string(s.m()) +
                   (s.product_form ? " product-form>" : ">");
        });

    m.def(
        "validate",
        [](const SystemDef& sys, const ControlSet& u) {
            py::list out;
            for (const auto& d : validate(sys, u)) {
                py::dict item;
                item["code"] = d.code;
                item["message"] = d.message;
                out.append(item);
            }
            return out;
        },
        py::arg("system"), py::arg("control_set"));

    // expression utilities
    m.def(
        "eval_expr",
        [](const std::string& src, const std::vector<std::string>& coords,
           const Eigen::VectorXd& x) {
            std::vector<double> pt(x.data(), x.data() + x.size());
            return parse_expr(src, coords).eval(pt);
        },
        py::arg("expr"), py::arg("coords"), py::arg("point"));
    m.def(
        "diff_expr",
        [](const std::string& src, const std::vector<std::string>& coords, int var) {
            return parse_expr(src, coords).diff(var).str();
        },
        py::arg("expr"), py::arg("coords"), py::arg("var"));
    m.def(
        "lie_bracket",
        [](const std::vector<std::string>& coords, const std::vector<std::string>& x,
           const std::vector<std::string>& y) {
            VectorField b =
                lie_bracket(VectorField::parse(coords, x), VectorField::parse(coords, y));
            std::vector<std::string> out;
            for (const auto& c : b.components) out.push_back(c.str());
            return out;
        },
        py::arg("coords"), py::arg("x"), py::arg("y"));

    // cone tests
    m.def(
        "cone_full",
        [](const std::vector<Eigen::VectorXd>& gens, double delta_min) {
            ConeVerdict v = cone_full(gens, delta_min);
            py::dict d;
            d["status"] = v.status == ConeStatus::Full
                              ? "full"
                              : (v.status == ConeStatus::NotFull ? "not-full" : "degenerate");
            d["margin"] = v.margin;
            d["rank"] = v.rank;
            if (v.lambda.size()) d["lambda"] = v.lambda;
            if (v.p.size()) d["p"] = v.p;
            return d;
        },
        py::arg("generators"), py::arg("delta_min") = 1e-9);
    m.def(
        "polar_interior",
        [](const std::vector<Eigen::VectorXd>& gens, double margin_req) {
            PolarInterior p = polar_interior(gens, margin_req);
            py::dict d;
            d["kind"] = p.kind == PolarInterior::Kind::Nonempty
                            ? "nonempty"
                            : (p.kind == PolarInterior::Kind::Empty ? "empty" : "unknown");
            d["margin"] = p.margin;
            if (p.p.size()) d["p"] = p.p;
            return d;
        },
        py::arg("generators"), py::arg("margin_req") = 0.0);
    m.def(
        "span_rank",
        [](const std::vector<Eigen::VectorXd>& gens, double tol) {
            SpanRankResult r = span_rank(gens, tol);
            return py::make_tuple(r.rank, r.basis);
        },
        py::arg("generators"), py::arg("tol") = 1e-8);

    // flows
    m.def(
        "flow_endpoint",
        [](const SystemDef& sys, const Eigen::VectorXd& x0, double t, double tol) {
            return flow(sys, x0, t, tol).end();
        },
        py::arg("system"), py::arg("x0"), py::arg("t"), py::arg("tol") = 1e-10);
    m.def("pushforward", &pushforward, py::arg("system"), py::arg("x"), py::arg("tau"),
          py::arg("k"), py::arg("tol") = 1e-10);
    m.def(
        "sample_E",
        [](const SystemDef& sys, const ControlSet& u, const Eigen::VectorXd& x, double t1,
           double t2, int steps, const std::vector<int>& projection) {
            TangentSample s = sample_E(sys, u, x, t1, t2, steps, proj_of(projection));
            std::vector<double> taus;
            std::vector<Eigen::VectorXd> vs;
            for (const auto& e : s.entries) {
                taus.push_back(e.tau);
                vs.push_back(e.v);
            }
            return py::make_tuple(taus, vs);
        },
        py::arg("system"), py::arg("control_set"), py::arg("x"), py::arg("t1"), py::arg("t2"),
        py::arg("steps"), py::arg("projection") = std::vector<int>{});
    m.def("period", &period, py::arg("system"), py::arg("x"));

    // certificates
    m.def(
        "check_sufficient",
        [](const SystemDef& sys, const ControlSet& u, const Eigen::VectorXd& x,
           const std::string& mode, double tf, const std::vector<int>& projection) {
            Certificate c =
                check_sufficient(sys, u, x, sufficient_mode(mode), tf, proj_of(projection));
            return json_to_py(c.to_json());
        },
        py::arg("system"), py::arg("control_set"), py::arg("x"), py::arg("mode"),
        py::arg("tf") = 0.0, py::arg("projection") = std::vector<int>{});
    m.def(
        "check_obstruction",
        [](const SystemDef& sys, const ControlSet& u, const Eigen::VectorXd& x,
           const std::string& mode, double tf, const std::vector<int>& projection) {
            ObstructionMode om = mode == "orbital" ? ObstructionMode::Orbital
                                                   : ObstructionMode::AlongTrajectory;
            Certificate c = check_obstruction(sys, u, x, om, tf, proj_of(projection));
            return json_to_py(c.to_json());
        },
        py::arg("system"), py::arg("control_set"), py::arg("x"), py::arg("mode") = "orbital",
        py::arg("tf") = 0.0, py::arg("projection") = std::vector<int>{});
    m.def(
        "bracket_family",
        [](const SystemDef& sys, const std::string& family, int depth, const Eigen::VectorXd& x) {
            BracketFamilyReport r = bracket_family(
                sys, family == "larc" ? BracketFamily::Larc : BracketFamily::F0, depth, x);
            py::dict d;
            d["rank"] = r.rank;
            d["basis"] = r.basis_labels;
            d["depth"] = r.depth;
            return d;
        },
        py::arg("system"), py::arg("family"), py::arg("depth"), py::arg("x"));
    m.def(
        "bonnard_check",
        [](const SystemDef& sys, const ControlSet& u, int depth,
           const std::vector<Eigen::VectorXd>& pts) {
            return json_to_py(bonnard_check(sys, u, depth, pts).to_json());
        },
        py::arg("system"), py::arg("control_set"), py::arg("depth"), py::arg("points"));
    m.def(
        "span_consistency",
        [](const SystemDef& sys, const ControlSet& u, const Eigen::VectorXd& x, double t1,
           double t2, int depth) {
            SpanConsistencyReport r = span_consistency(sys, u, x, t1, t2, depth);
            py::dict d;
            d["rank_sampled"] = r.rank_sampled;
            d["rank_f0"] = r.rank_f0;
            d["agree"] = r.agree;
            return d;
        },
        py::arg("system"), py::arg("control_set"), py::arg("x"), py::arg("t1"), py::arg("t2"),
        py::arg("depth") = 3);

    // scenario-level operations
    m.def(
        "mc_reach",
        [](const SystemDef& sys, const ControlSet& u, const Eigen::VectorXd& x0, double horizon,
           int samples, std::uint64_t seed, int intervals_per_period,
           const std::vector<int>& projection) {
            ReachCloud c =
                mc_reach(sys, u, x0, horizon, samples, seed, intervals_per_period,
                         proj_of(projection));
            py::dict d;
            d["endpoints"] = c.endpoints;
            d["hull"] = c.hull == ReachCloud::Hull::Inside
                            ? "inside"
                            : (c.hull == ReachCloud::Hull::Outside ? "outside" : "boundary");
            d["hull_margin"] = c.hull_margin;
            d["skipped"] = c.skipped;
            return d;
        },
        py::arg("system"), py::arg("control_set"), py::arg("x0"), py::arg("horizon"),
        py::arg("samples"), py::arg("seed") = 1, py::arg("intervals_per_period") = 16,
        py::arg("projection") = std::vector<int>{});
    m.def(
        "goldfish",
        [](double eps2, double eps) { return json_to_py(goldfish(eps2, eps).to_json()); },
        py::arg("eps2") = 1.0, py::arg("eps") = 1.0);
    m.def(
        "area_property_test",
        [](int trials, std::uint64_t seed) {
            AreaTestStats s = area_property_test(trials, seed);
            py::dict d;
            d["trials"] = s.trials;
            d["closed"] = s.closed;
            d["violations"] = s.violations;
            d["min_gain"] = s.min_gain;
            return d;
        },
        py::arg("trials") = 200, py::arg("seed") = 1);
    m.def("builtin_names", &builtin_names);
}
