#include "ccert/certify.hpp"

#include <cmath>
#include <sstream>

namespace ccert {

std::string to_string(TheoremTag t) {
    switch (t) {
        case TheoremTag::Thm21Global: return "global-controllability (cone breve-E full)";
        case TheoremTag::Thm23LocalI: return "local-controllability fixed-time";
        case TheoremTag::Thm23LocalII: return "local-controllability fixed-time projected";
        case TheoremTag::Thm26OnePeriodI: return "one-period local controllability";
        case TheoremTag::Thm26OnePeriodII: return "one-period orbital controllability";
        case TheoremTag::Obstruction25I: return "obstruction along trajectory";
        case TheoremTag::Obstruction25II: return "obstruction along trajectory projected";
        case TheoremTag::Obstruction26Orbital: return "orbital obstruction";
        case TheoremTag::Bonnard18: return "poisson-stable bracket-generating test";
    }
    return "?";
}

std::string to_string(CertStatus s) {
    switch (s) {
        case CertStatus::SufficientMet: return "sufficient-met";
        case CertStatus::Obstructed: return "obstructed";
        case CertStatus::Inconclusive: return "inconclusive";
        case CertStatus::AssumptionFailed: return "assumption-failed";
    }
    return "?";
}

namespace {

const char* cone_status_name(ConeStatus s) {
    switch (s) {
        case ConeStatus::Full: return "full";
        case ConeStatus::NotFull: return "not-full";
        case ConeStatus::Degenerate: return "degenerate";
    }
    return "?";
}

nlohmann::json vec_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

nlohmann::json witness_json(const Certificate& c) {
    nlohmann::json w;
    if (c.status == CertStatus::SufficientMet) {
        // sparse positive-combination weights: entries above delta listed,
        // every other kept generator carries exactly delta
        nlohmann::json entries = nlohmann::json::array();
        for (int i = 0; i < c.cone.lambda.size(); ++i)
            if (c.cone.lambda[i] > c.cone.margin + 1e-12)
                entries.push_back({c.cone.kept[static_cast<std::size_t>(i)], c.cone.lambda[i]});
        w["kind"] = "positive-combination";
        w["delta"] = c.cone.margin;
        w["kept_generators"] = c.cone.kept.size();
        w["weights_above_delta"] = entries;
    } else if (c.status == CertStatus::Obstructed) {
        w["kind"] = "polar-covector";
        w["p"] = vec_json(c.polar.p);
        w["margin"] = c.polar.margin;
    } else if (c.cone.p.size() > 0) {
        w["kind"] = "separating-covector";
        w["p"] = vec_json(c.cone.p);
    } else {
        w = nullptr;
    }
    return w;
}

}  // namespace

nlohmann::json Certificate::to_json() const {
    nlohmann::json j;
    j["scenario"] = scenario;
    j["theorem"] = to_string(theorem);
    j["status"] = to_string(status);
    j["point"] = vec_json(point);
    j["tf"] = tf;
    j["witness"] = witness_json(*this);
    j["margins"] = {{"cone", cone.margin},
                    {"polar", polar.margin},
                    {"rigor_required", rigor_required},
                    {"lipschitz", lipschitz},
                    {"independence_min_sigma", independence_min_sigma}};
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& g : grids)
        grid.push_back({{"steps", g.steps},
                        {"cone_status", cone_status_name(g.cone_status)},
                        {"margin", g.margin},
                        {"rigor_required", g.rigor_req},
                        {"candidate", g.candidate}});
    j["grids"] = grid;
    j["final_steps"] = final_steps;
    j["notes"] = notes;
    if (!assumption_failures.empty()) {
        nlohmann::json fails = nlohmann::json::array();
        for (const auto& d : assumption_failures) fails.push_back({{"code", d.code}, {"message", d.message}});
        j["assumption_failures"] = fails;
    }
    j["timings"] = timing_seconds ? nlohmann::json(*timing_seconds) : nlohmann::json(nullptr);
    return j;
}

namespace {

struct ModePlan {
    double t1 = 0, t2 = 0;
    std::optional<ProjectionSpec> proj;
    bool through_tf = false;
    TheoremTag tag;
};

bool assumptions_gate(const SystemDef& sys, const ControlSet& u, Certificate& cert) {
    auto diags = validate(sys, u);
    if (!diags.empty()) {
        cert.status = CertStatus::AssumptionFailed;
        cert.assumption_failures = diags;
        for (const auto& d : diags) cert.notes.push_back(d.code + ": " + d.message);
        return false;
    }
    return true;
}

// Lipschitz estimate for tau -> transported control directions, from the
// derivative identity d/dtau (exp(-tau X0)_* X^k) = exp(-tau X0)_* [X0, X^k]:
// sampled sup of ||Head Psi(tau) [X0,X^k](xbar(tau))|| times the largest
// generator l1-norm.
double lipschitz_estimate(const SystemDef& sys, const TransportGrid& grid,
                          const Eigen::MatrixXd* head, const std::vector<double>& taus,
                          const std::vector<Eigen::VectorXd>& gens) {
    double worst = 0;
    std::vector<VectorField> brackets;
    for (const auto& xk : sys.controls) brackets.push_back(lie_bracket(sys.drift, xk));
    for (double tau : taus) {
        Eigen::VectorXd xbar = grid.state_at(tau);
        Eigen::MatrixXd psi = grid.psi_at(tau);
        for (const auto& b : brackets) {
            Eigen::VectorXd v = psi * b.eval(xbar);
            if (head) v = (*head) * v;
            worst = std::max(worst, v.norm());
        }
    }
    double gmax = 0;
    for (const auto& g : gens) gmax = std::max(gmax, g.lpNorm<1>());
    return worst * gmax;
}

std::vector<double> uniform_grid(double t1, double t2, int steps) {
    std::vector<double> taus;
    for (int j = 0; j < steps; ++j)
        taus.push_back(steps == 1 ? t1 : t1 + (t2 - t1) * j / (steps - 1));
    return taus;
}

}  // namespace

Certificate check_sufficient(const SystemDef& sys, const ControlSet& u, const Eigen::VectorXd& x,
                             SufficientMode mode, double tf, std::optional<ProjectionSpec> proj,
                             const RefineOptions& opt) {
    Certificate cert;
    cert.point = x;
    switch (mode) {
        case SufficientMode::GlobalOrbitwise: cert.theorem = TheoremTag::Thm21Global; break;
        case SufficientMode::LocalFixedTime: cert.theorem = TheoremTag::Thm23LocalI; break;
        case SufficientMode::LocalFixedTimeProj: cert.theorem = TheoremTag::Thm23LocalII; break;
        case SufficientMode::OnePeriod: cert.theorem = TheoremTag::Thm26OnePeriodI; break;
        case SufficientMode::OnePeriodProj: cert.theorem = TheoremTag::Thm26OnePeriodII; break;
    }
    if (!assumptions_gate(sys, u, cert)) return cert;

    bool per_period = mode == SufficientMode::GlobalOrbitwise ||
                      mode == SufficientMode::OnePeriod || mode == SufficientMode::OnePeriodProj;
    if (per_period) {
        try {
            tf = period(sys, x);
        } catch (const std::exception& e) {
            cert.status = CertStatus::AssumptionFailed;
            cert.assumption_failures.push_back({"period", e.what()});
            cert.notes.push_back(std::string("period: ") + e.what());
            return cert;
        }
    }
    cert.tf = tf;

    bool projected = mode == SufficientMode::GlobalOrbitwise ||
                     mode == SufficientMode::OnePeriodProj ||
                     mode == SufficientMode::LocalFixedTimeProj;
    if (projected && !proj) {
        if (!sys.product_form)
            throw std::invalid_argument("projected mode needs a projection for non-product systems");
        proj = ProjectionSpec::drop_angle(sys.d());
    }
    bool through_tf = mode == SufficientMode::LocalFixedTimeProj;

    ConeStatus prev = ConeStatus::Degenerate;
    bool have_prev = false;
    for (int steps = opt.initial_steps; steps <= opt.max_steps; steps = 2 * steps - 1) {
        TangentSample sample = sample_E(sys, u, x, 0.0, tf, steps,
                                        projected ? proj : std::nullopt, through_tf, tf, opt.tol);
        ConeVerdict v = cone_full(sample.vectors(), opt.delta_min);
        GridTrace trace{steps, v.status, v.margin, 0.0, v.status == ConeStatus::Full};
        cert.grids.push_back(trace);
        cert.cone = v;
        cert.final_steps = steps;
        if (have_prev && v.status == prev) {
            // verdict stable at two consecutive dyadic grids
            if (v.status == ConeStatus::Full) {
                cert.status = CertStatus::SufficientMet;
                if (mode == SufficientMode::GlobalOrbitwise)
                    cert.notes.push_back(
                        "condition certified at this point; it must hold at every orbit "
                        "for the global conclusion");
            } else {
                cert.status = CertStatus::Inconclusive;
                if (v.status == ConeStatus::Degenerate)
                    cert.notes.push_back(
                        "cone is a closed half-space or thinner without robust separation; "
                        "no sufficiency or obstruction applies");
                else
                    cert.notes.push_back(
                        "cone not full: the sufficient condition fails, and failing it "
                        "decides nothing (the conditions are not necessary)");
            }
            return cert;
        }
        prev = v.status;
        have_prev = true;
    }
    cert.status = CertStatus::Inconclusive;
    cert.notes.push_back("tau-grid verdict did not stabilize before the step cap");
    return cert;
}

Certificate check_obstruction(const SystemDef& sys, const ControlSet& u, const Eigen::VectorXd& x,
                              ObstructionMode mode, double tf, std::optional<ProjectionSpec> proj,
                              const RefineOptions& opt) {
    Certificate cert;
    cert.point = x;
    if (mode == ObstructionMode::Orbital) {
        cert.theorem = TheoremTag::Obstruction26Orbital;
    } else {
        cert.theorem = proj ? TheoremTag::Obstruction25II : TheoremTag::Obstruction25I;
    }
    if (!assumptions_gate(sys, u, cert)) return cert;

    if (mode == ObstructionMode::Orbital) {
        try {
            tf = period(sys, x);
        } catch (const std::exception& e) {
            cert.status = CertStatus::AssumptionFailed;
            cert.assumption_failures.push_back({"period", e.what()});
            return cert;
        }
        if (!proj) {
            if (!sys.product_form)
                throw std::invalid_argument("orbital obstruction needs a product form or projection");
            proj = ProjectionSpec::drop_angle(sys.d());
        }
    }
    cert.tf = tf;

    // independence uses the plain projection; the polar side of the
    // fixed-time projected obstruction composes with phi(tf,0)
    const Eigen::MatrixXd head =
        proj ? proj->matrix(sys.d()) : Eigen::MatrixXd::Identity(sys.d(), sys.d());
    const bool through_tf = mode == ObstructionMode::AlongTrajectory && proj.has_value();
    Eigen::MatrixXd head_polar = head;
    if (through_tf) {
        Trajectory base = flow(sys, x, tf, opt.tol);
        head_polar = head * transition(sys, base, 0.0, tf, opt.tol).mat;
    }
    const int n = static_cast<int>(head.rows());

    auto gens = u.generators();

    int consecutive = 0;
    CertStatus candidate = CertStatus::Inconclusive;
    for (int steps = opt.initial_steps; steps <= opt.max_steps; steps = 2 * steps - 1) {
        std::vector<double> taus = uniform_grid(0.0, tf, steps);
        TransportGrid grid(sys, x, 0.0, tf, opt.tol);

        // (ii) independence of the projected control fields along the orbit
        double min_sigma = std::numeric_limits<double>::infinity();
        for (double tau : taus) {
            Eigen::VectorXd xbar = grid.state_at(tau);
            std::vector<Eigen::VectorXd> cols;
            for (const auto& xk : sys.controls) cols.push_back(head * xk.eval(xbar));
            SpanRankResult sr = span_rank(cols, 1e-8);
            double smin = sr.singular_values.size() < sys.m()
                              ? 0.0
                              : sr.singular_values[sys.m() - 1];
            min_sigma = std::min(min_sigma, smin);
            if (sr.rank < sys.m()) {
                cert.status = CertStatus::AssumptionFailed;
                cert.independence_min_sigma = smin;
                // identify the (nearly) vanishing or dependent field
                int small_field = 0;
                double small_norm = std::numeric_limits<double>::infinity();
                for (int k = 0; k < sys.m(); ++k) {
                    double nk = cols[static_cast<std::size_t>(k)].norm();
                    if (nk < small_norm) {
                        small_norm = nk;
                        small_field = k;
                    }
                }
                std::ostringstream os;
                os << "independence check failed at t = " << tau << ": projected control fields "
                   << "have rank " << sr.rank << " < m = " << sys.m() << " (field "
                   << (small_field + 1) << " has norm " << small_norm << ")";
                cert.assumption_failures.push_back({"independence", os.str()});
                cert.notes.push_back(os.str());
                cert.final_steps = steps;
                return cert;
            }
        }
        cert.independence_min_sigma = min_sigma;

        // (i) polar-cone interior with a rigor margin covering the tau grid:
        // delta ||g|| >= ||p||_2 L h/2 suffices between samples, so require
        // delta >= sqrt(n) L h / (2 min ||g||).
        TangentSample sample =
            sample_E(sys, u, x, 0.0, tf, steps, proj, through_tf, tf, opt.tol);
        auto vectors = sample.vectors();
        double min_norm = std::numeric_limits<double>::infinity();
        for (const auto& v : vectors) {
            double nv = v.norm();
            if (nv >= 1e-12) min_norm = std::min(min_norm, nv);
        }
        if (!std::isfinite(min_norm)) min_norm = 1.0;
        double lip = lipschitz_estimate(sys, grid, proj ? &head_polar : nullptr, taus, gens);
        double h = steps > 1 ? std::fabs(tf) / (steps - 1) : std::fabs(tf);
        double rigor = std::sqrt(static_cast<double>(n)) * lip * h / (2 * min_norm);
        cert.lipschitz = lip;
        cert.rigor_required = rigor;

        PolarInterior pi = polar_interior(vectors, rigor);
        cert.polar = pi;
        cert.final_steps = steps;
        GridTrace trace{steps,
                        pi.kind == PolarInterior::Kind::Nonempty ? ConeStatus::NotFull
                                                                 : ConeStatus::Degenerate,
                        pi.margin, rigor, pi.kind == PolarInterior::Kind::Nonempty};
        cert.grids.push_back(trace);

        // A separation below the rigor requirement is undecided: refinement
        // shrinks the requirement (h -> h/2) while the separation margin is
        // grid-stable, so keep refining instead of voting.
        bool separated = pi.kind == PolarInterior::Kind::Nonempty;
        bool undecided = !separated && pi.margin > rigor * 0.01 && pi.margin > 1e-9;
        if (undecided) {
            consecutive = 0;
            candidate = CertStatus::Inconclusive;
            continue;
        }
        CertStatus now = separated ? CertStatus::Obstructed : CertStatus::Inconclusive;
        if (now == candidate) {
            if (++consecutive >= 2) {
                cert.status = now;
                if (now == CertStatus::Inconclusive)
                    cert.notes.push_back(
                        "polar cone has no robust interior; the obstruction does not apply");
                return cert;
            }
        } else {
            candidate = now;
            consecutive = 1;
        }
    }
    cert.status = CertStatus::Inconclusive;
    if (candidate == CertStatus::Obstructed || consecutive == 0)
        cert.notes.push_back(
            "separation margin stayed below the rigor requirement up to the step cap");
    else
        cert.notes.push_back("obstruction verdict did not stabilize before the step cap");
    return cert;
}

namespace {

std::string f0_label(int j, int k) {
    if (j == 0) return "X" + std::to_string(k);
    std::string s = "X" + std::to_string(k);
    for (int i = 0; i < j; ++i) s = "[X0," + s + "]";
    return s;
}

bool field_is_zero(const VectorField& v) {
    for (const auto& c : v.components)
        if (!c.is_zero()) return false;
    return true;
}

}  // namespace

BracketFamilyReport bracket_family(const SystemDef& sys, BracketFamily family, int depth,
                                   const Eigen::VectorXd& x) {
    if (depth > 6) throw std::invalid_argument("bracket_family: depth capped at 6 (expression swell)");
    if (depth < 1) throw std::invalid_argument("bracket_family: depth must be >= 1");
    BracketFamilyReport rep;
    rep.family = family;
    rep.depth = depth;

    std::vector<VectorField> fields;
    std::vector<std::string> labels;

    if (family == BracketFamily::F0) {
        for (int k = 0; k < sys.m(); ++k) {
            VectorField cur = sys.controls[static_cast<std::size_t>(k)];
            for (int j = 0; j <= depth; ++j) {
                if (!field_is_zero(cur)) {
                    fields.push_back(cur);
                    labels.push_back(f0_label(j, k + 1));
                }
                if (j < depth) cur = lie_bracket(sys.drift, cur);
            }
        }
    } else {
        // right-nested words (i1,...,ik): [X_{ik}, [... [X_{i2}, X_{i1}] ...]]
        // with i1 < i2 (antisymmetry of the innermost pair)
        auto field_of = [&](int i) -> const VectorField& {
            return i == 0 ? sys.drift : sys.controls[static_cast<std::size_t>(i - 1)];
        };
        struct WordEntry {
            VectorField f;
            std::string label;
        };
        std::vector<WordEntry> current;
        for (int i = 0; i <= sys.m(); ++i) {
            current.push_back({field_of(i), "X" + std::to_string(i)});
            fields.push_back(current.back().f);
            labels.push_back(current.back().label);
        }
        std::vector<WordEntry> frontier = current;
        for (int len = 2; len <= depth; ++len) {
            std::vector<WordEntry> next;
            for (const auto& w : frontier) {
                for (int i = 0; i <= sys.m(); ++i) {
                    if (len == 2) {
                        // innermost pair: only i > i1, label [Xi, Xi1]
                        int i1 = std::stoi(w.label.substr(1));
                        if (i <= i1) continue;
                    }
                    VectorField b = lie_bracket(field_of(i), w.f);
                    if (field_is_zero(b)) continue;
                    std::string label = "[X" + std::to_string(i) + "," + w.label + "]";
                    next.push_back({b, label});
                    fields.push_back(b);
                    labels.push_back(label);
                }
            }
            frontier = std::move(next);
        }
    }

    std::vector<Eigen::VectorXd> vals;
    for (const auto& f : fields) vals.push_back(f.eval(x));
    rep.labels = labels;
    SpanRankResult sr = span_rank(vals, 1e-8);
    rep.rank = sr.rank;

    // greedy independent subset for the basis labels
    Eigen::MatrixXd basis(sys.d(), 0);
    for (std::size_t i = 0; i < vals.size() && basis.cols() < sr.rank; ++i) {
        Eigen::VectorXd r = vals[i];
        if (basis.cols() > 0) r -= basis * (basis.transpose() * vals[i]);
        if (r.norm() > 1e-8 * std::max(1.0, vals[i].norm())) {
            r.normalize();
            basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
            basis.col(basis.cols() - 1) = r;
            rep.basis_labels.push_back(labels[i]);
        }
    }
    return rep;
}

SpanConsistencyReport span_consistency(const SystemDef& sys, const ControlSet& u,
                                       const Eigen::VectorXd& x, double t1, double t2, int depth,
                                       int steps) {
    SpanConsistencyReport rep;
    TangentSample s = sample_E(sys, u, x, t1, t2, steps);
    rep.rank_sampled = span_rank(s.vectors(), 1e-8).rank;
    BracketFamilyReport f0 = bracket_family(sys, BracketFamily::F0, depth, x);
    rep.rank_f0 = f0.rank;
    rep.f0_basis = f0.basis_labels;
    rep.agree = rep.rank_sampled == rep.rank_f0;
    rep.note = rep.agree ? "sampled span matches the iterated-bracket span"
                         : "span mismatch: indicates a sampling or bracket defect";
    return rep;
}

Certificate bonnard_check(const SystemDef& sys, const ControlSet& u, int depth,
                          const std::vector<Eigen::VectorXd>& points) {
    Certificate cert;
    cert.theorem = TheoremTag::Bonnard18;
    if (!points.empty()) cert.point = points.front();
    if (!assumptions_gate(sys, u, cert)) return cert;

    bool ok = true;
    if (!sys.poisson_stable_asserted()) {
        ok = false;
        cert.notes.push_back("(i) Poisson stability of the drift is not asserted");
    }
    for (const auto& x : points) {
        BracketFamilyReport rep = bracket_family(sys, BracketFamily::Larc, depth, x);
        if (rep.rank < sys.d()) {
            ok = false;
            std::ostringstream os;
            os << "(ii) bracket rank " << rep.rank << " < d = " << sys.d() << " at a query point";
            cert.notes.push_back(os.str());
            break;
        }
    }
    ConeVerdict hull = cone_full(u.generators());
    cert.cone = hull;
    if (hull.status != ConeStatus::Full) {
        ok = false;
        cert.notes.push_back("(iii) 0 is not interior to conv U");
    }
    cert.status = ok ? CertStatus::SufficientMet : CertStatus::Inconclusive;
    if (ok) cert.notes.push_back("Poisson stability, bracket generation and interior hull all hold");
    return cert;
}

}  // namespace ccert
