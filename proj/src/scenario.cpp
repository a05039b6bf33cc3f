#include "ccert/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

namespace ccert {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

double CounterRng::uniform() {
    std::uint64_t x = splitmix(splitmix(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1))) + counter++);
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

std::string ReachCloud::to_csv() const {
    std::ostringstream os;
    os << "sample";
    int dim = endpoints.empty() ? 0 : static_cast<int>(endpoints.front().size());
    for (int i = 0; i < dim; ++i) os << ",coord" << i;
    os << "\n";
    for (std::size_t s = 0; s < endpoints.size(); ++s) {
        os << s;
        for (int i = 0; i < dim; ++i) os << "," << fmt17(endpoints[s][i]);
        os << "\n";
    }
    return os.str();
}

Eigen::VectorXd integrate_piecewise(const SystemDef& sys, const Eigen::VectorXd& x0,
                                    const std::vector<std::pair<double, Eigen::VectorXd>>& schedule,
                                    double tol) {
    Eigen::VectorXd x = x0;
    for (const auto& [dt, u] : schedule) {
        if (dt == 0) continue;
        Trajectory t = flow(sys, x, dt, tol, &u);
        x = t.end();
    }
    return x;
}

ReachCloud mc_reach(const SystemDef& sys, const ControlSet& u, const Eigen::VectorXd& x0,
                    double horizon, int samples, std::uint64_t seed, int intervals_per_period,
                    const std::optional<ProjectionSpec>& proj, double tol) {
    if (samples < 1) throw std::invalid_argument("mc_reach: samples must be >= 1");
    if (intervals_per_period < 1)
        throw std::invalid_argument("mc_reach: intervals_per_period must be >= 1");
    ReachCloud cloud;
    cloud.start = x0;
    cloud.horizon = horizon;
    const auto gens = u.generators();
    const int ng = static_cast<int>(gens.size());
    const int m = sys.m();

    double t_period;
    try {
        t_period = period(sys, x0);
    } catch (const std::exception&) {
        t_period = horizon;  // no period available: one "period" = the horizon
    }
    int intervals = std::max(1, static_cast<int>(std::ceil(
                                    intervals_per_period * std::fabs(horizon) / t_period)));
    cloud.dt = horizon / intervals;

    struct Slot {
        bool ok = false;
        Eigen::VectorXd endpoint;
        Eigen::MatrixXd controls;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(samples));

    auto run_sample = [&](int s) {
        CounterRng rng{seed, static_cast<std::uint64_t>(s), 0};
        Eigen::MatrixXd controls(intervals, m);
        std::vector<std::pair<double, Eigen::VectorXd>> schedule;
        // Stratified draws, all exactly admissible (each interval value is a
        // convex combination of generators). Pure per-interval averaging
        // concentrates near the mean drift; the single-generator strata keep
        // the cloud's hull close to the true reachable set's extreme rays.
        int stratum = s % 4;
        int frozen = static_cast<int>(rng.uniform() * ng);
        if (frozen >= ng) frozen = ng - 1;
        for (int k = 0; k < intervals; ++k) {
            Eigen::VectorXd uk = Eigen::VectorXd::Zero(m);
            if (stratum == 2) {
                // one random generator held for the whole horizon
                uk = gens[static_cast<std::size_t>(frozen)];
            } else if (stratum == 3) {
                // fresh random generator per interval
                int g = static_cast<int>(rng.uniform() * ng);
                if (g >= ng) g = ng - 1;
                uk = gens[static_cast<std::size_t>(g)];
            } else {
                // random convex combination per interval
                Eigen::VectorXd w(ng);
                double tot = 0;
                for (int g = 0; g < ng; ++g) {
                    w[g] = -std::log(std::max(rng.uniform(), 1e-300));
                    tot += w[g];
                }
                for (int g = 0; g < ng; ++g)
                    uk += (w[g] / tot) * gens[static_cast<std::size_t>(g)];
            }
            controls.row(k) = uk.transpose();
            schedule.push_back({cloud.dt, uk});
        }
        try {
            Slot& slot = slots[static_cast<std::size_t>(s)];
            slot.endpoint = integrate_piecewise(sys, x0, schedule, tol);
            slot.controls = std::move(controls);
            slot.ok = true;
        } catch (const IntegrationError&) {
            // skipped; counted after the merge
        }
    };

    // CCERT_THREADS workers; results land in per-sample slots and are merged
    // in sample-index order, so the output is schedule-independent
    int threads = 1;
    if (const char* env = std::getenv("CCERT_THREADS")) threads = std::max(1, std::atoi(env));
    threads = std::min(threads, samples);
    if (threads <= 1) {
        for (int s = 0; s < samples; ++s) run_sample(s);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                for (int s = w; s < samples; s += threads) run_sample(s);
            });
        for (auto& th : pool) th.join();
    }
    for (auto& slot : slots) {
        if (!slot.ok) {
            ++cloud.skipped;
            continue;
        }
        cloud.full_endpoints.push_back(slot.endpoint);
        cloud.endpoints.push_back(proj ? proj->apply(slot.endpoint) : slot.endpoint);
        cloud.controls.push_back(std::move(slot.controls));
    }

    // hull verdict: start strictly inside conv(endpoints) iff the shifted
    // positive-combination LP has positive margin and full rank
    if (!cloud.endpoints.empty()) {
        Eigen::VectorXd start_p = proj ? proj->apply(x0) : x0;
        std::vector<Eigen::VectorXd> shifted;
        shifted.reserve(cloud.endpoints.size());
        for (const auto& e : cloud.endpoints) shifted.push_back(e - start_p);
        ConeVerdict v = cone_full(shifted);
        cloud.hull_margin = v.margin;
        switch (v.status) {
            case ConeStatus::Full: cloud.hull = ReachCloud::Hull::Inside; break;
            case ConeStatus::NotFull: cloud.hull = ReachCloud::Hull::Outside; break;
            case ConeStatus::Degenerate: cloud.hull = ReachCloud::Hull::Boundary; break;
        }
    }
    return cloud;
}

// ---------------------------------------------------------------------------
// builtins and config ingestion

std::vector<std::string> builtin_names() { return {"ex48", "ex52", "remark28", "toy"}; }

namespace {

SystemDef sector_builtin(double theta) {
    std::vector<std::string> coords = {"I1", "I2", "I3", "phi"};
    std::string ct = fmt17(std::cos(theta)), st = fmt17(std::sin(theta));
    VectorField f1 =
        VectorField::parse(coords, {ct + "*cos(phi)", ct + "*sin(phi)", st, "0"});
    VectorField f2 =
        VectorField::parse(coords, {"-" + st + "*cos(phi)", "-" + st + "*sin(phi)", ct, "0"});
    return SystemDef::product(coords, Expr::constant(1.0), {f1, f2});
}

SystemDef ex52_builtin() {
    std::vector<std::string> coords = {"I1", "I2", "I3", "phi"};
    VectorField x1 = VectorField::parse(
        coords, {"cos(phi)", "sin(phi)", "-cos(phi)*I2/2 + sin(phi)*I1/2", "0"});
    return SystemDef::product(coords, Expr::constant(1.0), {x1});
}

SystemDef remark28_builtin() {
    std::vector<std::string> coords = {"I1", "I2", "phi"};
    VectorField f1 = VectorField::parse(coords, {"sin(phi)", "1", "0"});
    VectorField f2 = VectorField::parse(coords, {"0", "I1", "0"});
    return SystemDef::product(coords, Expr::constant(1.0), {f1, f2});
}

SystemDef toy_builtin() {
    std::vector<std::string> coords = {"I", "phi"};
    return SystemDef::product(coords, Expr::constant(1.0),
                              {VectorField::parse(coords, {"1", "0"})});
}

Eigen::VectorXd vec_from_json(const nlohmann::json& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    Eigen::Index i = 0;
    for (const auto& x : a) v[i++] = x.get<double>();
    return v;
}

}  // namespace

ControlSet control_set_from_json(const nlohmann::json& spec) {
    std::string type = spec.at("type").get<std::string>();
    if (type == "interval")
        return ControlSet::interval(spec.at("lo").get<double>(), spec.at("hi").get<double>());
    if (type == "box") {
        std::vector<std::pair<double, double>> bounds;
        for (const auto& b : spec.at("bounds"))
            bounds.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
        return ControlSet::box(bounds);
    }
    if (type == "polytope") {
        std::vector<Eigen::VectorXd> verts;
        for (const auto& v : spec.at("vertices")) verts.push_back(vec_from_json(v));
        return ControlSet::polytope(verts);
    }
    if (type == "disk_sector")
        return ControlSet::disk_sector(spec.at("half_angle").get<double>(),
                                       spec.value("count", 64));
    if (type == "scaled")
        return ControlSet::scaled(spec.at("epsilon").get<double>(),
                                  control_set_from_json(spec.at("inner")));
    if (type == "product") {
        std::vector<ControlSet> factors;
        for (const auto& f : spec.at("factors")) factors.push_back(control_set_from_json(f));
        return ControlSet::product(factors);
    }
    throw std::invalid_argument("unknown control_set type '" + type + "'");
}

Scenario make_builtin(const std::string& name, const nlohmann::json& params_in) {
    nlohmann::json params = params_in.is_null() ? nlohmann::json::object() : params_in;
    Scenario s;
    s.name = name;
    if (name == "ex48") {
        double theta = params.value("theta", 0.3);
        double alpha = params.value("alpha", 0.5);
        int count = params.value("count", 64);
        s.sys = sector_builtin(theta);
        s.u = ControlSet::disk_sector(alpha, count);
        s.points = {Eigen::Vector4d(0, 0, 0, 0)};
        s.checks = {{"one_period_proj", 0}, {"obstruction_orbital", 0}};
        s.name = "ex48(theta=" + fmt_short(theta) + ",alpha=" + fmt_short(alpha) + ")";
    } else if (name == "ex52") {
        double lo = params.value("u_lo", 0.0), hi = params.value("u_hi", 1.0);
        s.sys = ex52_builtin();
        s.u = ControlSet::interval(lo, hi);
        s.points = {Eigen::Vector4d(0.2, -0.1, 0.0, 0.0)};
        s.checks = {{"one_period_proj", 0},
                    {"obstruction_orbital", 0},
                    {"bonnard", 0},
                    {"span_consistency", 0}};
        s.name = "ex52(U=[" + fmt_short(lo) + "," + fmt_short(hi) + "])";
    } else if (name == "remark28") {
        s.sys = remark28_builtin();
        s.u = ControlSet::box({{0, 1}, {0, 1}});
        s.points = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0.1, 0, 0),
                    Eigen::Vector3d(-0.1, 0, 0)};
        s.checks = {{"obstruction_orbital", 0}};
    } else if (name == "toy") {
        s.sys = toy_builtin();
        s.u = ControlSet::interval(0, 1);
        s.points = {Eigen::Vector2d(0, 0)};
        s.checks = {{"bonnard", 0}, {"obstruction_orbital", 0}};
    } else {
        throw std::invalid_argument("unknown builtin '" + name + "'");
    }
    return s;
}

Scenario scenario_from_json(const nlohmann::json& config) {
    Scenario s;
    if (config.contains("builtin"))
        s = make_builtin(config.at("builtin").get<std::string>(),
                         config.value("params", nlohmann::json::object()));
    if (config.contains("name")) s.name = config.at("name").get<std::string>();

    if (config.contains("coords")) {
        std::vector<std::string> coords = config.at("coords").get<std::vector<std::string>>();
        std::vector<VectorField> controls;
        for (const auto& ctl : config.at("controls"))
            controls.push_back(VectorField::parse(coords, ctl.get<std::vector<std::string>>()));
        if (config.contains("omega")) {
            Expr omega = parse_expr(config.at("omega").get<std::string>(), coords);
            s.sys = SystemDef::product(coords, omega, std::move(controls));
        } else if (config.contains("drift")) {
            VectorField drift =
                VectorField::parse(coords, config.at("drift").get<std::vector<std::string>>());
            s.sys = SystemDef::general(coords, std::move(drift), std::move(controls));
        } else {
            throw std::invalid_argument("config needs either omega (product form) or drift");
        }
        if (config.contains("period")) s.sys.declared_period = config.at("period").get<double>();
        s.sys.poisson_stable = config.value("poisson_stable", false);
    }
    if (config.contains("control_set")) s.u = control_set_from_json(config.at("control_set"));
    if (config.contains("projection")) {
        ProjectionSpec p;
        p.kept = config.at("projection").get<std::vector<int>>();
        s.projection = p;
    }
    if (config.contains("point")) s.points = {vec_from_json(config.at("point"))};
    if (config.contains("points")) {
        s.points.clear();
        for (const auto& p : config.at("points")) s.points.push_back(vec_from_json(p));
    }
    if (config.contains("checks")) {
        s.checks.clear();
        double tf = config.value("tf", 0.0);
        for (const auto& c : config.at("checks")) {
            if (c.is_string()) s.checks.push_back({c.get<std::string>(), tf});
            else s.checks.push_back({c.at("name").get<std::string>(), c.value("tf", tf)});
        }
    }
    s.bracket_depth = config.value("bracket_depth", 3);
    if (config.contains("mc")) {
        const auto& mc = config.at("mc");
        s.mc.samples = mc.value("samples", 0);
        s.mc.periods = mc.value("periods", 1.0);
        s.mc.seed = mc.value("seed", std::uint64_t{1});
        s.mc.intervals_per_period = mc.value("intervals_per_period", 16);
    }
    if (config.contains("output_dir")) s.output_dir = config.at("output_dir").get<std::string>();
    if (config.contains("refine")) {
        const auto& r = config.at("refine");
        s.refine.initial_steps = r.value("initial_steps", s.refine.initial_steps);
        s.refine.max_steps = r.value("max_steps", s.refine.max_steps);
        s.refine.tol = r.value("tol", s.refine.tol);
    }
    if (s.points.empty()) throw std::invalid_argument("config provides no query point");
    if (s.checks.empty() && s.mc.samples == 0)
        throw std::invalid_argument("config requests neither checks nor Monte-Carlo runs");
    return s;
}

namespace {

Certificate run_check(const Scenario& s, const CheckRequest& req, const Eigen::VectorXd& x) {
    const auto& proj = s.projection;
    if (req.name == "global")
        return check_sufficient(s.sys, s.u, x, SufficientMode::GlobalOrbitwise, 0, proj, s.refine);
    if (req.name == "one_period")
        return check_sufficient(s.sys, s.u, x, SufficientMode::OnePeriod, 0, proj, s.refine);
    if (req.name == "one_period_proj")
        return check_sufficient(s.sys, s.u, x, SufficientMode::OnePeriodProj, 0, proj, s.refine);
    if (req.name == "local")
        return check_sufficient(s.sys, s.u, x, SufficientMode::LocalFixedTime, req.tf, proj,
                                s.refine);
    if (req.name == "local_proj")
        return check_sufficient(s.sys, s.u, x, SufficientMode::LocalFixedTimeProj, req.tf, proj,
                                s.refine);
    if (req.name == "obstruction_orbital")
        return check_obstruction(s.sys, s.u, x, ObstructionMode::Orbital, 0, proj, s.refine);
    if (req.name == "obstruction_along")
        return check_obstruction(s.sys, s.u, x, ObstructionMode::AlongTrajectory, req.tf, {},
                                 s.refine);
    if (req.name == "obstruction_along_proj")
        return check_obstruction(s.sys, s.u, x, ObstructionMode::AlongTrajectory, req.tf,
                                 proj ? proj : std::optional<ProjectionSpec>(
                                                   ProjectionSpec::drop_angle(s.sys.d())),
                                 s.refine);
    if (req.name == "bonnard") return bonnard_check(s.sys, s.u, s.bracket_depth, {x});
    throw std::invalid_argument("unknown check '" + req.name + "'");
}

}  // namespace

int run_scenario(const Scenario& s, std::ostream& out) {
    std::filesystem::create_directories(s.output_dir);
    nlohmann::json certs = nlohmann::json::array();
    out << "scenario: " << s.name << "\n";
    out << "  control set: " << s.u.describe() << "\n";

    for (std::size_t pi = 0; pi < s.points.size(); ++pi) {
        const Eigen::VectorXd& x = s.points[pi];
        for (const auto& req : s.checks) {
            if (req.name == "span_consistency") {
                double t2;
                try {
                    t2 = period(s.sys, x);
                } catch (const std::exception&) {
                    t2 = req.tf > 0 ? req.tf : 1.0;
                }
                SpanConsistencyReport rep =
                    span_consistency(s.sys, s.u, x, 0, t2, s.bracket_depth);
                out << "  point " << pi << " span_consistency: rank_sampled=" << rep.rank_sampled
                    << " rank_F0=" << rep.rank_f0 << (rep.agree ? " (agree)" : " (MISMATCH)")
                    << "\n";
                nlohmann::json j;
                j["scenario"] = s.name;
                j["check"] = "span_consistency";
                j["point"] = pi;
                j["rank_sampled"] = rep.rank_sampled;
                j["rank_f0"] = rep.rank_f0;
                j["agree"] = rep.agree;
                j["f0_basis"] = rep.f0_basis;
                certs.push_back(j);
                continue;
            }
            Certificate c = run_check(s, req, x);
            c.scenario = s.name;
            out << "  point " << pi << " " << req.name << ": " << to_string(c.status);
            if (c.status == CertStatus::Obstructed)
                out << " (polar margin " << c.polar.margin << " >= required "
                    << c.rigor_required << ")";
            if (c.status == CertStatus::SufficientMet)
                out << " (cone margin " << c.cone.margin << ")";
            out << "\n";
            nlohmann::json j = c.to_json();
            j["check"] = req.name;
            j["point_index"] = pi;
            certs.push_back(j);
        }

        if (s.mc.samples > 0) {
            double horizon = s.mc.periods;
            try {
                horizon = s.mc.periods * period(s.sys, x);
            } catch (const std::exception&) {
                // fall back to "periods" read as an absolute horizon
            }
            std::optional<ProjectionSpec> proj = s.projection;
            if (!proj && s.sys.product_form) proj = ProjectionSpec::drop_angle(s.sys.d());
            ReachCloud cloud = mc_reach(s.sys, s.u, x, horizon, s.mc.samples, s.mc.seed,
                                        s.mc.intervals_per_period, proj);
            const char* hull = cloud.hull == ReachCloud::Hull::Inside
                                   ? "inside"
                                   : (cloud.hull == ReachCloud::Hull::Outside ? "outside"
                                                                              : "boundary");
            out << "  point " << pi << " mc_reach: " << cloud.endpoints.size() << " endpoints, "
                << "start " << hull << " the projected hull (margin " << cloud.hull_margin
                << ")\n";
            std::string fname = "cloud_" + std::to_string(pi) + ".csv";
            std::ofstream f(s.output_dir + "/" + fname, std::ios::binary);
            f << cloud.to_csv();
            nlohmann::json j;
            j["scenario"] = s.name;
            j["check"] = "mc_reach";
            j["point_index"] = pi;
            j["samples"] = s.mc.samples;
            j["skipped"] = cloud.skipped;
            j["hull"] = hull;
            j["hull_margin"] = cloud.hull_margin;
            j["csv"] = fname;
            certs.push_back(j);
        }
    }

    std::ofstream f(s.output_dir + "/certificates.json", std::ios::binary);
    f << certs.dump(2) << "\n";
    out << "  wrote " << s.output_dir << "/certificates.json\n";
    return 0;
}

// ---------------------------------------------------------------------------
// area property on [0, 2pi]

AreaTestStats area_property_test(int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("area_property_test: trials must be >= 1");
    constexpr int kIntervals = 24;
    AreaTestStats stats;
    stats.trials = trials;
    stats.min_gain = std::numeric_limits<double>::infinity();

    // c_k = integral of e^{is} over the k-th interval
    std::array<std::array<double, 2>, kIntervals> c;
    for (int k = 0; k < kIntervals; ++k) {
        double a = 2 * kPi * k / kIntervals, b = 2 * kPi * (k + 1) / kIntervals;
        c[static_cast<std::size_t>(k)] = {std::sin(b) - std::sin(a),
                                          -(std::cos(b) - std::cos(a))};
    }
    // rows of the closure constraint C u = 0
    Eigen::MatrixXd cm(2, kIntervals);
    for (int k = 0; k < kIntervals; ++k) {
        cm(0, k) = c[static_cast<std::size_t>(k)][0];
        cm(1, k) = c[static_cast<std::size_t>(k)][1];
    }
    Eigen::Matrix2d gram_inv = (cm * cm.transpose()).inverse();

    for (int trial = 0; trial < trials; ++trial) {
        CounterRng rng{seed, static_cast<std::uint64_t>(trial), 0};
        Eigen::VectorXd u(kIntervals);
        for (int k = 0; k < kIntervals; ++k) u[k] = rng.uniform();
        // alternating projection onto {C u = 0} and the nonnegative orthant
        bool ok = false;
        for (int it = 0; it < 500; ++it) {
            u -= cm.transpose() * (gram_inv * (cm * u));
            for (int k = 0; k < kIntervals; ++k) u[k] = std::max(u[k], 0.0);
            if ((cm * u).lpNorm<Eigen::Infinity>() <= 1e-8) {
                ok = true;
                break;
            }
        }
        if (!ok || u.lpNorm<Eigen::Infinity>() < 1e-6) continue;  // failed to close
        ++stats.closed;
        stats.max_residual = std::max(stats.max_residual, (cm * u).lpNorm<Eigen::Infinity>());

        // I3 gain = (1/2) iint u(s)u(r) sin(s-r): exact pairwise formula
        double acc = 0;
        for (int j = 0; j < kIntervals; ++j) {
            double aj = 2 * kPi * j / kIntervals, bj = 2 * kPi * (j + 1) / kIntervals;
            double lj = bj - aj;
            acc += u[j] * u[j] * (lj - std::sin(lj));
            for (int k = j + 1; k < kIntervals; ++k) {
                double ak = 2 * kPi * k / kIntervals, bk = 2 * kPi * (k + 1) / kIntervals;
                acc += u[j] * u[k] *
                       (std::sin(bk - bj) - std::sin(ak - bj) - std::sin(bk - aj) +
                        std::sin(ak - aj));
            }
        }
        double gain = acc / 2;
        stats.min_gain = std::min(stats.min_gain, gain);
        if (gain < -1e-8) ++stats.violations;
    }
    return stats;
}

}  // namespace ccert
