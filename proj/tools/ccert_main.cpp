#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ccert/scenario.hpp"

using namespace ccert;

namespace {

int cmd_certify(const std::string& config_path, const std::string& out_dir, bool timings,
                bool mc_only) {
    std::ifstream f(config_path);
    if (!f) {
        std::cerr << "error: cannot open config file '" << config_path << "'\n";
        return 1;
    }
    nlohmann::json config;
    try {
        f >> config;
    } catch (const std::exception& e) {
        std::cerr << "error: invalid JSON in '" << config_path << "': " << e.what() << "\n";
        return 1;
    }
    try {
        Scenario s = scenario_from_json(config);
        if (!out_dir.empty()) s.output_dir = out_dir;
        s.timings = timings;
        if (mc_only) {
            s.checks.clear();
            if (s.mc.samples == 0) s.mc.samples = 1000;
        }
        return run_scenario(s, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certification toolkit for controllability of affine control systems "
                 "with constrained controls"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    bool timings = false;

    auto* certify = app.add_subcommand("certify", "run the checks requested by a config file");
    certify->add_option("config", config_path, "JSON scenario config")->required();
    certify->add_option("--out", out_dir, "output directory (overrides config)");
    certify->add_flag("--timings", timings, "record wall-clock timings in certificates");

    auto* reach = app.add_subcommand("reach", "Monte-Carlo reachable cloud only");
    reach->add_option("config", config_path, "JSON scenario config")->required();
    reach->add_option("--out", out_dir, "output directory (overrides config)");

    double eps2 = 1.0, eps_cap = 1.0;
    bool as_json = false;
    auto* gold = app.add_subcommand("goldfish",
                                    "closed-curve reproduction with the derived schedule");
    gold->add_option("--eps2", eps2, "plateau scale (0 < eps2 < eps)");
    gold->add_option("--eps", eps_cap, "control bound (eps <= 1)");
    gold->add_flag("--json", as_json, "print the full JSON report");

    int trials = 200;
    std::uint64_t seed = 1;
    auto* area = app.add_subcommand("area-test",
                                    "one-period swept-area property on random closed loops");
    area->add_option("--trials", trials, "number of random controls");
    area->add_option("--seed", seed, "RNG seed");

    auto* list = app.add_subcommand("list-builtins", "list built-in scenarios");

    CLI11_PARSE(app, argc, argv);

    if (certify->parsed()) return cmd_certify(config_path, out_dir, timings, false);
    if (reach->parsed()) return cmd_certify(config_path, out_dir, false, true);

    if (gold->parsed()) {
        try {
            GoldfishReport rep = goldfish(eps2, eps_cap);
            if (as_json) {
                std::cout << rep.to_json().dump(2) << "\n";
            } else {
                std::printf("eps1 = %.12g  eps3 = %.12g  eps2 = %.12g (eps1/eps2 = %.12g)\n",
                            rep.eps1, rep.eps3, rep.eps2, rep.eps1 / rep.eps2);
                std::printf("closure |I(10pi/3) - I(0)|: closed-form %.3e, numeric %.3e\n",
                            rep.closure_closed_form, rep.closure_numeric);
                std::printf("max exact-vs-numeric state gap at 16 checkpoints: %.3e\n",
                            rep.max_checkpoint_gap);
                for (const auto& l : rep.aux_loops)
                    std::printf("one-period loop at u = %.6g: I3 gain %.6g\n", l.level,
                                l.i3_gain);
            }
            return 0;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }

    if (area->parsed()) {
        try {
            AreaTestStats st = area_property_test(trials, seed);
            std::printf("trials: %d, closed: %d, violations: %d\n", st.trials, st.closed,
                        st.violations);
            std::printf("min I3 gain: %.3e, max closure residual: %.3e\n", st.min_gain,
                        st.max_residual);
            return st.violations == 0 ? 0 : 1;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }

    if (list->parsed()) {
        for (const auto& n : builtin_names()) std::cout << n << "\n";
        return 0;
    }
    return 0;
}
