#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kamlab/aubry.hpp"
#include "kamlab/errors.hpp"
#include "kamlab/gevrey.hpp"
#include "kamlab/lab.hpp"
#include "kamlab/twist.hpp"

namespace {

using nlohmann::ordered_json;

ordered_json parse_value(const std::string& s) {
    ordered_json v = ordered_json::parse(s, nullptr, false);
    if (v.is_discarded()) return ordered_json(s);
    return v;
}

void apply_overrides(ordered_json& params, const std::vector<std::string>& overrides) {
    for (const auto& ov : overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos) throw kamlab::Error("override must be key=value: " + ov);
        params[ov.substr(0, eq)] = parse_value(ov.substr(eq + 1));
    }
}

int run_experiment(const std::string& name, const std::string& config_path,
                   const std::vector<std::string>& overrides, const std::string& out,
                   long seed_flag, bool seed_set) {
    kamlab::lab::Config cfg;
    cfg.experiment = name;
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw kamlab::Error("cannot open config file: " + config_path);
        ordered_json j = ordered_json::parse(f);
        cfg = kamlab::lab::Config::from_json(j);
        if (cfg.experiment != name)
            throw kamlab::Error("config is for experiment '" + cfg.experiment + "'");
    }
    apply_overrides(cfg.params, overrides);
    if (seed_set) cfg.seed = static_cast<std::uint64_t>(seed_flag);
    kamlab::lab::RunResult r = kamlab::lab::run(cfg);
    kamlab::lab::write_outputs(r, out);
    std::cout << (r.pass ? "PASS " : "FAIL ") << name << " -> " << out << "/report.json\n";
    return r.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kamlab: invariant-circle destruction/persistence laboratory"};
    app.require_subcommand(1);

    std::string config_path, out = "out";
    std::vector<std::string> overrides;
    long seed = 1;

    std::vector<CLI::App*> subs;
    for (const char* name : {"arith", "barrier", "lindstedt", "trees", "renorm"}) {
        CLI::App* s = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        s->add_option("--config", config_path, "JSON config file");
        s->add_option("--override", overrides, "key=value parameter override")->take_all();
        s->add_option("--out", out, "output directory");
        s->add_option("--seed", seed, "seed for randomized scans");
        subs.push_back(s);
    }

    // bump tabulation
    CLI::App* bt = app.add_subcommand("bump-table", "tabulate (x, v(x), xi(x)) to CSV");
    double bt_Delta = 0.2, bt_alpha = 6.0, bt_L = 0.1, bt_tau = 0.5;
    int bt_n = 1000;
    std::string bt_out = "bump.csv";
    bt->add_option("--Delta", bt_Delta, "bump width parameter");
    bt->add_option("--alpha", bt_alpha, "Gevrey exponent");
    bt->add_option("--L", bt_L, "Gevrey weight");
    bt->add_option("--tau", bt_tau, "symmetry point in [3/8, 5/8]");
    bt->add_option("--points", bt_n, "number of grid points");
    bt->add_option("--out", bt_out, "CSV path");

    // orbit export
    CLI::App* ob = app.add_subcommand("orbit", "iterate a family and export (k, x, y, x mod 1)");
    double ob_delta = 0.1, ob_x = 0.0, ob_y = 0.3;
    int ob_n = 1000;
    long ob_q = 1;
    std::string ob_kind = "hyperbolic", ob_out = "orbit.csv";
    ob->add_option("--kind", ob_kind, "integrable | hyperbolic | rescaled");
    ob->add_option("--delta", ob_delta, "perturbation size");
    ob->add_option("--qcover", ob_q, "cover degree for the rescaled family");
    ob->add_option("--x", ob_x, "initial angle");
    ob->add_option("--y", ob_y, "initial action");
    ob->add_option("--steps", ob_n, "iterations");
    ob->add_option("--out", ob_out, "CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        for (size_t i = 0; i < subs.size(); ++i) {
            if (subs[i]->parsed()) {
                const char* names[] = {"arith", "barrier", "lindstedt", "trees", "renorm"};
                bool seed_set = subs[i]->count("--seed") > 0;
                return run_experiment(names[i], config_path, overrides, out, seed, seed_set);
            }
        }
        if (bt->parsed()) {
            auto gp = kamlab::gevrey::Params::summable_params(bt_alpha, bt_L);
            auto spec = kamlab::gevrey::BumpSpec::toy(bt_Delta, bt_tau, gp);
            std::ofstream f(bt_out, std::ios::binary);
            f << "x,v,xi\n";
            for (int i = 0; i <= bt_n; ++i) {
                double x = static_cast<double>(i) / bt_n;
                char line[128];
                std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", x,
                              kamlab::gevrey::bump_v(x, spec), kamlab::gevrey::bump_xi(x, spec));
                f << line;
            }
            std::cout << "wrote " << bt_out << "\n";
            return 0;
        }
        if (ob->parsed()) {
            kamlab::twist::Family fam = kamlab::twist::Family::hyperbolic(ob_delta);
            if (ob_kind == "integrable") fam = kamlab::twist::Family::integrable();
            if (ob_kind == "rescaled") fam = kamlab::twist::Family::rescaled(ob_delta, ob_q);
            auto orb = kamlab::twist::orbit(fam, {ob_x, ob_y}, ob_n);
            std::ofstream f(ob_out, std::ios::binary);
            f << "k,x,y,x_mod_1\n";
            for (size_t k = 0; k < orb.size(); ++k) {
                char line[160];
                std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", k, orb[k].x, orb[k].y,
                              orb[k].x - std::floor(orb[k].x));
                f << line;
            }
            std::cout << "wrote " << ob_out << "\n";
            return 0;
        }
    } catch (const kamlab::PrecisionExhausted& e) {
        std::cerr << "precision error: " << e.what() << "\n";
        return 2;
    } catch (const kamlab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
