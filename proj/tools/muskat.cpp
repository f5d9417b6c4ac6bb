// Command-line front end: configure and run a single experiment plan.
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 I/O error.

#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "muskat/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Periodic one-phase interface evolution in conformal "
                 "coordinates"};

    std::string config_path, kind, preset, scheme, formulation, out_dir, dt_s;
    int n = 0, snapshot_every = -1, mode = 0;
    double t_end = -1.0, epsilon = -1.0, delta = -1.0;
    double nu = 0.0, corner_eps = 0.0, amplitude = 0.0;
    long long seed = -1;
    std::vector<double> sweep;

    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--kind", kind,
                   "experiment kind (single, dt_sweep, delta_sweep, "
                   "epsilon_sweep, corner_family, difference_pair, "
                   "equivalence_check)");
    app.add_option("--preset", preset,
                   "initial data (flat, cosine, random, corner, snapshot)");
    app.add_option("--n", n, "grid points (even)");
    app.add_option("--dt", dt_s, "time step, or 'auto'");
    app.add_option("--t-end", t_end, "final time");
    app.add_option("--epsilon", epsilon, "viscosity coefficient");
    app.add_option("--delta", delta, "mollifier width");
    app.add_option("--scheme", scheme, "rk4 or imex");
    app.add_option("--formulation", formulation, "g, z or both");
    app.add_option("--nu", nu, "corner angle fraction, in (0,1)");
    app.add_option("--corner-eps", corner_eps, "corner smoothing scale");
    app.add_option("--amplitude", amplitude, "preset amplitude");
    app.add_option("--mode", mode, "cosine wavenumber");
    app.add_option("--sweep", sweep, "sweep values")->delimiter(',');
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--snapshot-every", snapshot_every,
                   "store every N-th step (0: final only)");
    app.add_option("--seed", seed, "RNG seed for the random preset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    nlohmann::json overrides = nlohmann::json::object();
    if (app.count("--kind")) overrides["kind"] = kind;
    if (app.count("--preset")) overrides["preset"] = preset;
    if (app.count("--n")) overrides["n"] = n;
    if (app.count("--dt")) {
        if (dt_s == "auto") {
            overrides["dt"] = "auto";
        } else {
            try {
                size_t pos = 0;
                overrides["dt"] = std::stod(dt_s, &pos);
                if (pos != dt_s.size()) throw std::invalid_argument(dt_s);
            } catch (const std::exception&) {
                std::fprintf(stderr,
                             "config error: dt must be a number or 'auto'\n");
                return 2;
            }
        }
    }
    if (app.count("--t-end")) overrides["t_end"] = t_end;
    if (app.count("--epsilon")) overrides["epsilon"] = epsilon;
    if (app.count("--delta")) overrides["delta"] = delta;
    if (app.count("--scheme")) overrides["scheme"] = scheme;
    if (app.count("--formulation")) overrides["formulation"] = formulation;
    if (app.count("--nu")) overrides["nu"] = nu;
    if (app.count("--corner-eps")) overrides["corner_eps"] = corner_eps;
    if (app.count("--amplitude")) overrides["amplitude"] = amplitude;
    if (app.count("--mode")) overrides["mode"] = mode;
    if (app.count("--sweep")) overrides["sweep"] = sweep;
    if (app.count("--out")) overrides["out"] = out_dir;
    if (app.count("--snapshot-every"))
        overrides["snapshot_every"] = snapshot_every;
    if (app.count("--seed")) {
        if (seed < 0) {
            std::fprintf(stderr, "config error: seed must be >= 0\n");
            return 2;
        }
        overrides["seed"] = static_cast<uint64_t>(seed);
    }

    try {
        muskat::ExperimentPlan plan =
            muskat::load_plan(config_path, overrides);
        const int rc = muskat::run_plan(plan);
        if (rc == 3)
            std::fprintf(stderr,
                         "numerical failure; see %s/summary.txt\n",
                         plan.output_dir.c_str());
        return rc;
    } catch (const muskat::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const muskat::IoError& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}
