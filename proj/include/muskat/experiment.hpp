#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "muskat/diagnostics.hpp"
#include "muskat/integrator.hpp"
#include "muskat/random_fields.hpp"
#include "muskat/snapshot.hpp"

namespace muskat {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
    single,
    dt_sweep,
    delta_sweep,
    epsilon_sweep,
    corner_family,
    difference_pair,
    equivalence_check,
};

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "single") return ExperimentKind::single;
    if (s == "dt_sweep") return ExperimentKind::dt_sweep;
    if (s == "delta_sweep") return ExperimentKind::delta_sweep;
    if (s == "epsilon_sweep") return ExperimentKind::epsilon_sweep;
    if (s == "corner_family") return ExperimentKind::corner_family;
    if (s == "difference_pair") return ExperimentKind::difference_pair;
    if (s == "equivalence_check") return ExperimentKind::equivalence_check;
    throw ConfigError("unknown experiment kind: " + s);
}

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::single: return "single";
        case ExperimentKind::dt_sweep: return "dt_sweep";
        case ExperimentKind::delta_sweep: return "delta_sweep";
        case ExperimentKind::epsilon_sweep: return "epsilon_sweep";
        case ExperimentKind::corner_family: return "corner_family";
        case ExperimentKind::difference_pair: return "difference_pair";
        case ExperimentKind::equivalence_check: return "equivalence_check";
    }
    return "?";
}

/// Initial-data preset and its parameters.
struct InitialDataSpec {
    std::string preset = "flat"; // flat | cosine | random | corner | snapshot
    double amplitude = 1e-3;     // cosine / random scale
    int mode = 1;                // cosine wavenumber
    uint64_t seed = 1;           // random preset
    int k_max = 16;              // random band limit
    double decay = 2.0;          // random coefficient decay exponent
    double nu = 0.5;             // corner angle fraction
    double corner_eps = 0.05;    // corner smoothing scale
    std::string snapshot_path;   // snapshot preset source
    double shift_depth = 0.0;    // Poisson shift depth for snapshot preset
};

struct ExperimentPlan {
    ExperimentKind kind = ExperimentKind::single;
    int n = 256;
    SolverConfig base;
    std::vector<double> sweep_values;
    InitialDataSpec initial;
    std::string output_dir = "out";
    int snapshot_cadence = 0; // 0: final state only; else every N-th step
    uint64_t seed = 1;
};

namespace experiment_detail {

inline double require_positive(double v, const char* name) {
    if (!(v > 0.0))
        throw ConfigError(std::string(name) + " must be > 0");
    return v;
}

inline double require_nonneg(double v, const char* name) {
    if (!(v >= 0.0))
        throw ConfigError(std::string(name) + " must be >= 0");
    return v;
}

} // namespace experiment_detail

/// Build a validated plan from a JSON object; unknown keys are fatal.
inline ExperimentPlan plan_from_json(const nlohmann::json& j) {
    static const std::vector<std::string> known = {
        "kind",       "n",        "dt",          "t_end",
        "epsilon",    "delta",    "mollifier",   "scheme",
        "formulation", "cfl_safety", "preset",   "amplitude",
        "mode",       "seed",     "k_max",       "decay",
        "nu",         "corner_eps", "snapshot",  "shift_depth",
        "out",        "snapshot_every", "sweep",
    };
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("unknown config key: " + it.key());
    }
    ExperimentPlan p;
    if (j.contains("kind"))
        p.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("n")) p.n = j.at("n").get<int>();
    if (p.n < 8 || p.n % 2 != 0 || p.n > 1 << 20)
        throw ConfigError("n must be even, >= 8 and of desk scale");
    if (j.contains("dt")) {
        const auto& v = j.at("dt");
        if (v.is_string()) {
            if (v.get<std::string>() != "auto")
                throw ConfigError("dt must be a positive number or \"auto\"");
            p.base.dt = 0.0;
        } else {
            p.base.dt =
                experiment_detail::require_positive(v.get<double>(), "dt");
        }
    }
    if (j.contains("t_end"))
        p.base.t_end = experiment_detail::require_nonneg(
            j.at("t_end").get<double>(), "t_end");
    if (j.contains("epsilon"))
        p.base.epsilon = experiment_detail::require_nonneg(
            j.at("epsilon").get<double>(), "epsilon");
    if (j.contains("delta"))
        p.base.mollifier.delta = experiment_detail::require_nonneg(
            j.at("delta").get<double>(), "delta");
    if (j.contains("mollifier")) {
        const std::string m = j.at("mollifier").get<std::string>();
        if (m == "gaussian")
            p.base.mollifier.profile = MollifierProfile::gaussian;
        else if (m == "raised_cosine")
            p.base.mollifier.profile = MollifierProfile::raised_cosine;
        else
            throw ConfigError("mollifier must be gaussian or raised_cosine");
    }
    if (j.contains("scheme")) {
        const std::string s = j.at("scheme").get<std::string>();
        if (s == "rk4")
            p.base.scheme = Scheme::rk4;
        else if (s == "imex")
            p.base.scheme = Scheme::imex;
        else
            throw ConfigError("scheme must be rk4 or imex");
    }
    if (j.contains("formulation")) {
        const std::string f = j.at("formulation").get<std::string>();
        if (f == "g")
            p.base.formulation = Formulation::g;
        else if (f == "z")
            p.base.formulation = Formulation::z;
        else if (f == "both")
            p.base.formulation = Formulation::both;
        else
            throw ConfigError("formulation must be g, z or both");
    }
    if (j.contains("cfl_safety")) {
        p.base.cfl_safety = j.at("cfl_safety").get<double>();
        if (!(p.base.cfl_safety > 0.0 && p.base.cfl_safety <= 1.0))
            throw ConfigError("cfl_safety must lie in (0,1]");
    }
    if (j.contains("preset")) {
        p.initial.preset = j.at("preset").get<std::string>();
        static const std::vector<std::string> presets = {
            "flat", "cosine", "random", "corner", "snapshot"};
        if (std::find(presets.begin(), presets.end(), p.initial.preset) ==
            presets.end())
            throw ConfigError("unknown preset: " + p.initial.preset);
    }
    if (j.contains("amplitude"))
        p.initial.amplitude = j.at("amplitude").get<double>();
    if (j.contains("mode")) {
        p.initial.mode = j.at("mode").get<int>();
        if (p.initial.mode < 1) throw ConfigError("mode must be >= 1");
    }
    if (j.contains("seed")) {
        p.initial.seed = j.at("seed").get<uint64_t>();
        p.seed = p.initial.seed;
    }
    if (j.contains("k_max")) {
        p.initial.k_max = j.at("k_max").get<int>();
        if (p.initial.k_max < 1) throw ConfigError("k_max must be >= 1");
    }
    if (j.contains("decay"))
        p.initial.decay = j.at("decay").get<double>();
    if (j.contains("nu")) {
        p.initial.nu = j.at("nu").get<double>();
        if (!(p.initial.nu > 0.0 && p.initial.nu < 1.0))
            throw ConfigError("nu must lie in (0,1)");
    }
    if (j.contains("corner_eps"))
        p.initial.corner_eps = experiment_detail::require_positive(
            j.at("corner_eps").get<double>(), "corner_eps");
    if (j.contains("snapshot"))
        p.initial.snapshot_path = j.at("snapshot").get<std::string>();
    if (j.contains("shift_depth"))
        p.initial.shift_depth = experiment_detail::require_nonneg(
            j.at("shift_depth").get<double>(), "shift_depth");
    if (j.contains("out")) p.output_dir = j.at("out").get<std::string>();
    if (j.contains("snapshot_every")) {
        p.snapshot_cadence = j.at("snapshot_every").get<int>();
        if (p.snapshot_cadence < 0)
            throw ConfigError("snapshot_every must be >= 0");
    }
    if (j.contains("sweep")) {
        p.sweep_values = j.at("sweep").get<std::vector<double>>();
    }
    const bool needs_sweep = p.kind == ExperimentKind::dt_sweep ||
                             p.kind == ExperimentKind::delta_sweep ||
                             p.kind == ExperimentKind::epsilon_sweep ||
                             p.kind == ExperimentKind::corner_family ||
                             p.kind == ExperimentKind::difference_pair;
    if (needs_sweep && p.sweep_values.empty())
        throw ConfigError("sweep values required for kind " +
                          std::string(to_string(p.kind)));
    if (p.kind == ExperimentKind::difference_pair &&
        p.sweep_values.size() != 2)
        throw ConfigError("difference_pair needs exactly two sweep values");
    for (double v : p.sweep_values)
        if (!(v > 0.0)) throw ConfigError("sweep values must be > 0");
    return p;
}

/// Read a config file (JSON) and overlay explicit overrides.
inline ExperimentPlan load_plan(const std::string& config_path,
                                const nlohmann::json& overrides) {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) throw ConfigError("cannot open config: " + config_path);
        try {
            is >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config parse error: " + std::string(e.what()));
        }
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
    }
    for (auto it = overrides.begin(); it != overrides.end(); ++it)
        j[it.key()] = it.value();
    return plan_from_json(j);
}

inline GFormState make_initial_state(const ExperimentPlan& p) {
    Grid grid(p.n);
    const auto& d = p.initial;
    if (d.preset == "flat") return GFormState::flat(grid);
    if (d.preset == "cosine") {
        const double A = d.amplitude;
        const int k = d.mode;
        return GFormState{
            SpectralField::sample(
                grid, [A, k](double a) { return A * std::cos(k * a); }, true),
            0.0};
    }
    if (d.preset == "random") {
        SpectralField g = d.amplitude * random_band_limited(grid, d.seed,
                                                            d.k_max, 1.0,
                                                            d.decay);
        return GFormState{g.real_part(), 0.0};
    }
    if (d.preset == "corner") return make_corner_data(d.nu, d.corner_eps, grid);
    if (d.preset == "snapshot") {
        LoadedRecord rec = load_file(d.snapshot_path);
        GFormState s = std::visit(
            [](auto&& r) -> GFormState {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, GFormState>) return r;
                else if constexpr (std::is_same_v<T, ZFormState>)
                    return z_to_g(r);
                else if constexpr (std::is_same_v<T, Checkpoint<GFormState>>)
                    return r.state;
                else
                    return z_to_g(r.state);
            },
            rec);
        if (s.g.size() != p.n)
            throw ConfigError("snapshot grid size differs from n");
        if (d.shift_depth > 0.0)
            s = GFormState{poisson_extend(s.g, -d.shift_depth), 0.0};
        else
            s.time = 0.0;
        return s;
    }
    throw ConfigError("unknown preset: " + d.preset);
}

namespace experiment_detail {

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir);
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    return os;
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_diagnostics_csv(const std::string& path,
                                  const std::vector<DiagnosticsRecord>& recs) {
    auto os = open_out(path);
    os << "time,M_instantaneous,M_dissipation_accum,M_total,M1,E_1,E_2,"
          "hhalf_g,cons_residual,g_min,g_max,f_max,B1_min,min_inv_zap\n";
    for (const auto& r : recs) {
        os << fmt(r.time) << ',' << fmt(r.M_instantaneous) << ','
           << fmt(r.M_dissipation_accum) << ',' << fmt(r.M_total) << ','
           << fmt(r.M1) << ',' << fmt(r.E_n.size() > 0 ? r.E_n[0] : 0.0)
           << ',' << fmt(r.E_n.size() > 1 ? r.E_n[1] : 0.0) << ','
           << fmt(r.hhalf_g) << ',' << fmt(r.cons_residual) << ','
           << fmt(r.g_min) << ',' << fmt(r.g_max) << ',' << fmt(r.f_max)
           << ',' << fmt(r.B1_min) << ',' << fmt(r.min_inv_zap) << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

inline double least_squares_slope(const std::vector<double>& x,
                                  const std::vector<double>& y) {
    const size_t n = x.size();
    double xs = 0, ys = 0, xy = 0, xx = 0;
    for (size_t i = 0; i < n; ++i) {
        xs += x[i];
        ys += y[i];
        xy += x[i] * y[i];
        xx += x[i] * x[i];
    }
    return (n * xy - xs * ys) / (n * xx - xs * xs);
}

inline double log_log_slope(const std::vector<double>& x,
                            const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(std::max(y[i], 1e-300)));
    }
    return least_squares_slope(lx, ly);
}

inline int worker_cap() {
    if (const char* env = std::getenv("MUSKAT_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Run fn(i) for i in [0, count) on a bounded worker pool. Exceptions are
/// captured and the first one (by index) rethrown after all workers join.
template <typename F>
inline void parallel_runs(int count, F&& fn) {
    const int workers = std::min(worker_cap(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    std::mutex mtx;
    int next = 0;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                int i;
                {
                    std::lock_guard<std::mutex> lock(mtx);
                    if (next >= count) return;
                    i = next++;
                }
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline void echo_plan(std::ostream& os, const ExperimentPlan& p) {
    os << "kind = " << to_string(p.kind) << "\n";
    os << "n = " << p.n << "\n";
    os << "dt = " << (p.base.auto_dt() ? std::string("auto") : fmt(p.base.dt))
       << "\n";
    os << "t_end = " << fmt(p.base.t_end) << "\n";
    os << "epsilon = " << fmt(p.base.epsilon) << "\n";
    os << "delta = " << fmt(p.base.mollifier.delta) << "\n";
    os << "mollifier = "
       << (p.base.mollifier.profile == MollifierProfile::gaussian
               ? "gaussian"
               : "raised_cosine")
       << "\n";
    os << "scheme = " << (p.base.scheme == Scheme::rk4 ? "rk4" : "imex")
       << "\n";
    os << "formulation = "
       << (p.base.formulation == Formulation::g
               ? "g"
               : p.base.formulation == Formulation::z ? "z" : "both")
       << "\n";
    os << "cfl_safety = " << fmt(p.base.cfl_safety) << "\n";
    os << "preset = " << p.initial.preset << "\n";
    os << "amplitude = " << fmt(p.initial.amplitude) << "\n";
    os << "mode = " << p.initial.mode << "\n";
    os << "seed = " << p.initial.seed << "\n";
    os << "k_max = " << p.initial.k_max << "\n";
    os << "decay = " << fmt(p.initial.decay) << "\n";
    os << "nu = " << fmt(p.initial.nu) << "\n";
    os << "corner_eps = " << fmt(p.initial.corner_eps) << "\n";
    os << "shift_depth = " << fmt(p.initial.shift_depth) << "\n";
    os << "snapshot_every = " << p.snapshot_cadence << "\n";
    os << "sweep =";
    for (double v : p.sweep_values) os << " " << fmt(v);
    os << "\n";
}

template <typename State>
inline void write_run_outputs(const std::string& dir,
                              const Trajectory<State>& traj, int cadence) {
    ensure_dir(dir);
    write_diagnostics_csv(dir + "/diag.csv", diagnostics_series(traj));
    if (cadence > 0) {
        ensure_dir(dir + "/snapshots");
        for (size_t i = 0; i < traj.states.size(); i += cadence) {
            char name[64];
            std::snprintf(name, sizeof name, "/snapshots/snap_%06zu.bin", i);
            save_file(dir + name, traj.states[i]);
        }
    }
    save_file(dir + "/final_state.bin", traj.states.back());
    // checkpoint with the accumulated dissipation integral
    auto recs = diagnostics_series(traj);
    Checkpoint<State> cp{traj.states.back(),
                         recs.back().M_dissipation_accum};
    save_file(dir + "/checkpoint.bin", cp);
}

template <typename State>
inline void require_completed(const Trajectory<State>& traj) {
    if (!traj.completed)
        throw NumericalError(traj.failure_reason.empty()
                                 ? "run did not complete"
                                 : traj.failure_reason);
}

} // namespace experiment_detail

/// Execute a plan; writes all artifacts under plan.output_dir and returns a
/// process exit code (0 ok, 3 numerical failure). Config and I/O problems
/// throw ConfigError / IoError for the caller to map to codes 2 and 4.
inline int run_plan(const ExperimentPlan& plan) {
    namespace ed = experiment_detail;
    ed::ensure_dir(plan.output_dir);
    auto summary = ed::open_out(plan.output_dir + "/summary.txt");
    summary << "# run summary\n";
    ed::echo_plan(summary, plan);

    try {
        switch (plan.kind) {
            case ExperimentKind::single: {
                GFormState s0 = make_initial_state(plan);
                if (plan.base.formulation == Formulation::g ||
                    plan.base.formulation == Formulation::both) {
                    GTrajectory tr = integrate_g(s0, plan.base);
                    ed::write_run_outputs(plan.output_dir + "/g", tr,
                                          plan.snapshot_cadence);
                    summary << "g_steps = " << tr.steps() << "\n";
                    summary << "g_completed = " << tr.completed << "\n";
                    if (!tr.completed)
                        summary << "g_failure = " << tr.failure_reason << "\n";
                    ed::require_completed(tr);
                }
                if (plan.base.formulation == Formulation::z ||
                    plan.base.formulation == Formulation::both) {
                    SolverConfig zc = plan.base;
                    zc.scheme = Scheme::rk4; // z path is explicit-only
                    ZTrajectory tz = integrate_z(g_to_z(s0), zc);
                    ed::write_run_outputs(plan.output_dir + "/z", tz,
                                          plan.snapshot_cadence);
                    summary << "z_steps = " << tz.steps() << "\n";
                    summary << "z_completed = " << tz.completed << "\n";
                    if (!tz.completed)
                        summary << "z_failure = " << tz.failure_reason << "\n";
                    ed::require_completed(tz);
                }
                break;
            }
            case ExperimentKind::dt_sweep: {
                GFormState s0 = make_initial_state(plan);
                std::vector<double> dts = plan.sweep_values;
                std::sort(dts.begin(), dts.end(), std::greater<>());
                const double dt_ref = dts.back() / 4.0;
                std::vector<GTrajectory> runs(dts.size());
                GTrajectory ref;
                ed::parallel_runs(
                    static_cast<int>(dts.size()) + 1, [&](int i) {
                        SolverConfig cfg = plan.base;
                        cfg.dt = i < static_cast<int>(dts.size()) ? dts[i]
                                                                  : dt_ref;
                        GTrajectory tr = integrate_g(s0, cfg);
                        ed::require_completed(tr);
                        if (i < static_cast<int>(dts.size()))
                            runs[i] = std::move(tr);
                        else
                            ref = std::move(tr);
                    });
                std::vector<double> errs;
                for (size_t i = 0; i < dts.size(); ++i) {
                    char name[64];
                    std::snprintf(name, sizeof name, "/run_%03zu", i);
                    ed::write_run_outputs(plan.output_dir + name, runs[i],
                                          plan.snapshot_cadence);
                    errs.push_back(norm_l2(runs[i].back().g - ref.back().g));
                    summary << "dt_" << i << " = " << ed::fmt(dts[i])
                            << "  err_l2 = " << ed::fmt(errs.back()) << "\n";
                }
                summary << "order_fit = "
                        << ed::fmt(ed::log_log_slope(dts, errs)) << "\n";
                break;
            }
            case ExperimentKind::delta_sweep:
            case ExperimentKind::epsilon_sweep: {
                const bool is_delta =
                    plan.kind == ExperimentKind::delta_sweep;
                GFormState s0 = make_initial_state(plan);
                std::vector<double> vals = plan.sweep_values;
                std::sort(vals.begin(), vals.end(), std::greater<>());
                std::vector<GTrajectory> runs(vals.size());
                GTrajectory ref;
                ed::parallel_runs(
                    static_cast<int>(vals.size()) + 1, [&](int i) {
                        SolverConfig cfg = plan.base;
                        if (i < static_cast<int>(vals.size())) {
                            if (is_delta)
                                cfg.mollifier.delta = vals[i];
                            else
                                cfg.epsilon = vals[i];
                        } else {
                            if (is_delta)
                                cfg.mollifier.delta = 0.0;
                            else
                                cfg.epsilon = 0.0;
                        }
                        GTrajectory tr = integrate_g(s0, cfg);
                        ed::require_completed(tr);
                        if (i < static_cast<int>(vals.size()))
                            runs[i] = std::move(tr);
                        else
                            ref = std::move(tr);
                    });
                std::vector<double> gaps;
                for (size_t i = 0; i < vals.size(); ++i) {
                    char name[64];
                    std::snprintf(name, sizeof name, "/run_%03zu", i);
                    ed::write_run_outputs(plan.output_dir + name, runs[i],
                                          plan.snapshot_cadence);
                    gaps.push_back(
                        norm_hs(runs[i].back().g - ref.back().g, 1.0));
                    summary << (is_delta ? "delta_" : "epsilon_") << i
                            << " = " << ed::fmt(vals[i]) << "  gap_h1 = "
                            << ed::fmt(gaps.back()) << "\n";
                }
                bool monotone = true;
                for (size_t i = 0; i + 1 < gaps.size(); ++i)
                    if (gaps[i + 1] >= gaps[i]) monotone = false;
                summary << "gap_monotone_decreasing = " << monotone << "\n";
                summary << "slope_fit = "
                        << ed::fmt(ed::log_log_slope(vals, gaps)) << "\n";
                summary << "expected_slope = " << (is_delta ? "0.5" : "1")
                        << "\n";
                break;
            }
            case ExperimentKind::corner_family: {
                std::vector<double> epss = plan.sweep_values;
                std::sort(epss.begin(), epss.end(), std::greater<>());
                std::vector<GTrajectory> runs(epss.size());
                ed::parallel_runs(static_cast<int>(epss.size()), [&](int i) {
                    Grid grid(plan.n);
                    GFormState s0 =
                        make_corner_data(plan.initial.nu, epss[i], grid);
                    GTrajectory tr = integrate_g(s0, plan.base);
                    ed::require_completed(tr);
                    runs[i] = std::move(tr);
                });
                std::vector<double> tip_err, jump_drift;
                for (size_t i = 0; i < epss.size(); ++i) {
                    char name[64];
                    std::snprintf(name, sizeof name, "/run_%03zu", i);
                    ed::write_run_outputs(plan.output_dir + name, runs[i],
                                          plan.snapshot_cadence);
                    RigidityReport rep = rigidity_check(
                        runs[i], std::numbers::pi, {2.0 * epss[i]});
                    tip_err.push_back(
                        std::abs(rep.tip_velocity.back() + Complex(0, 1)));
                    jump_drift.push_back(std::abs(rep.angle_jump.back() -
                                                  rep.angle_jump.front()));
                    summary << "eps_" << i << " = " << ed::fmt(epss[i])
                            << "  tip_speed_err = " << ed::fmt(tip_err.back())
                            << "  angle_jump_drift = "
                            << ed::fmt(jump_drift.back())
                            << "  rigidity_resid_max = "
                            << ed::fmt(*std::max_element(
                                   rep.identity_residual.begin(),
                                   rep.identity_residual.end()))
                            << "\n";
                }
                bool tip_mono = true, jump_mono = true;
                for (size_t i = 0; i + 1 < epss.size(); ++i) {
                    if (tip_err[i + 1] >= tip_err[i]) tip_mono = false;
                    if (jump_drift[i + 1] >= jump_drift[i]) jump_mono = false;
                }
                summary << "tip_speed_monotone = " << tip_mono << "\n";
                summary << "angle_jump_monotone = " << jump_mono << "\n";
                summary << "tip_speed_ratio = "
                        << ed::fmt(tip_err.front() / tip_err.back()) << "\n";
                summary << "tip_speed_slope_fit = "
                        << ed::fmt(ed::log_log_slope(epss, tip_err)) << "\n";
                break;
            }
            case ExperimentKind::difference_pair: {
                GFormState s0 = make_initial_state(plan);
                std::vector<GTrajectory> runs(2);
                ed::parallel_runs(2, [&](int i) {
                    SolverConfig cfg = plan.base;
                    cfg.epsilon = plan.sweep_values[i];
                    GTrajectory tr = integrate_g(s0, cfg);
                    ed::require_completed(tr);
                    runs[i] = std::move(tr);
                });
                ed::write_run_outputs(plan.output_dir + "/run_a", runs[0],
                                      plan.snapshot_cadence);
                ed::write_run_outputs(plan.output_dir + "/run_b", runs[1],
                                      plan.snapshot_cadence);
                DifferencePair dp = difference_energy(runs[0], runs[1]);
                auto os = ed::open_out(plan.output_dir + "/difference.csv");
                os << "time,E,F,hhalf_term,integral_accum\n";
                for (size_t i = 0; i < dp.times.size(); ++i)
                    os << ed::fmt(dp.times[i]) << ',' << ed::fmt(dp.E[i])
                       << ',' << ed::fmt(dp.F[i]) << ','
                       << ed::fmt(dp.hhalf_term[i]) << ','
                       << ed::fmt(dp.integral_accum[i]) << '\n';
                summary << "E_initial_term = " << ed::fmt(dp.initial_term)
                        << "\n";
                summary << "F_final = " << ed::fmt(dp.F.back()) << "\n";
                summary << "F_ratio = " << ed::fmt(dp.ratio_F) << "\n";
                break;
            }
            case ExperimentKind::equivalence_check: {
                GFormState s0 = make_initial_state(plan);
                const double dt0 =
                    plan.base.auto_dt() ? 1e-3 : plan.base.dt;
                std::vector<double> dts = {dt0, dt0 / 2.0, dt0 / 4.0};
                std::vector<double> gaps(dts.size());
                ed::parallel_runs(static_cast<int>(dts.size()), [&](int i) {
                    SolverConfig cfg = plan.base;
                    cfg.dt = dts[i];
                    GTrajectory tg = integrate_g(s0, cfg);
                    ed::require_completed(tg);
                    SolverConfig zc = cfg;
                    zc.scheme = Scheme::rk4;
                    ZTrajectory tz = integrate_z(g_to_z(s0), zc);
                    ed::require_completed(tz);
                    gaps[i] =
                        norm_l2(z_to_g(tz.back()).g - tg.back().g);
                });
                for (size_t i = 0; i < dts.size(); ++i)
                    summary << "dt_" << i << " = " << ed::fmt(dts[i])
                            << "  gap_l2 = " << ed::fmt(gaps[i]) << "\n";
                const double order = ed::log_log_slope(dts, gaps);
                const double C = gaps[0] / std::pow(dts[0], 4.0);
                const double bound =
                    std::max(1e-6, C * std::pow(dts.back(), 4.0));
                summary << "order_fit = " << ed::fmt(order) << "\n";
                summary << "fitted_C = " << ed::fmt(C) << "\n";
                summary << "finest_gap = " << ed::fmt(gaps.back()) << "\n";
                summary << "finest_gap_within_bound = "
                        << (gaps.back() <= bound) << "\n";
                break;
            }
        }
    } catch (const NumericalError& e) {
        summary << "status = numerical_failure\n";
        summary << "error = " << e.what() << "\n";
        return 3;
    }
    summary << "status = ok\n";
    if (!summary) throw IoError("write failed: summary.txt");
    return 0;
}

} // namespace muskat
