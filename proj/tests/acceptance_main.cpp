// Acceptance harness: one pass/fail line per criterion, nonzero exit if any
// fail. Each check pins its own grid, step size and tolerance; the heavier
// runs stay at desk scale (n <= 1024, t_end <= 1).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "muskat/diagnostics.hpp"
#include "muskat/experiment.hpp"
#include "muskat/quadrature.hpp"
#include "muskat/random_fields.hpp"

using namespace muskat;

namespace {

int failures = 0;

void report(int num, bool pass, const std::string& what,
            const std::string& detail) {
    std::printf("criterion %2d: %s - %s (%s)\n", num, pass ? "PASS" : "FAIL",
                what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

GFormState seeded_state(const Grid& g, uint64_t seed, double amp,
                        int k_max) {
    return GFormState{
        (amp * random_band_limited(g, seed, k_max, 1.0)).real_part(), 0.0};
}

SpectralField analytic_field(const Grid& g) {
    return SpectralField::sample(
        g,
        [](double a) { return std::exp(std::sin(a)) / (1.2 + std::cos(a)); },
        true);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double xs = 0, ys = 0, xy = 0, xx = 0;
    const double n = double(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        xs += lx;
        ys += ly;
        xy += lx * ly;
        xx += lx * lx;
    }
    return (n * xy - xs * ys) / (n * xx - xs * xs);
}

void criterion_1() {
    double worst = 0.0;
    for (int n : {64, 256}) {
        Grid g(n);
        for (uint64_t seed : {1ULL, 5ULL, 9ULL}) {
            auto f = random_band_limited(g, seed, n / 3, 1.0).real_part();
            const double scale = norm_l2(f);
            auto hh = hilbert(hilbert(f));
            auto centered = f - SpectralField::constant(g, f.mean());
            worst = std::max(worst, norm_l2(hh - centered) / scale);
            auto lhs = abs_derivative(f, 1.0);
            auto rhs = Complex(0.0, 1.0) * hilbert(derivative(f));
            worst = std::max(worst, norm_l2(lhs - rhs) /
                                        std::max(1e-300, norm_l2(lhs)));
            worst = std::max(worst,
                             hilbert(f).real_part().max_abs() / scale);
        }
    }
    report(1, worst < 1e-12, "multiplier identities", "max rel " + fmt(worst));
}

void criterion_2() {
    bool pass = true;
    std::string detail;
    double prev_h = -1.0, prev_a = -1.0, prev_c = -1.0;
    const double floor = 1e-12;
    for (int n : {64, 128, 256, 512}) {
        Grid g(n);
        auto f = analytic_field(g);
        auto w = SpectralField::sample(
            g, [](double a) { return std::sin(a) / (1.5 + std::sin(a)); },
            true);
        const double eh =
            norm_l2(pv_hilbert_quadrature(f).target - hilbert(f)) /
            norm_l2(f);
        const double ea = norm_l2(abs_derivative_quadrature(f).target -
                                  abs_derivative(f, 1.0)) /
                          norm_l2(abs_derivative(f, 1.0));
        auto cr = commutator_h(f, w);
        const double ec = cr.quadrature_discrepancy /
                          std::max(1.0, norm_l2(cr.field));
        if (n == 256) {
            pass = pass && eh < 1e-8 && ea < 1e-8 && ec < 1e-8;
            detail = "rel at n=256: H " + fmt(eh) + ", |d| " + fmt(ea) +
                     ", comm " + fmt(ec);
        }
        if (prev_h > floor) pass = pass && eh < prev_h / 4.0;
        if (prev_a > floor) pass = pass && ea < prev_a / 4.0;
        if (prev_c > floor) pass = pass && ec < prev_c / 4.0;
        prev_h = eh;
        prev_a = ea;
        prev_c = ec;
    }
    report(2, pass, "quadrature oracle agreement and refinement", detail);
}

void criterion_3() {
    Grid g(256);
    double worst = 0.0;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        auto f = random_band_limited(g, seed, 15, 1.0).real_part();
        auto w = random_band_limited(g, seed + 40, 15, 1.0).real_part();
        auto h = random_band_limited(g, seed + 80, 15, 1.0).real_part();
        // operator identity tying the derivative of a commutator to the
        // shifted commutator, a remainder and the double-difference bracket
        auto lhs = multiply(h, derivative(commutator_h(f, w).field));
        auto rhs1 = commutator_h(multiply(h, derivative(f)), w).field;
        auto hdw = multiply(h, derivative(w));
        auto rhs2 = multiply(f, hilbert(derivative(hdw))) -
                    hilbert(multiply(f, derivative(hdw)));
        auto tb = triple_bracket(h, f, derivative(w));
        worst = std::max(worst, norm_l2(lhs - (rhs1 + rhs2 - tb)) /
                                    std::max(1.0, norm_l2(lhs)));
        // kernel form of the half Laplacian
        worst = std::max(worst,
                         norm_l2(abs_derivative_quadrature(f).target -
                                 abs_derivative(f, 1.0)) /
                             std::max(1.0, norm_l2(abs_derivative(f, 1.0))));
    }
    report(3, worst < 1e-7, "kernel identities on 20 seeded triples",
           "max rel " + fmt(worst));
}

void criterion_4() {
    Grid g(128);
    double worst_gap = 0.0, worst_neg = 0.0;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        auto z = g_to_z(seeded_state(g, seed, 0.2, 12));
        auto r = compute_B1_checked(z.inv_zap);
        const double scale = 1.0 + r.field.max_abs();
        worst_gap = std::max(worst_gap, r.kernel_discrepancy / scale);
        worst_neg = std::max(worst_neg, -r.field.min_real() / scale);
    }
    report(4, worst_gap < 1e-7 && worst_neg < 1e-8,
           "B1 dual form and nonnegativity on 20 seeded states",
           "gap " + fmt(worst_gap) + ", neg " + fmt(worst_neg));
}

void criterion_5() {
    Grid g(64);
    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 10.0;
    auto tg = integrate_g(GFormState::flat(g), cfg);
    const double drift_g = tg.back().g.max_abs();
    auto tz = integrate_z(ZFormState::flat(g), cfg);
    double drift_z = tz.back().z_minus_id.max_abs();
    for (const auto& v : tz.back().inv_zap.values())
        drift_z = std::max(drift_z, std::abs(v - 1.0));
    const bool pass = tg.completed && tz.completed && tg.steps() == 10000 &&
                      drift_g < 1e-13 && drift_z < 1e-13;
    report(5, pass, "flat interface fixed for 10^4 steps, both formulations",
           "drift g " + fmt(drift_g) + ", z " + fmt(drift_z));
}

void criterion_6() {
    Grid g(64);
    double worst = 0.0;
    for (int k : {1, 2, 4}) {
        const double A = 1e-6;
        auto s0 = GFormState{
            SpectralField::sample(
                g, [&](double a) { return A * std::cos(k * a); }, true),
            0.0};
        SolverConfig cfg;
        cfg.dt = 1e-3;
        cfg.t_end = 1.0;
        auto tr = integrate_g(s0, cfg);
        const double amp = 2.0 * std::abs(tr.back().g.coeff_at(k));
        worst = std::max(worst,
                         std::abs(amp / (A * std::exp(-double(k))) - 1.0));
    }
    report(6, worst < 1e-3, "linearized decay exp(-kt), k in {1,2,4}",
           "max rel " + fmt(worst));
}

void criterion_7() {
    Grid g(128);
    auto s0 = GFormState{
        SpectralField::sample(g, [](double a) { return 1e-3 * std::cos(a); },
                              true),
        0.0};
    std::vector<double> dts = {4e-3, 2e-3, 1e-3};
    std::vector<double> gaps;
    for (double dt : dts) {
        SolverConfig cfg;
        cfg.dt = dt;
        cfg.t_end = 0.5;
        auto tg = integrate_g(s0, cfg);
        auto tz = integrate_z(g_to_z(s0), cfg);
        gaps.push_back(norm_l2(z_to_g(tz.back()).g - tg.back().g));
    }
    const double C = gaps[0] / std::pow(dts[0], 4.0);
    const double bound = std::max(1e-6, C * std::pow(dts.back(), 4.0));
    report(7, gaps.back() <= bound,
           "g/z formulation gap at t=0.5 within max(1e-6, C dt^4)",
           "gap " + fmt(gaps.back()) + " vs bound " + fmt(bound));
}

void criterion_8() {
    Grid g(512);
    auto s0 = GFormState{
        SpectralField::sample(g, [](double a) { return 1e-2 * std::cos(a); },
                              true),
        0.0};
    std::vector<double> worst;
    for (double dt : {1e-3, 5e-4}) {
        SolverConfig cfg;
        cfg.dt = dt;
        cfg.t_end = 0.05;
        auto ds = diagnostics_series(integrate_g(s0, cfg));
        double mx = 0.0;
        for (size_t i = 1; i + 1 < ds.size(); ++i)
            mx = std::max(mx, std::abs(ds[i].cons_residual));
        worst.push_back(mx);
    }
    const double ratio = worst[0] / std::max(worst[1], 1e-300);
    report(8, worst[0] < 1e-4 && ratio > 2.5,
           "conservation identity residual, ~4x drop per dt halving",
           "residual " + fmt(worst[0]) + ", ratio " + fmt(ratio));
}

void criterion_9() {
    Grid g(512);
    auto s0 = GFormState{
        SpectralField::sample(g, [](double a) { return 0.3 * std::cos(a); },
                              true),
        0.0};
    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 1.0;
    auto tr = integrate_g(s0, cfg);
    auto violations = max_principle_monitor(tr, 4);
    report(9, tr.completed && violations.empty(),
           "extrema of g and f obey the maximum principles",
           std::to_string(violations.size()) + " violations");
}

void criterion_10() {
    // mollifier-width sweep: gap to the delta=0 run scales ~ delta^{1/2}
    bool pass = true;
    double slope_d, slope_e;
    {
        Grid g(512);
        auto g0 = (0.5 * random_band_limited(g, 11, 255, 1.0, 1.75))
                      .real_part();
        SolverConfig base;
        base.epsilon = 0.01;
        base.dt = 5e-4;
        base.t_end = 0.01;
        auto ref = integrate_g(GFormState{g0, 0.0}, base);
        std::vector<double> deltas = {0.2, 0.1, 0.05, 0.025}, gaps;
        double prev = 1e9;
        for (double d : deltas) {
            SolverConfig cfg = base;
            cfg.mollifier = {d, MollifierProfile::gaussian};
            auto tr = integrate_g(GFormState{g0, 0.0}, cfg);
            gaps.push_back(norm_hs(tr.back().g - ref.back().g, 1.0));
            pass = pass && gaps.back() < prev;
            prev = gaps.back();
        }
        slope_d = fit_slope(deltas, gaps);
        pass = pass && std::abs(slope_d - 0.5) < 0.15;
    }
    // viscosity sweep: gap to the epsilon=0 run scales ~ epsilon
    {
        Grid g(256);
        auto g0 = (0.3 * random_band_limited(g, 13, 10, 1.0)).real_part();
        SolverConfig base;
        base.dt = 1e-3;
        base.t_end = 0.25;
        auto ref = integrate_g(GFormState{g0, 0.0}, base);
        std::vector<double> epss = {0.04, 0.02, 0.01, 0.005}, gaps;
        double prev = 1e9;
        for (double e : epss) {
            SolverConfig cfg = base;
            cfg.epsilon = e;
            auto tr = integrate_g(GFormState{g0, 0.0}, cfg);
            gaps.push_back(norm_hs(tr.back().g - ref.back().g, 1.0));
            pass = pass && gaps.back() < prev;
            prev = gaps.back();
        }
        slope_e = fit_slope(epss, gaps);
        pass = pass && std::abs(slope_e - 1.0) < 0.2;
    }
    report(10, pass, "H1 continuity rates in delta and epsilon",
           "slopes " + fmt(slope_d) + " / " + fmt(slope_e));
}

void criterion_11() {
    Grid g(128);
    SolverConfig cfg;
    cfg.dt = 2e-3;
    cfg.t_end = 0.2;
    auto tr = integrate_g(seeded_state(g, 4, 0.1, 6), cfg);
    // 9 tracked characteristics: center, two symmetric pairs, four extras
    auto rep = rigidity_check(tr, 1.0, {0.3, 0.6}, {2.0, 3.0, 4.5, 5.5});
    double worst = 0.0;
    for (double r : rep.identity_residual) worst = std::max(worst, r);
    report(11, tr.completed && worst < 1e-6,
           "characteristic rigidity identity on 9 tracked paths",
           "max residual " + fmt(worst));
}

void criterion_12() {
    // corner family: tip speed error |Z_t(tip)+i| ~ eps^{1-nu} and the
    // angle-jump drift (sampled at comoving offsets +-2 eps) both shrink
    // with eps. The eps scale itself caps the achievable speed-error ratio
    // at (0.1/0.025)^{1-nu} ~ 2.3, so the check asserts monotonicity, a
    // ratio of at least 1.9 and the predicted power law within +-0.15.
    const double nu = 0.4;
    Grid g(1024);
    std::vector<double> epss = {0.1, 0.05, 0.025};
    std::vector<double> tip_err, drift;
    bool ok = true;
    for (double eps : epss) {
        auto s0 = make_corner_data(nu, eps, g);
        SolverConfig cfg;
        cfg.dt = 0.0;
        cfg.t_end = 0.1;
        auto tr = integrate_g(s0, cfg);
        ok = ok && tr.completed;
        auto rep = rigidity_check(tr, std::numbers::pi, {2.0 * eps});
        tip_err.push_back(
            std::abs(rep.tip_velocity.back() + Complex(0.0, 1.0)));
        drift.push_back(
            std::abs(rep.angle_jump.back() - rep.angle_jump.front()));
    }
    for (size_t i = 0; i + 1 < epss.size(); ++i) {
        ok = ok && tip_err[i + 1] < tip_err[i];
        ok = ok && drift[i + 1] < drift[i];
    }
    const double ratio = tip_err.front() / tip_err.back();
    const double slope = fit_slope(epss, tip_err);
    ok = ok && ratio >= 1.9 && std::abs(slope - (1.0 - nu)) < 0.15;
    report(12, ok, "tip velocity approaches -i at rate eps^(1-nu)",
           "ratio " + fmt(ratio) + ", slope " + fmt(slope));
}

void criterion_13() {
    Grid g(128);
    SolverConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 0.2;
    auto s0 = seeded_state(g, 4, 0.1, 6);
    auto tr = integrate_g(s0, cfg);
    auto self = difference_energy(tr, tr);
    double worst = self.initial_term;
    for (size_t i = 0; i < self.times.size(); ++i)
        worst = std::max({worst, self.hhalf_term[i],
                          self.integral_accum[i]});
    // viscosity pair of the same data: the stability ratio stays finite
    SolverConfig ca = cfg, cb = cfg;
    ca.epsilon = 0.05;
    cb.epsilon = 0.025;
    auto dp = difference_energy(integrate_g(s0, ca), integrate_g(s0, cb));
    const bool finite = std::isfinite(dp.F.back()) &&
                        std::isfinite(dp.ratio_F);
    report(13, worst < 1e-20 && finite,
           "difference energy: zero for identical runs, finite for eps pair",
           "self " + fmt(worst) + ", pair F(t)/F(0) = " + fmt(dp.ratio_F));
}

void criterion_14(const char* cli_path) {
    namespace fs = std::filesystem;
    auto slurp = [](const fs::path& p) {
        std::ifstream is(p, std::ios::binary);
        std::ostringstream os;
        os << is.rdbuf();
        return os.str();
    };
    fs::path tmp = fs::temp_directory_path() / "muskat_acceptance_14";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    bool pass;
    std::string how;
    if (cli_path && fs::exists(cli_path)) {
        const std::string args =
            " --preset random --seed 21 --amplitude 0.2 --n 64 --dt 0.005"
            " --t-end 0.05 >/dev/null 2>&1";
        const std::string a = (tmp / "a").string(), b = (tmp / "b").string();
        pass = std::system((std::string(cli_path) + " --out " + a + args)
                               .c_str()) == 0 &&
               std::system((std::string(cli_path) + " --out " + b + args)
                               .c_str()) == 0 &&
               slurp(a + "/g/diag.csv") == slurp(b + "/g/diag.csv") &&
               !slurp(a + "/g/diag.csv").empty();
        how = "two CLI invocations";
    } else {
        auto p = plan_from_json({{"preset", "random"},
                                 {"seed", 21},
                                 {"amplitude", 0.2},
                                 {"n", 64},
                                 {"dt", 0.005},
                                 {"t_end", 0.05}});
        p.output_dir = (tmp / "a").string();
        const int ra = run_plan(p);
        p.output_dir = (tmp / "b").string();
        const int rb = run_plan(p);
        pass = ra == 0 && rb == 0 &&
               slurp(tmp / "a/g/diag.csv") == slurp(tmp / "b/g/diag.csv");
        how = "two in-process runs";
    }
    fs::remove_all(tmp);
    report(14, pass, "bit-identical CSV output for identical plans", how);
}

} // namespace

int main(int argc, char** argv) {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    criterion_13();
    criterion_14(argc > 1 ? argv[1] : nullptr);
    std::printf("%d of 14 criteria passed\n", 14 - failures);
    return failures == 0 ? 0 : 1;
}
