#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "muskat/experiment.hpp"

using namespace muskat;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("muskat_exp_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("defaults") {
    auto p = plan_from_json(nlohmann::json::object());
    REQUIRE(p.kind == ExperimentKind::single);
    REQUIRE(p.n == 256);
    REQUIRE(p.base.auto_dt());
    REQUIRE(p.base.scheme == Scheme::rk4);
    REQUIRE(p.base.epsilon == 0.0);
    REQUIRE(p.base.mollifier.delta == 0.0);
    REQUIRE(p.initial.preset == "flat");
}

TEST_CASE("unknown keys and out-of-range values are fatal") {
    REQUIRE_THROWS_AS(plan_from_json({{"bogus", 1}}), ConfigError);
    REQUIRE_THROWS_AS(plan_from_json({{"n", 13}}), ConfigError);
    REQUIRE_THROWS_AS(plan_from_json({{"dt", -0.1}}), ConfigError);
    REQUIRE_THROWS_AS(plan_from_json({{"dt", "fast"}}), ConfigError);
    REQUIRE_THROWS_AS(plan_from_json({{"scheme", "euler"}}), ConfigError);
    REQUIRE_THROWS_AS(plan_from_json({{"preset", "vortex"}}), ConfigError);
    REQUIRE_THROWS_AS(plan_from_json({{"kind", "mystery"}}), ConfigError);
    try {
        plan_from_json({{"nu", 1.5}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("nu must lie in (0,1)") !=
                std::string::npos);
    }
}

TEST_CASE("sweep kinds require sweep values") {
    REQUIRE_THROWS_AS(plan_from_json({{"kind", "dt_sweep"}}), ConfigError);
    REQUIRE_THROWS_AS(
        plan_from_json({{"kind", "difference_pair"},
                        {"sweep", std::vector<double>{0.1}}}),
        ConfigError);
    auto p = plan_from_json({{"kind", "dt_sweep"},
                             {"sweep", std::vector<double>{1e-2, 5e-3}}});
    REQUIRE(p.sweep_values.size() == 2);
}

TEST_CASE("overrides take precedence over the config file") {
    TempDir tmp;
    {
        std::ofstream os(tmp.file("cfg.json"));
        os << R"({"n": 64, "t_end": 0.5, "preset": "cosine"})";
    }
    auto p = load_plan(tmp.file("cfg.json"), {{"t_end", 0.25}});
    REQUIRE(p.n == 64);
    REQUIRE(p.base.t_end == 0.25);
    REQUIRE(p.initial.preset == "cosine");
    REQUIRE_THROWS_AS(load_plan(tmp.file("absent.json"), {}), ConfigError);
}

TEST_CASE("initial data presets") {
    auto flat = make_initial_state(plan_from_json({{"n", 64}}));
    REQUIRE(flat.g.max_abs() < 1e-15);
    auto cosine = make_initial_state(plan_from_json(
        {{"n", 64}, {"preset", "cosine"}, {"amplitude", 0.01}, {"mode", 2}}));
    REQUIRE(std::abs(2.0 * cosine.g.coeff_at(2) - Complex(0.01, 0.0)) <
            1e-15);
    auto ra = make_initial_state(plan_from_json(
        {{"n", 64}, {"preset", "random"}, {"seed", 4}, {"amplitude", 0.1}}));
    auto rb = make_initial_state(plan_from_json(
        {{"n", 64}, {"preset", "random"}, {"seed", 4}, {"amplitude", 0.1}}));
    REQUIRE(norm_l2(ra.g - rb.g) == 0.0); // same seed, same field
    auto corner = make_initial_state(plan_from_json(
        {{"n", 256}, {"preset", "corner"}, {"nu", 0.5}, {"corner_eps", 0.1}}));
    REQUIRE(corner.g.max_real() > 0.5);
}

TEST_CASE("flat single run produces zero diagnostics and exits clean") {
    TempDir tmp;
    auto p = plan_from_json({{"n", 64}, {"t_end", 0.1}, {"dt", 0.01}});
    p.output_dir = tmp.file("flat");
    REQUIRE(run_plan(p) == 0);
    const std::string csv = slurp(tmp.file("flat") + "/g/diag.csv");
    REQUIRE_FALSE(csv.empty());
    // the summary records the resolved configuration
    const std::string summary = slurp(tmp.file("flat") + "/summary.txt");
    REQUIRE(summary.find("n = 64") != std::string::npos);
    REQUIRE(summary.find("status = ok") != std::string::npos);
}

TEST_CASE("identical plans produce bit-identical artifacts") {
    TempDir tmp;
    auto p = plan_from_json({{"n", 64},
                             {"t_end", 0.05},
                             {"dt", 0.005},
                             {"preset", "random"},
                             {"seed", 8},
                             {"amplitude", 0.2}});
    p.output_dir = tmp.file("a");
    REQUIRE(run_plan(p) == 0);
    p.output_dir = tmp.file("b");
    REQUIRE(run_plan(p) == 0);
    REQUIRE(slurp(tmp.file("a") + "/g/diag.csv") ==
            slurp(tmp.file("b") + "/g/diag.csv"));
    REQUIRE(slurp(tmp.file("a") + "/g/final_state.bin") ==
            slurp(tmp.file("b") + "/g/final_state.bin"));
}

TEST_CASE("blow-up exits with a partial trajectory on disk") {
    TempDir tmp;
    auto p = plan_from_json({{"n", 64},
                             {"t_end", 5.0},
                             {"dt", 0.5},
                             {"preset", "cosine"},
                             {"amplitude", 5.0},
                             {"mode", 8}});
    p.output_dir = tmp.file("boom");
    REQUIRE(run_plan(p) == 3);
    REQUIRE(std::filesystem::exists(tmp.file("boom") + "/g/diag.csv"));
    const std::string summary = slurp(tmp.file("boom") + "/summary.txt");
    REQUIRE(summary.find("status = numerical_failure") != std::string::npos);
}

TEST_CASE("dt sweep reports a fourth-order fit") {
    TempDir tmp;
    auto p = plan_from_json({{"kind", "dt_sweep"},
                             {"n", 64},
                             {"t_end", 0.1},
                             {"preset", "cosine"},
                             {"amplitude", 0.1},
                             {"sweep", std::vector<double>{2e-2, 1e-2, 5e-3}}});
    p.output_dir = tmp.file("sweep");
    REQUIRE(run_plan(p) == 0);
    const std::string summary = slurp(tmp.file("sweep") + "/summary.txt");
    const auto pos = summary.find("order_fit = ");
    REQUIRE(pos != std::string::npos);
    const double order = std::stod(summary.substr(pos + 12));
    REQUIRE(order > 3.5);
    REQUIRE(order < 4.6);
}
