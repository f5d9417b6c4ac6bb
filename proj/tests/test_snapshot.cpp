#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <unistd.h>

#include "muskat/integrator.hpp"
#include "muskat/random_fields.hpp"
#include "muskat/snapshot.hpp"

using namespace muskat;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("muskat_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

bool coeffs_identical(const SpectralField& a, const SpectralField& b) {
    if (a.size() != b.size()) return false;
    for (int j = 0; j < a.size(); ++j) {
        const Complex x = a.coeff(j), y = b.coeff(j);
        if (std::memcmp(&x, &y, sizeof x) != 0) return false;
    }
    return true;
}

} // namespace

TEST_CASE("g state roundtrips bit-exactly") {
    TempDir tmp;
    Grid g(128);
    GFormState s{(0.37 * random_band_limited(g, 77, 50, 1.0)).real_part(),
                 0.625};
    save_file(tmp.file("g.bin"), s);
    auto rec = load_file(tmp.file("g.bin"));
    auto* back = std::get_if<GFormState>(&rec);
    REQUIRE(back != nullptr);
    REQUIRE(back->time == s.time);
    REQUIRE(coeffs_identical(back->g, s.g));
}

TEST_CASE("z state roundtrips bit-exactly") {
    TempDir tmp;
    Grid g(64);
    auto z = g_to_z(
        GFormState{(0.2 * random_band_limited(g, 5, 20, 1.0)).real_part(),
                   1.5});
    save_file(tmp.file("z.bin"), z);
    auto rec = load_file(tmp.file("z.bin"));
    auto* back = std::get_if<ZFormState>(&rec);
    REQUIRE(back != nullptr);
    REQUIRE(back->time == z.time);
    REQUIRE(coeffs_identical(back->inv_zap, z.inv_zap));
    REQUIRE(coeffs_identical(back->zap, z.zap));
    REQUIRE(coeffs_identical(back->z_minus_id, z.z_minus_id));
}

TEST_CASE("checkpoints carry the dissipation accumulator") {
    TempDir tmp;
    Grid g(64);
    Checkpoint<GFormState> cp{
        GFormState{(0.1 * random_band_limited(g, 9, 10, 1.0)).real_part(),
                   0.25},
        0.0123456789};
    save_file(tmp.file("cp.bin"), cp);
    auto rec = load_file(tmp.file("cp.bin"));
    auto* back = std::get_if<Checkpoint<GFormState>>(&rec);
    REQUIRE(back != nullptr);
    REQUIRE(back->dissipation_accum == cp.dissipation_accum);
    REQUIRE(coeffs_identical(back->state.g, cp.state.g));
}

TEST_CASE("resuming from a saved state reproduces the full run bit-exactly") {
    TempDir tmp;
    Grid g(64);
    GFormState s0{(0.15 * random_band_limited(g, 13, 8, 1.0)).real_part(),
                  0.0};
    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.02;
    auto full = integrate_g(s0, cfg);

    SolverConfig half = cfg;
    half.t_end = 0.01;
    auto first = integrate_g(s0, half);
    save_file(tmp.file("mid.bin"), first.back());
    auto rec = load_file(tmp.file("mid.bin"));
    auto resumed0 = std::get<GFormState>(rec);
    SolverConfig rest = cfg;
    auto second = integrate_g(resumed0, rest);
    REQUIRE(second.completed);
    REQUIRE(coeffs_identical(second.back().g, full.back().g));
}

TEST_CASE("corrupt and truncated files are rejected") {
    TempDir tmp;
    {
        std::ofstream os(tmp.file("bad.bin"), std::ios::binary);
        os << "NOTASNAPSHOT";
    }
    REQUIRE_THROWS(load_file(tmp.file("bad.bin")));
    Grid g(64);
    GFormState s{SpectralField::zero(g), 0.0};
    save_file(tmp.file("trunc.bin"), s);
    auto size = std::filesystem::file_size(tmp.file("trunc.bin"));
    std::filesystem::resize_file(tmp.file("trunc.bin"), size / 2);
    REQUIRE_THROWS(load_file(tmp.file("trunc.bin")));
    REQUIRE_THROWS(load_file(tmp.file("missing.bin")));
}
