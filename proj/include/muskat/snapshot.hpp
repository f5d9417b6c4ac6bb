#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "muskat/model.hpp"

namespace muskat {

/// Self-describing binary container for states and checkpoints.
/// Layout: 8-byte magic, u32 record kind, u32 n_points, f64 time, then one
/// coefficient block (interleaved re/im f64) per field of the formulation;
/// checkpoint records append the dissipation accumulator. Roundtrips are
/// bit-exact: coefficients are stored verbatim and node values are
/// regenerated deterministically.

namespace snapshot_detail {

inline constexpr char magic[8] = {'M', 'S', 'K', 'S', 'N', 'P', '0', '1'};

enum class RecordKind : uint32_t {
    g_state = 1,
    z_state = 2,
    g_checkpoint = 3,
    z_checkpoint = 4,
};

inline void write_u32(std::ostream& os, uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f64(std::ostream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline uint32_t read_u32(std::istream& is) {
    uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

inline double read_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

inline void write_field(std::ostream& os, const SpectralField& f) {
    for (const auto& c : f.coeffs()) {
        write_f64(os, c.real());
        write_f64(os, c.imag());
    }
}

inline SpectralField read_field(std::istream& is, const Grid& grid,
                                bool real) {
    std::vector<Complex> c(grid.size());
    for (auto& x : c) {
        const double re = read_f64(is);
        const double im = read_f64(is);
        x = Complex(re, im);
    }
    return SpectralField::from_coeffs(grid, std::move(c), real);
}

inline void write_header(std::ostream& os, RecordKind kind, int n,
                         double time) {
    os.write(magic, sizeof magic);
    write_u32(os, static_cast<uint32_t>(kind));
    write_u32(os, static_cast<uint32_t>(n));
    write_f64(os, time);
}

struct Header {
    RecordKind kind;
    int n;
    double time;
};

inline Header read_header(std::istream& is) {
    char m[8];
    is.read(m, sizeof m);
    if (!is || std::memcmp(m, magic, sizeof m) != 0)
        throw std::runtime_error("snapshot: bad magic");
    const uint32_t kind = read_u32(is);
    const uint32_t n = read_u32(is);
    const double time = read_f64(is);
    if (kind < 1 || kind > 4)
        throw std::runtime_error("snapshot: unknown record kind");
    return {static_cast<RecordKind>(kind), static_cast<int>(n), time};
}

} // namespace snapshot_detail

inline void save_state(std::ostream& os, const GFormState& s) {
    snapshot_detail::write_header(os, snapshot_detail::RecordKind::g_state,
                                  s.g.size(), s.time);
    snapshot_detail::write_field(os, s.g);
}

inline void save_state(std::ostream& os, const ZFormState& z) {
    snapshot_detail::write_header(os, snapshot_detail::RecordKind::z_state,
                                  z.inv_zap.size(), z.time);
    snapshot_detail::write_field(os, z.inv_zap);
    snapshot_detail::write_field(os, z.zap);
    snapshot_detail::write_field(os, z.z_minus_id);
}

/// Run state plus the running dissipation integral, so resumed runs keep
/// accumulating the time-integrated part of the energy from the original
/// start time.
template <typename State>
struct Checkpoint {
    State state;
    double dissipation_accum = 0.0;
};

inline void save_checkpoint(std::ostream& os,
                            const Checkpoint<GFormState>& cp) {
    snapshot_detail::write_header(os,
                                  snapshot_detail::RecordKind::g_checkpoint,
                                  cp.state.g.size(), cp.state.time);
    snapshot_detail::write_field(os, cp.state.g);
    snapshot_detail::write_f64(os, cp.dissipation_accum);
}

inline void save_checkpoint(std::ostream& os,
                            const Checkpoint<ZFormState>& cp) {
    snapshot_detail::write_header(os,
                                  snapshot_detail::RecordKind::z_checkpoint,
                                  cp.state.inv_zap.size(), cp.state.time);
    snapshot_detail::write_field(os, cp.state.inv_zap);
    snapshot_detail::write_field(os, cp.state.zap);
    snapshot_detail::write_field(os, cp.state.z_minus_id);
    snapshot_detail::write_f64(os, cp.dissipation_accum);
}

using LoadedRecord =
    std::variant<GFormState, ZFormState, Checkpoint<GFormState>,
                 Checkpoint<ZFormState>>;

inline LoadedRecord load_record(std::istream& is) {
    using snapshot_detail::RecordKind;
    auto hdr = snapshot_detail::read_header(is);
    Grid grid(hdr.n);
    switch (hdr.kind) {
        case RecordKind::g_state:
            return GFormState{snapshot_detail::read_field(is, grid, true),
                              hdr.time};
        case RecordKind::g_checkpoint: {
            GFormState s{snapshot_detail::read_field(is, grid, true),
                         hdr.time};
            const double acc = snapshot_detail::read_f64(is);
            return Checkpoint<GFormState>{std::move(s), acc};
        }
        case RecordKind::z_state:
        case RecordKind::z_checkpoint: {
            SpectralField u = snapshot_detail::read_field(is, grid, false);
            SpectralField zap = snapshot_detail::read_field(is, grid, false);
            SpectralField zmid =
                snapshot_detail::read_field(is, grid, false);
            ZFormState z{std::move(u), std::move(zap), std::move(zmid),
                         hdr.time};
            if (hdr.kind == RecordKind::z_state) return z;
            const double acc = snapshot_detail::read_f64(is);
            return Checkpoint<ZFormState>{std::move(z), acc};
        }
    }
    throw std::runtime_error("snapshot: unreachable");
}

template <typename Record>
inline void save_file(const std::string& path, const Record& rec) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("snapshot: cannot open " + path);
    if constexpr (std::is_same_v<Record, GFormState> ||
                  std::is_same_v<Record, ZFormState>)
        save_state(os, rec);
    else
        save_checkpoint(os, rec);
    if (!os) throw std::runtime_error("snapshot: write failed: " + path);
}

inline LoadedRecord load_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("snapshot: cannot open " + path);
    LoadedRecord rec = load_record(is);
    if (!is) throw std::runtime_error("snapshot: truncated file: " + path);
    return rec;
}

} // namespace muskat
