#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "muskat/model.hpp"

namespace muskat {

enum class Scheme { rk4, imex };
enum class Formulation { g, z, both };

struct SolverConfig {
    double epsilon = 0.0;     // artificial viscosity (coefficient of Lap)
    MollifierSpec mollifier{};
    double dt = 0.0;          // <= 0 selects the CFL heuristic
    double t_end = 1.0;
    Scheme scheme = Scheme::rk4;
    double cfl_safety = 0.5;
    Formulation formulation = Formulation::g;
    double blowup_h2_threshold = 1e6;
    int max_halvings = 10;

    bool auto_dt() const { return dt <= 0.0; }
};

template <typename State>
struct Trajectory {
    std::vector<State> states; // every accepted step, including the initial
    bool completed = false;
    bool blow_up_suspected = false;
    std::string failure_reason;

    const State& front() const { return states.front(); }
    const State& back() const { return states.back(); }
    size_t steps() const { return states.size() - 1; }
};

using GTrajectory = Trajectory<GFormState>;
using ZTrajectory = Trajectory<ZFormState>;

namespace detail {

// phi1(z) = (e^z - 1)/z, phi2(z) = (e^z - 1 - z)/z^2, series near 0.
inline double phi1(double z) {
    if (std::abs(z) < 0.1) {
        double acc = 1.0, term = 1.0;
        for (int m = 2; m <= 10; ++m) {
            term *= z / m;
            acc += term;
        }
        return acc;
    }
    return (std::exp(z) - 1.0) / z;
}

inline double phi2(double z) {
    if (std::abs(z) < 0.1) {
        double acc = 0.5, term = 0.5;
        for (int m = 3; m <= 11; ++m) {
            term *= z / m;
            acc += term;
        }
        return acc;
    }
    return (std::exp(z) - 1.0 - z) / (z * z);
}

inline bool finite(const SpectralField& f) {
    for (const auto& v : f.values())
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

} // namespace detail

/// Full right-hand side of the mollified-viscous g equation:
/// dg/dt = eps * Lap g + J_delta(-b dg - c^2 |d| g).
inline SpectralField rhs_g_full(const GFormState& s, const SolverConfig& cfg) {
    SpectralField nonlin = rhs_g(s);
    SpectralField out = mollify(nonlin, cfg.mollifier);
    if (cfg.epsilon != 0.0) out = out + cfg.epsilon * laplacian(s.g);
    return out;
}

/// CFL heuristic dt for the g formulation.
inline double auto_dt_g(const GFormState& s, const SolverConfig& cfg) {
    CoefficientSet coef = coefficients_g(s);
    const double kmax = s.g.grid().size() / 2.0;
    double dt = std::numeric_limits<double>::infinity();
    const double bmax = coef.b.max_abs();
    if (bmax > 0.0) dt = std::min(dt, s.g.grid().spacing() / bmax);
    if (cfg.scheme == Scheme::rk4) {
        const double c2max = std::max(coef.script_A.max_abs(), 1e-12);
        double stiff = c2max * kmax;
        if (cfg.epsilon > 0.0) stiff += cfg.epsilon * kmax * kmax;
        dt = std::min(dt, 1.0 / stiff);
    }
    if (!std::isfinite(dt)) dt = 0.1; // flat data: nothing moves
    return cfg.cfl_safety * dt;
}

namespace detail {

inline GFormState rk4_step_g(const GFormState& s, const SolverConfig& cfg,
                             double dt) {
    auto at = [&](const SpectralField& g, double t) {
        return GFormState{g, t};
    };
    SpectralField k1 = rhs_g_full(s, cfg);
    SpectralField k2 =
        rhs_g_full(at(s.g + (0.5 * dt) * k1, s.time + 0.5 * dt), cfg);
    SpectralField k3 =
        rhs_g_full(at(s.g + (0.5 * dt) * k2, s.time + 0.5 * dt), cfg);
    SpectralField k4 = rhs_g_full(at(s.g + dt * k3, s.time + dt), cfg);
    SpectralField g1 =
        s.g + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return {g1.real_part(), s.time + dt};
}

// ETDRK2 with the constant-coefficient split L = eps*Lap - mu*|d|,
// mu = spatial mean of c^2; L is diagonal in Fourier space.
inline GFormState imex_step_g(const GFormState& s, const SolverConfig& cfg,
                              double dt) {
    CoefficientSet coef = coefficients_g(s);
    const double mu = coef.script_A.mean().real();
    auto lsym = [&](int k) {
        return -cfg.epsilon * static_cast<double>(k) * k - mu * std::abs(k);
    };
    auto nonlinear = [&](const GFormState& st) {
        SpectralField nl = mollify(rhs_g(st), cfg.mollifier);
        return nl + mu * abs_derivative(st.g);
    };
    SpectralField n0 = nonlinear(s);
    SpectralField a = s.g.map_coeffs(
        [&](int k, Complex c) { return std::exp(dt * lsym(k)) * c; }, true);
    a = a + n0.map_coeffs(
                [&](int k, Complex c) {
                    return dt * detail::phi1(dt * lsym(k)) * c;
                },
                true);
    GFormState mid{a.real_part(), s.time + dt};
    SpectralField n1 = nonlinear(mid);
    SpectralField corr = (n1 - n0).map_coeffs(
        [&](int k, Complex c) { return dt * detail::phi2(dt * lsym(k)) * c; },
        true);
    return {(a + corr).real_part(), s.time + dt};
}

} // namespace detail

struct StepOutcome {
    bool ok = false;
    double dt_used = 0.0;
    int halvings = 0;
};

namespace detail {

/// Restrict a z-formulation field to the k <= 0 half of the spectrum. The
/// continuous solution lives on this holomorphic manifold, where the
/// transport prefactor -i*A*d is neutral; roundoff leaking into k > 0
/// grows like e^{kt} and must be removed after every accepted step.
inline SpectralField project_holomorphic(const SpectralField& f) {
    return f.map_coeffs(
        [](int k, Complex c) { return k > 0 ? Complex(0.0, 0.0) : c; },
        false);
}

} // namespace detail

/// One accepted step of the configured scheme; on rejection (non-finite
/// values or >10% growth of max|g|) retries with halved dt, up to
/// cfg.max_halvings times.
inline StepOutcome step_g(GFormState& s, const SolverConfig& cfg, double dt) {
    const double old_max = s.g.max_abs();
    for (int halving = 0; halving <= cfg.max_halvings; ++halving) {
        GFormState cand = cfg.scheme == Scheme::imex
                              ? detail::imex_step_g(s, cfg, dt)
                              : detail::rk4_step_g(s, cfg, dt);
        if (detail::finite(cand.g) &&
            cand.g.max_abs() <= 1.1 * old_max + 1e-14) {
            s = std::move(cand);
            return {true, dt, halving};
        }
        dt *= 0.5;
    }
    return {false, dt, cfg.max_halvings};
}

/// Coupled Eulerian right-hand sides of the z formulation:
/// d/dt (1/Z_{,a'}) and d/dt (Z - a') = Z_t - b Z_{,a'}.
inline std::pair<SpectralField, SpectralField>
rhs_z_full(const SpectralField& inv_zap, const SpectralField& z_minus_id,
           double time) {
    SpectralField zap = pointwise_reciprocal(inv_zap);
    ZFormState z{inv_zap, zap, z_minus_id, time};
    CoefficientSet coef = coefficients_z(z);
    SpectralField d = derivative(inv_zap);
    SpectralField du = Complex(0.0, -1.0) * multiply(coef.script_A, d) +
                       multiply(coef.B1, inv_zap) - multiply(coef.b, d);
    SpectralField dz = darcy_velocity(z) - multiply(coef.b, zap);
    return {du, dz};
}

inline double auto_dt_z(const ZFormState& z, const SolverConfig& cfg) {
    CoefficientSet coef = coefficients_z(z);
    const double kmax = z.inv_zap.grid().size() / 2.0;
    double dt = std::numeric_limits<double>::infinity();
    const double bmax = coef.b.max_abs();
    if (bmax > 0.0) dt = std::min(dt, z.inv_zap.grid().spacing() / bmax);
    const double c2max = std::max(coef.script_A.max_abs(), 1e-12);
    dt = std::min(dt, 1.0 / (c2max * kmax));
    if (!std::isfinite(dt)) dt = 0.1;
    return cfg.cfl_safety * dt;
}

/// One accepted RK4 step of the z formulation (the z path always uses the
/// explicit scheme; the stiff prefactor is not constant-coefficient here).
inline StepOutcome step_z(ZFormState& z, const SolverConfig& cfg, double dt) {
    const double old_max = z.inv_zap.max_abs();
    for (int halving = 0; halving <= cfg.max_halvings; ++halving) {
        auto [k1u, k1z] = rhs_z_full(z.inv_zap, z.z_minus_id, z.time);
        auto [k2u, k2z] =
            rhs_z_full(z.inv_zap + (0.5 * dt) * k1u,
                       z.z_minus_id + (0.5 * dt) * k1z, z.time + 0.5 * dt);
        auto [k3u, k3z] =
            rhs_z_full(z.inv_zap + (0.5 * dt) * k2u,
                       z.z_minus_id + (0.5 * dt) * k2z, z.time + 0.5 * dt);
        auto [k4u, k4z] = rhs_z_full(z.inv_zap + dt * k3u,
                                     z.z_minus_id + dt * k3z, z.time + dt);
        SpectralField u1 =
            z.inv_zap + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        SpectralField zm1 =
            z.z_minus_id + (dt / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        const bool sane = detail::finite(u1) && detail::finite(zm1) &&
                          u1.max_abs() <= 1.1 * old_max + 1e-14 &&
                          u1.max_abs() < 1e6; // min |Z_{,a'}| >= 1e-6
        if (sane) {
            SpectralField u1p = detail::project_holomorphic(u1);
            z = ZFormState{
                u1p,
                detail::project_holomorphic(pointwise_reciprocal(u1p)),
                detail::project_holomorphic(zm1), z.time + dt};
            return {true, dt, halving};
        }
        dt *= 0.5;
    }
    return {false, dt, cfg.max_halvings};
}

/// Driver loop: advance to t_end, or stop early with the reason recorded
/// when the blow-up monitor trips (discrete H^2 of g above threshold, or a
/// failed halving cascade). Never truncates silently.
inline GTrajectory integrate_g(const GFormState& initial,
                               const SolverConfig& cfg) {
    GTrajectory traj;
    traj.states.push_back(initial);
    GFormState s = initial;
    const double tol = 1e-12 * std::max(1.0, cfg.t_end);
    while (s.time < cfg.t_end - tol) {
        double dt = cfg.auto_dt() ? auto_dt_g(s, cfg) : cfg.dt;
        const double remaining = cfg.t_end - s.time;
        // keep the nominal dt when the mismatch is pure accumulation
        // roundoff, so a run split at a checkpoint stays bit-identical
        if (remaining < dt * (1.0 - 1e-9)) dt = remaining;
        StepOutcome out = step_g(s, cfg, dt);
        if (s.time > cfg.t_end) s.time = cfg.t_end;
        if (!out.ok) {
            traj.failure_reason = "step rejected after halving cascade";
            traj.blow_up_suspected = true;
            return traj;
        }
        traj.states.push_back(s);
        if (norm_hs(s.g, 2.0) > cfg.blowup_h2_threshold) {
            traj.failure_reason = "discrete H^2 norm exceeded threshold";
            traj.blow_up_suspected = true;
            return traj;
        }
    }
    traj.completed = true;
    return traj;
}

inline ZTrajectory integrate_z(const ZFormState& initial,
                               const SolverConfig& cfg) {
    ZTrajectory traj;
    traj.states.push_back(initial);
    ZFormState z = initial;
    const double tol = 1e-12 * std::max(1.0, cfg.t_end);
    while (z.time < cfg.t_end - tol) {
        double dt = cfg.auto_dt() ? auto_dt_z(z, cfg) : cfg.dt;
        const double remaining = cfg.t_end - z.time;
        if (remaining < dt * (1.0 - 1e-9)) dt = remaining;
        StepOutcome out = step_z(z, cfg, dt);
        if (z.time > cfg.t_end) z.time = cfg.t_end;
        if (!out.ok) {
            traj.failure_reason = "step rejected after halving cascade";
            traj.blow_up_suspected = true;
            return traj;
        }
        traj.states.push_back(z);
    }
    traj.completed = true;
    return traj;
}

/// Flow map samples h(alpha_seed, t_i) along a trajectory.
struct ParticleFlow {
    std::vector<double> times;
    std::vector<double> seeds;
    std::vector<std::vector<double>> positions; // [time index][seed index]
};

namespace detail {

inline SpectralField transport_b(const GFormState& s) {
    return compute_b(compute_c(s));
}

inline SpectralField transport_b(const ZFormState& z) {
    return compute_b(pointwise_abs(z.inv_zap));
}

} // namespace detail

/// Integrate dh/dt = b(h, t), h(alpha, 0) = alpha over the stored states.
/// RK4 per stored interval; the midpoint b field is interpolated in time
/// with a cubic through four neighbouring steps (uniform spacing assumed),
/// keeping the flow fourth-order accurate. Monotonicity loss across seeds
/// is fatal (the flow must stay a homeomorphism).
template <typename State>
inline ParticleFlow particle_flow(const Trajectory<State>& traj,
                                  std::vector<double> seeds) {
    const size_t m = traj.states.size();
    if (m < 2) {
        ParticleFlow flow;
        flow.times.push_back(traj.states.front().time);
        flow.seeds = seeds;
        flow.positions.push_back(seeds);
        return flow;
    }
    std::vector<SpectralField> b;
    b.reserve(m);
    for (const auto& s : traj.states) b.push_back(detail::transport_b(s));

    ParticleFlow flow;
    flow.seeds = seeds;
    flow.times.reserve(m);
    for (const auto& s : traj.states) flow.times.push_back(s.time);
    flow.positions.assign(m, seeds);

    auto bmid = [&](size_t i) {
        // 4-point midpoint interpolation of the b field on [t_i, t_{i+1}]
        if (i >= 1 && i + 2 <= m - 1)
            return (1.0 / 16.0) *
                   (9.0 * (b[i] + b[i + 1]) - b[i - 1] - b[i + 2]);
        if (m >= 4) {
            // one-sided cubic at the ends, same fourth-order accuracy
            if (i == 0)
                return (1.0 / 16.0) *
                       (5.0 * b[0] + 15.0 * b[1] - 5.0 * b[2] + b[3]);
            return (1.0 / 16.0) * (b[m - 4] - 5.0 * b[m - 3] +
                                   15.0 * b[m - 2] + 5.0 * b[m - 1]);
        }
        return 0.5 * (b[i] + b[i + 1]);
    };

    std::vector<double> h = seeds;
    for (size_t i = 0; i + 1 < m; ++i) {
        const double dt = flow.times[i + 1] - flow.times[i];
        SpectralField bm = bmid(i);
        for (size_t p = 0; p < h.size(); ++p) {
            const double k1 = b[i].evaluate(h[p]).real();
            const double k2 = bm.evaluate(h[p] + 0.5 * dt * k1).real();
            const double k3 = bm.evaluate(h[p] + 0.5 * dt * k2).real();
            const double k4 = b[i + 1].evaluate(h[p] + dt * k3).real();
            h[p] += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        for (size_t p = 0; p + 1 < h.size(); ++p)
            if (h[p + 1] <= h[p] && seeds[p + 1] > seeds[p])
                throw std::runtime_error(
                    "particle_flow: monotonicity violated, flow is no longer "
                    "a homeomorphism");
        flow.positions[i + 1] = h;
    }
    return flow;
}

} // namespace muskat
